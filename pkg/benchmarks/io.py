import os
import shutil
import tempfile

import numpy as np

from hessdir.grid import BoxGrid, GridField
from hessdir.io.fields import emit_field, read_field


class Bench:
    params = [17, 65, 129]
    param_names = ["m"]

    def setup(self, m):
        grid = BoxGrid([0.0, 0.0], [1.0, 1.0], m)
        self.u = GridField(grid, np.random.default_rng(0).normal(size=grid.m))
        self.tmpdir = tempfile.mkdtemp()
        self.filename = os.path.join(self.tmpdir, "u.csv")
        emit_field(self.u, self.filename)

    def teardown(self, m):
        shutil.rmtree(self.tmpdir)

    def time_emit(self, m):
        emit_field(self.u, os.path.join(self.tmpdir, "out.csv"))

    def time_read(self, m):
        read_field(self.filename)
