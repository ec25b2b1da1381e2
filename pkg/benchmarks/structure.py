from hessdir.model import PowerB, SkewProjectorA
from hessdir.structure import SamplingSpec, check_Btilde_convex, check_regular


class Bench:
    param_names = ["n", "samples"]
    params = [[2, 4], [4, 16]]

    def setup(self, n, samples):
        self.spec = SamplingSpec(n=n, n_x=samples, n_z=2, n_p=16, n_pairs=8, seed=0)

    def time_check_regular(self, n, samples):
        check_regular(SkewProjectorA(1.0), self.spec, strict=True)

    def time_check_Btilde_convex(self, n, samples):
        check_Btilde_convex(PowerB(1.0, 1.0), 1, self.spec)
