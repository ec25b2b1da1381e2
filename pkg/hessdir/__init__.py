from hessdir._config import options

from hessdir.errors import (
    AdmissibilityError,
    AdmissibilityLost,
    ConfigError,
    DomainError,
    HessdirError,
    LinearSolveFailure,
    NoConvergence,
    NumericError,
    PositivityError,
)
from hessdir.symfun import (
    andrews_form,
    cone_classify,
    cone_margin,
    elem_sym,
    elem_sym_all,
    elem_sym_grad,
    f_eval,
    f_hessian,
    find_R,
    matrix_F_grad,
    matrix_Sk,
)
from hessdir.model import (
    ProblemSpec,
    catalog_instantiate,
    eval_A_jet,
    eval_Btilde_jet,
    make_problem,
    manufactured_B,
)
from hessdir.grid import BoxGrid, GridField, discrete_jet
from hessdir.solver import (
    SolveReport,
    apply_linearized,
    assemble_linearized,
    residual,
    solve,
)
from hessdir.structure import (
    CertificateReport,
    SamplingSpec,
    check_A_bounded,
    check_admissible_field,
    check_Btilde_convex,
    check_domain_convex,
    check_monotone,
    check_regular,
    transform_problem,
)
from hessdir.verify import (
    BarrierParams,
    boundary_barrier_audit,
    boundary_decomposition_check,
    d2_stats,
    interior_barrier_audit,
    tangential_frame_check,
    trace_ellipticity_check,
)
from hessdir.io import emit_field, load_config, read_field
from hessdir.tools._show_versions import show_versions

from . import _version

__version__ = _version.get_versions()["version"]
