from hessdir.io.config import RunConfig, build_problem, load_config  # noqa
from hessdir.io.fields import emit_field, read_field  # noqa
from hessdir.io.reports import RunReport, write_report, write_table  # noqa
