import json

from hessdir.errors import ConfigError
from hessdir.io.config import (
    DEFAULTS,
    RunConfig,
    build_problem,
    load_config,
    parse_strict,
)
from hessdir.model import ConstB, SkewProjectorA

import pytest


def _raw(command="solve", **problem):
    base = {"catalog": "zero_A_const_B", "n": 2, "k": 2}
    base.update(problem)
    return {"command": command, "problem": base}


def _pointer(raw, seed=None):
    with pytest.raises(ConfigError) as err:
        RunConfig.from_dict(raw, seed=seed)
    return err.value.pointer


class TestParse:
    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate key 'n'"):
            parse_strict('{"n": 1, "n": 2}')

    @pytest.mark.parametrize("literal", ["NaN", "Infinity", "-Infinity"])
    def test_non_finite(self, literal):
        with pytest.raises(ConfigError, match="non-finite"):
            parse_strict('{"x": %s}' % literal)

    def test_syntax_error(self):
        with pytest.raises(ConfigError) as err:
            parse_strict('{"x": ')
        assert err.value.pointer == ""


class TestValidate:
    def test_minimal_config_gets_defaults(self):
        cfg = RunConfig.from_dict(_raw())
        assert cfg.grid["m"] == [33, 33]
        assert cfg.solver == DEFAULTS["solver"]
        assert cfg.checks["seed"] is None
        assert cfg.box() == ([0.0, 0.0], [1.0, 1.0])

    def test_partial_sections_merge(self):
        raw = _raw()
        raw["solver"] = {"init": {"mode": "phi"}}
        cfg = RunConfig.from_dict(raw)
        assert cfg.solver["init"] == {"mode": "phi", "mu0": 1.0}
        assert cfg.solver["max_newton"] == 50

    def test_order_above_dimension(self):
        assert _pointer(_raw(k=3)) == "/problem/k"

    def test_schema_minimum(self):
        assert _pointer(_raw(k=0)) == "/problem/k"

    def test_one_dimensional_problem_rejected(self):
        assert _pointer(_raw(n=1, k=1)) == "/problem/n"

    def test_default_init_is_harmonic(self):
        assert RunConfig.from_dict(_raw()).solver["init"]["mode"] == "harmonic"

    def test_unknown_member(self):
        raw = _raw()
        raw["problem"]["bogus"] = 1
        assert _pointer(raw) == "/problem"
        raw = _raw()
        raw["extra"] = {}
        assert _pointer(raw) == ""

    def test_catalog_or_custom(self):
        raw = _raw(custom={})
        assert _pointer(raw) == "/problem"

    def test_unknown_command(self):
        assert _pointer(_raw(command="plot")) == "/command"

    @pytest.mark.parametrize(
        "section, value, pointer",
        [
            ("box", {"lo": [0.0, 0.0, 0.0]}, "/problem/box/lo"),
            ("box", {"hi": [1.0, 2.0, 3.0]}, "/problem/box/hi"),
        ],
    )
    def test_box_lengths(self, section, value, pointer):
        assert _pointer(_raw(**{section: value})) == pointer

    def test_grid_length(self):
        raw = _raw()
        raw["grid"] = {"m": [9, 9, 9]}
        assert _pointer(raw) == "/grid/m"
        raw["grid"] = {"m": [9, 17]}
        assert RunConfig.from_dict(raw).grid["m"] == [9, 17]

    def test_face(self):
        raw = _raw(command="verify")
        raw["verify"] = {"boundary": {"face": [2, 0]}}
        assert _pointer(raw) == "/verify/boundary/face"

    def test_sampling_needs_seed(self):
        raw = _raw(command="structure")
        assert _pointer(raw) == "/checks/seed"
        assert RunConfig.from_dict(raw, seed=3).checks["seed"] == 3
        raw["checks"] = {"seed": 11}
        assert RunConfig.from_dict(raw).checks["seed"] == 11

    def test_negative_seed(self):
        assert _pointer(_raw(), seed=-1) == "/checks/seed"

    def test_canonical_ignores_key_order(self):
        a = RunConfig.from_dict(
            {"problem": {"k": 1, "n": 2, "catalog": "power_B"}, "command": "solve"}
        )
        b = RunConfig.from_dict(_raw(catalog="power_B", k=1))
        assert a.canonical() == b.canonical()
        assert json.loads(a.canonical())["problem"]["k"] == 1


class TestBuildProblem:
    def test_catalog(self):
        cfg = RunConfig.from_dict(_raw(catalog="skew_A_const_B", params={"s": 0.2}))
        prob = build_problem(cfg)
        assert prob.name == "skew_A_const_B"
        assert prob.params == {"s": 0.2}
        assert build_problem(cfg, s=0.3).params == {"s": 0.3}

    def test_catalog_bad_params(self):
        cfg = RunConfig.from_dict(_raw(params={"bogus": 1.0}))
        with pytest.raises(ConfigError) as err:
            build_problem(cfg)
        assert err.value.pointer == "/problem/params"

    def test_custom(self):
        raw = {
            "command": "solve",
            "problem": {
                "n": 2,
                "k": 1,
                "box": {"lo": [-1.0], "hi": [1.0]},
                "custom": {
                    "A": {"name": "skew_projector_A", "params": {"s": 0.2}},
                    "phi": {"name": "quadratic", "params": {"mu": 2.0}},
                },
            },
        }
        prob = build_problem(RunConfig.from_dict(raw))
        assert prob.name == "custom"
        assert isinstance(prob.A, SkewProjectorA)
        assert isinstance(prob.B, ConstB)
        assert prob.lo == (-1.0, -1.0)

    @pytest.mark.parametrize(
        "custom, pointer",
        [
            ({"A": {"name": "const_B"}}, "/problem/custom/A/name"),
            ({"B": {"name": "zero_A"}}, "/problem/custom/B/name"),
            ({"A": {"name": "no_such"}}, "/problem/custom/A/name"),
            (
                {"A": {"name": "skew_projector_A", "params": {"s": -1.0}}},
                "/problem/custom/A/params",
            ),
            ({"phi": {"name": "cubic"}}, "/problem/custom/phi/name"),
            ({"phi": {"name": "quadratic", "params": {"nope": 1}}}, "/problem/custom"),
        ],
    )
    def test_custom_errors(self, custom, pointer):
        raw = {"command": "solve", "problem": {"n": 2, "k": 1, "custom": custom}}
        with pytest.raises(ConfigError) as err:
            build_problem(RunConfig.from_dict(raw))
        assert err.value.pointer == pointer


class TestLoad:
    def test_load(self, tmpdir):
        path = tmpdir.join("run.json")
        path.write(json.dumps(_raw(command="structure")))
        cfg = load_config(str(path), seed=5)
        assert cfg.command == "structure"
        assert cfg.checks["seed"] == 5

    def test_missing_file(self, tmpdir):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(str(tmpdir.join("absent.json")))

    def test_not_an_object(self, tmpdir):
        path = tmpdir.join("run.json")
        path.write("[1, 2]")
        with pytest.raises(ConfigError, match="JSON object"):
            load_config(str(path))
