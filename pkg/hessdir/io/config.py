"""
Run configuration: strict JSON parsing, schema validation and defaults.
"""
import copy
import json
import math
from dataclasses import asdict, dataclass, field

import jsonschema

from hessdir.errors import ConfigError, DomainError
from hessdir.model import (
    CATALOG_NAMES,
    PRESET_NAMES,
    ProblemSpec,
    ZeroA,
    catalog_instantiate,
    exp_radial_field,
    make_problem,
    quadratic_field,
)

COMMANDS = ("structure", "solve", "verify", "sweep", "selftest")

#: commands whose result depends on a random sample
SAMPLING_COMMANDS = ("structure",)

_NUMBER_LIST = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_POSITIVE_LIST = {
    "type": "array",
    "items": {"type": "number", "exclusiveMinimum": 0},
    "minItems": 1,
}
_COMPONENT = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name"],
    "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
}

SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "problem"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "problem": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n", "k"],
            "properties": {
                "catalog": {"enum": list(PRESET_NAMES)},
                "custom": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "A": _COMPONENT,
                        "B": _COMPONENT,
                        "phi": _COMPONENT,
                    },
                },
                "n": {"type": "integer", "minimum": 2},
                "k": {"type": "integer", "minimum": 1},
                "box": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"lo": _NUMBER_LIST, "hi": _NUMBER_LIST},
                },
                "params": {"type": "object"},
            },
            "oneOf": [{"required": ["catalog"]}, {"required": ["custom"]}],
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "m": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 3},
                    "minItems": 1,
                }
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rtol": {"type": "number", "exclusiveMinimum": 0},
                "stage_rtol": {"type": "number", "exclusiveMinimum": 0},
                "max_newton": {"type": "integer", "minimum": 1},
                "homotopy_stages": {"type": "integer", "minimum": 0},
                "max_bisections": {"type": "integer", "minimum": 0},
                "init": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "mode": {"enum": ["harmonic", "phi"]},
                        "mu0": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
            },
        },
        "checks": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": ["integer", "null"], "minimum": 0},
                "samples": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "minimum": 0},
                "strict": {"type": "boolean"},
                "c0": {"type": "number", "exclusiveMinimum": 0},
                "P": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "K_list": _POSITIVE_LIST,
                "eps1_list": {
                    "type": "array",
                    "items": {"type": "number", "minimum": 0},
                    "minItems": 1,
                },
                "C_cap": {"type": "number", "exclusiveMinimum": 0},
                "subsolution": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"c": {"type": "number", "exclusiveMinimum": 0}},
                },
                "boundary": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "face": {
                            "type": "array",
                            "items": {"type": "integer", "minimum": 0},
                            "minItems": 2,
                            "maxItems": 2,
                        },
                        "K_list": _POSITIVE_LIST,
                        "mu_list": _POSITIVE_LIST,
                        "N_list": _POSITIVE_LIST,
                        "delta_steps": {
                            "type": "array",
                            "items": {"type": "integer", "minimum": 1},
                            "minItems": 1,
                        },
                        "M": {"type": "number", "exclusiveMinimum": 0},
                        "eps1": {"type": "number", "minimum": 0},
                    },
                },
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "params": {
                    "type": "object",
                    "additionalProperties": {"type": "array", "minItems": 1},
                },
                "m": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 3},
                    "minItems": 1,
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
    },
}

DEFAULTS = {
    "grid": {},
    "solver": {
        "rtol": 1e-10,
        "stage_rtol": 1e-8,
        "max_newton": 50,
        "homotopy_stages": 8,
        "max_bisections": 4,
        "init": {"mode": "harmonic", "mu0": 1.0},
    },
    "checks": {
        "seed": None,
        "samples": 4,
        "tol": 1e-8,
        "strict": False,
        "c0": 1.0,
        "P": 2.0,
    },
    "verify": {
        "K_list": [2.0**j for j in range(9)],
        "eps1_list": [0.0, 0.01, 0.1, 1.0],
        "C_cap": 1e3,
        "subsolution": {"c": 0.1},
        "boundary": {
            "face": [0, 0],
            "K_list": [10.0, 30.0, 100.0],
            "mu_list": [0.5, 1.0],
            "N_list": [1.0, 10.0],
            "delta_steps": [2, 4, 8],
            "M": 1.0,
            "eps1": 0.0,
        },
    },
    "sweep": {"params": {}, "m": []},
    "output": {"dir": "."},
}

_FIELDS = {"quadratic": quadratic_field, "exp_radial": exp_radial_field}


def _reject_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise ConfigError(f"duplicate key {key!r}")
        out[key] = value
    return out


def _reject_constant(name):
    raise ConfigError(f"non-finite number {name} is not valid JSON")


def parse_strict(text):
    """
    Parse JSON text, rejecting duplicate keys and ``NaN``/``Infinity``.

    Raises
    ------
    ConfigError
        With an empty pointer.
    """
    try:
        return json.loads(
            text,
            object_pairs_hook=_reject_duplicates,
            parse_constant=_reject_constant,
        )
    except json.JSONDecodeError as err:
        raise ConfigError(f"config parse error: {err}")


def _pointer(path):
    return "".join(f"/{part}" for part in path)


def _merge(defaults, values):
    out = copy.deepcopy(defaults)
    for key, value in values.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict) and out[key]:
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def validate(raw):
    """
    Validate a parsed config against :data:`SCHEMA` and the cross-field
    rules.

    Raises
    ------
    ConfigError
        With the JSON pointer of the first offending member.
    """
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(
        validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path))
    )
    if errors:
        err = errors[0]
        pointer = _pointer(err.absolute_path)
        raise ConfigError(f"{pointer or '/'}: {err.message}", pointer=pointer)
    problem = raw["problem"]
    n, k = problem["n"], problem["k"]
    if k > n:
        raise ConfigError(f"k={k} exceeds n={n}", pointer="/problem/k")
    box = problem.get("box", {})
    for key in ("lo", "hi"):
        if key in box and len(box[key]) not in (1, n):
            raise ConfigError(
                f"box.{key} has {len(box[key])} entries, expected {n}",
                pointer=f"/problem/box/{key}",
            )
    m = raw.get("grid", {}).get("m")
    if m is not None and len(m) not in (1, n):
        raise ConfigError(
            f"grid.m has {len(m)} entries, expected {n}", pointer="/grid/m"
        )
    face = raw.get("verify", {}).get("boundary", {}).get("face")
    if face is not None and (face[0] >= n or face[1] > 1):
        raise ConfigError(
            f"face {face} is not (axis < n, side in 0/1)",
            pointer="/verify/boundary/face",
        )
    for path, value in _walk(raw):
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError("non-finite number", pointer=_pointer(path))


def _walk(obj, path=()):
    if isinstance(obj, dict):
        for key, value in obj.items():
            yield from _walk(value, path + (key,))
    elif isinstance(obj, list):
        for i, value in enumerate(obj):
            yield from _walk(value, path + (i,))
    else:
        yield path, obj


@dataclass
class RunConfig:
    """A validated run configuration with defaults filled."""

    command: str
    problem: dict
    grid: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw, seed=None):
        """
        Validate ``raw`` and fill defaults.

        Parameters
        ----------
        raw : dict
        seed : int, optional
            Overrides ``checks.seed``.
        """
        validate(raw)
        merged = _merge(DEFAULTS, raw)
        if seed is not None:
            if seed < 0:
                raise ConfigError(
                    f"seed {seed} must be non-negative", pointer="/checks/seed"
                )
            merged["checks"]["seed"] = int(seed)
        n = merged["problem"]["n"]
        m = merged["grid"].get("m", [33])
        merged["grid"]["m"] = list(m) * n if len(m) == 1 else list(m)
        if merged["command"] in SAMPLING_COMMANDS and merged["checks"]["seed"] is None:
            raise ConfigError(
                f"command {merged['command']!r} needs a sampling seed",
                pointer="/checks/seed",
            )
        return cls(**merged)

    def to_dict(self):
        return asdict(self)

    def canonical(self):
        """Sorted-key JSON text of the full config."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def box(self):
        box = self.problem.get("box", {})
        n = self.problem["n"]
        lo = box.get("lo", [0.0])
        hi = box.get("hi", [1.0])
        return (lo * n if len(lo) == 1 else lo), (hi * n if len(hi) == 1 else hi)


def load_config(path, seed=None):
    """
    Read and validate a run configuration file.

    Parameters
    ----------
    path : str or path object
    seed : int, optional
        Overrides ``checks.seed``.

    Returns
    -------
    RunConfig

    Raises
    ------
    ConfigError
    """
    try:
        with open(path) as f:
            text = f.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}")
    raw = parse_strict(text)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return RunConfig.from_dict(raw, seed=seed)


def _component(spec, pointer):
    name = spec["name"]
    params = spec.get("params", {})
    if name not in CATALOG_NAMES:
        raise ConfigError(f"unknown catalog entry {name!r}", pointer=pointer + "/name")
    try:
        return catalog_instantiate(name, params)
    except DomainError as err:
        raise ConfigError(str(err), pointer=pointer + "/params")


def build_problem(cfg, **overrides):
    """
    The :class:`~hessdir.model.ProblemSpec` described by ``cfg.problem``.

    ``overrides`` update the preset parameters (used by sweeps).
    """
    problem = cfg.problem
    n, k = problem["n"], problem["k"]
    lo, hi = cfg.box()
    if "catalog" in problem:
        params = {**problem.get("params", {}), **overrides}
        try:
            return make_problem(problem["catalog"], n, k, lo, hi, params)
        except DomainError as err:
            raise ConfigError(str(err), pointer="/problem/params")
    custom = problem["custom"]
    A = ZeroA()
    if "A" in custom:
        A = _component(custom["A"], "/problem/custom/A").A
        if A is None:
            raise ConfigError(
                "not a coefficient entry", pointer="/problem/custom/A/name"
            )
    B = None
    if "B" in custom:
        B = _component(custom["B"], "/problem/custom/B").B
        if B is None:
            raise ConfigError("not a source entry", pointer="/problem/custom/B/name")
    else:
        B = catalog_instantiate("const_B").B
    phi_spec = custom.get("phi", {"name": "quadratic"})
    if phi_spec["name"] not in _FIELDS:
        raise ConfigError(
            f"unknown boundary field {phi_spec['name']!r}",
            pointer="/problem/custom/phi/name",
        )
    try:
        phi = _FIELDS[phi_spec["name"]](**phi_spec.get("params", {}))
        return ProblemSpec(n, k, lo, hi, A, B, phi, name="custom")
    except (TypeError, DomainError) as err:
        raise ConfigError(str(err), pointer="/problem/custom")
