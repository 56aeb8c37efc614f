"""TOML problem files.

Every file has a ``kind`` and kind-specific expression strings, plus optional
``[sampling]`` overrides and ``[ufuncs]`` test bodies for arbitrary functions::

    kind = "complex_ode"
    rhs = "-3*u*p - u^3"

    [sampling]
    points = 64
    box = { x = [0.1, 2.1], u = [[-2, 2], [-2, 2]] }

    [ufuncs]
    w = ["1 + t + t^2", "exp(t/4)"]
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .expr import ParseError, parse
from .sampling import Box

KINDS = ("complex_ode", "real_system", "symmetry_check", "transform_check", "solution_check", "integrate")


class ProblemError(ValueError):
    """The problem file is unreadable, malformed, or misses required fields."""


@dataclass
class ProblemFile:
    kind: str
    data: dict
    path: str = "<memory>"
    sampling: dict = field(default_factory=dict)
    ufuncs: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.data.get(key, default)

    def require(self, *keys):
        missing = [k for k in keys if k not in self.data]
        if missing:
            raise ProblemError(f"{self.path}: kind {self.kind!r} needs {', '.join(missing)}")
        return [self.data[k] for k in keys]

    def table(self, key, required=True) -> dict:
        value = self.data.get(key)
        if value is None:
            if required:
                raise ProblemError(f"{self.path}: missing [{key}] table")
            return {}
        if not isinstance(value, dict):
            raise ProblemError(f"{self.path}: {key} must be a table")
        return value


def parse_box(value, name: str) -> Box:
    """``[lo, hi]`` is a real interval, ``[[re_lo, re_hi], [im_lo, im_hi]]`` a rectangle."""
    try:
        if len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
            return Box.real(*value)
        (a, b), (c, d) = value
        return Box((float(a), float(b)), (float(c), float(d)))
    except (TypeError, ValueError):
        raise ProblemError(f"bad box for {name!r}: {value!r}") from None


def parse_box_spec(spec: str) -> dict:
    """Command-line box syntax ``x=0.1:2.1,u=-2:2:-2:2``."""
    out = {}
    for part in filter(None, (p.strip() for p in spec.split(","))):
        name, sep, rng = part.partition("=")
        if not sep:
            raise ValueError(f"box entry {part!r} lacks '='")
        nums = [float(v) for v in rng.split(":")]
        if len(nums) == 2:
            out[name.strip()] = Box.real(*nums)
        elif len(nums) == 4:
            out[name.strip()] = Box((nums[0], nums[1]), (nums[2], nums[3]))
        else:
            raise ValueError(f"box entry {part!r} needs 2 or 4 numbers")
    return out


def load_problem(path: str) -> ProblemFile:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ProblemError(f"{path}: {exc}") from None
    return problem_from_dict(data, path)


def problem_from_dict(data: dict, path: str = "<memory>") -> ProblemFile:
    data = dict(data)
    kind = data.pop("kind", None)
    if kind not in KINDS:
        raise ProblemError(f"{path}: kind must be one of {', '.join(KINDS)} (got {kind!r})")
    sampling = dict(data.pop("sampling", {}) or {})
    if "box" in sampling:
        sampling["box"] = {k: parse_box(v, k) for k, v in sampling["box"].items()}
    unknown = set(sampling) - {"points", "seed", "tolerance", "retry_limit", "box"}
    if unknown:
        raise ProblemError(f"{path}: unknown sampling keys {sorted(unknown)}")
    ufuncs = {}
    for name, bodies in (data.pop("ufuncs", {}) or {}).items():
        if isinstance(bodies, str):
            bodies = [bodies]
        try:
            ufuncs[name] = tuple(parse(b, {"t"}) for b in bodies)
        except ParseError as exc:
            raise ProblemError(f"{path}: ufuncs.{name}: {exc}") from None
    return ProblemFile(kind, data, path, sampling, ufuncs)
