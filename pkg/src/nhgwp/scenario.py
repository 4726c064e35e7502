"""Scenario files: flat ``key = value`` text with ``#`` comments.

Vectors are comma separated and complex numbers use ``a+bi``. For
``dim = 1`` the potential is a dense coefficient list (``potential.coeffs =
0,0,0.5`` is x^2/2). For higher dimensions it is a ``;`` separated list of
``multi-index:coeff`` pairs (``potential.terms = 2,0:0.5; 0,2:0.5``).

``grid.scheme = none`` keeps the grid as the x-axis of GWD heatmaps without
running a grid propagation.

A minimal file::

    dim = 1
    mass = 1
    b.offset = 1
    alpha0 = 4i
    dt = 1e-3
    t_final = 10
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParseError, ValidationError
from .model import LinearVectorPotential, ModelSpec, PolynomialPotential, gaussian_state

MODES = ("gwd", "grid", "compare", "analytic")
SCHEMES = ("spectral", "cn", "none")
GUIDES = ("auto", "none")
OUTPUTS = ("trajectory", "density", "report")

_KEYS = (
    "mode",
    "dim",
    "mass",
    "hbar",
    "potential.coeffs",
    "potential.terms",
    "b.slope",
    "b.offset",
    "q0",
    "p0",
    "alpha0",
    "gamma0",
    "guide",
    "dt",
    "t_final",
    "sample_stride",
    "grid.n",
    "grid.L",
    "grid.center",
    "grid.scheme",
    "density.time_stride",
    "density.x_stride",
    "outputs",
)

_REAL = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


def parse_real(text):
    text = text.strip()
    if not re.fullmatch(_REAL, text) and text.lower() not in ("inf", "-inf", "+inf", "nan"):
        raise ValueError(f"not a real number: {text!r}")
    return float(text)


def parse_complex(text):
    """Parse ``a``, ``bi``, ``a+bi``, ``a-bi``, ``i`` or ``-i``."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    if s in ("i", "+i"):
        return 1j
    if s == "-i":
        return -1j
    if s.endswith("i"):
        body = s[:-1]
        # split at the last sign that is not part of an exponent
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                real_part, imag_part = body[:pos], body[pos:]
                if imag_part in ("+", "-"):
                    imag_part += "1"
                return complex(parse_real(real_part), parse_real(imag_part))
        return complex(0.0, parse_real(body))
    return complex(parse_real(s), 0.0)


def format_real(value):
    return repr(float(value))


def format_complex(value):
    value = complex(value)
    if value.imag == 0 and not np.signbit(value.imag):
        return format_real(value.real)
    im = repr(float(value.imag))
    sign = "" if im.startswith("-") else "+"
    return f"{format_real(value.real)}{sign}{im}i"


@dataclass(frozen=True)
class GridConfig:
    n: int = 4096
    length: float = 40.0
    center: float = 0.0
    scheme: str = "spectral"
    time_stride: int = 10
    x_stride: int = 8


@dataclass(frozen=True)
class Scenario:
    model: ModelSpec
    q0: np.ndarray
    p0: np.ndarray
    alpha0: np.ndarray
    gamma0: object = "unit-norm"
    dt: float = 1e-3
    t_final: float = 10.0
    sample_stride: int = 10
    guide: str = "auto"
    grid: GridConfig | None = None
    outputs: tuple = field(default=OUTPUTS)
    mode: str = "gwd"

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.model == other.model
            and np.array_equal(self.q0, other.q0)
            and np.array_equal(self.p0, other.p0)
            and np.array_equal(self.alpha0, other.alpha0)
            and self.gamma0 == other.gamma0
            and (self.dt, self.t_final, self.sample_stride) == (other.dt, other.t_final, other.sample_stride)
            and (self.guide, self.grid, self.outputs, self.mode) == (other.guide, other.grid, other.outputs, other.mode)
        )

    __hash__ = None

    def initial_state(self):
        return gaussian_state(self.q0, self.p0, self.alpha0, self.gamma0, self.model.hbar)

    def with_overrides(self, **changes):
        """Copy with run or grid settings replaced; ``None`` values are ignored."""
        changes = {k: v for k, v in changes.items() if v is not None}
        grid_changes = {k: changes.pop(k) for k in ("n", "length") if k in changes}
        out = replace(self, **changes)
        if grid_changes:
            grid = out.grid if out.grid is not None else _default_grid(out.model)
            out = replace(out, grid=replace(grid, **grid_changes))
        _validate(out)
        return out


def _default_grid(model):
    return GridConfig(scheme="spectral" if model.vecpot.is_constant else "cn")


def _split_lines(text):
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ParseError(f"unknown key {key!r}", line=lineno)
        if key in entries:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        if not value:
            raise ParseError(f"empty value for {key!r}", line=lineno)
        entries[key] = (value, lineno)
    return entries


def _convert(entries, key, fn, default):
    if key not in entries:
        return default
    value, lineno = entries[key]
    try:
        return fn(value)
    except ValueError as exc:
        raise ParseError(f"{key}: {exc}", line=lineno) from None


def _real_list(text):
    return [parse_real(v) for v in text.split(",")]


def _complex_list(text):
    return [parse_complex(v) for v in text.split(",")]


def _positive_int(text):
    value = parse_real(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _terms(text):
    terms = []
    for chunk in text.split(";"):
        if ":" not in chunk:
            raise ValueError(f"expected 'multi-index:coeff', got {chunk.strip()!r}")
        idx, coeff = chunk.split(":", 1)
        terms.append((tuple(_positive_int(e) for e in idx.split(",")), parse_real(coeff)))
    return tuple(terms)


def _vector(values, dim, key):
    arr = np.asarray(values)
    if arr.shape == (1,) and dim > 1:
        arr = np.repeat(arr, dim)
    if arr.shape != (dim,):
        raise ValidationError(f"expected {dim} values, got {arr.size}", key=key)
    return arr


def _gamma(text):
    if text in ("unit-norm", "zero"):
        return text
    return parse_complex(text)


def parse_scenario(text):
    """Parse and validate scenario text; see the module docstring for the format."""
    entries = _split_lines(text)
    get = lambda key, fn, default: _convert(entries, key, fn, default)  # noqa: E731

    dim = get("dim", _positive_int, 1)
    if dim < 1:
        raise ValidationError("must be a positive integer", key="dim")
    masses = _vector(get("mass", _real_list, [1.0]), dim, "mass")
    hbar = get("hbar", parse_real, 1.0)
    if "potential.coeffs" in entries and "potential.terms" in entries:
        raise ValidationError("give either potential.coeffs or potential.terms", key="potential")
    if "potential.coeffs" in entries:
        if dim != 1:
            raise ValidationError("dense coefficients need dim = 1; use potential.terms", key="potential.coeffs")
        potential = PolynomialPotential.from_coeffs_1d(get("potential.coeffs", _real_list, None))
    elif "potential.terms" in entries:
        potential = PolynomialPotential(dim, get("potential.terms", _terms, None))
    else:
        potential = PolynomialPotential.zero(dim)
    slope = _vector(get("b.slope", _real_list, [0.0]), dim, "b.slope")
    offset = _vector(get("b.offset", _real_list, [0.0]), dim, "b.offset")
    model = ModelSpec(dim, masses, potential, LinearVectorPotential(slope, offset), hbar)

    q0 = _vector(get("q0", _real_list, [0.0]), dim, "q0").astype(float)
    p0 = _vector(get("p0", _real_list, [0.0]), dim, "p0").astype(float)
    if "alpha0" not in entries:
        raise ValidationError("is required", key="alpha0")
    alpha_vals = get("alpha0", _complex_list, None)
    if len(alpha_vals) == dim * dim and dim > 1:
        alpha0 = np.array(alpha_vals, dtype=complex).reshape(dim, dim)
    else:
        alpha0 = np.diag(_vector(alpha_vals, dim, "alpha0").astype(complex))

    grid = None
    if any(key.startswith(("grid.", "density.")) for key in entries):
        base = _default_grid(model)
        grid = GridConfig(
            n=get("grid.n", _positive_int, base.n),
            length=get("grid.L", parse_real, base.length),
            center=get("grid.center", parse_real, base.center),
            scheme=get("grid.scheme", str, base.scheme),
            time_stride=get("density.time_stride", _positive_int, base.time_stride),
            x_stride=get("density.x_stride", _positive_int, base.x_stride),
        )
    outputs = get("outputs", lambda s: tuple(v.strip() for v in s.split(",")), OUTPUTS)

    scenario = Scenario(
        model=model,
        q0=q0,
        p0=p0,
        alpha0=alpha0,
        gamma0=get("gamma0", _gamma, "unit-norm"),
        dt=get("dt", parse_real, 1e-3),
        t_final=get("t_final", parse_real, 10.0),
        sample_stride=get("sample_stride", _positive_int, 10),
        guide=get("guide", str, "auto"),
        grid=grid,
        outputs=outputs,
        mode=get("mode", str, "gwd"),
    )
    _validate(scenario)
    return scenario


def _validate(s):
    if s.mode not in MODES:
        raise ValidationError(f"must be one of {', '.join(MODES)}", key="mode")
    if s.guide not in GUIDES:
        raise ValidationError(f"must be one of {', '.join(GUIDES)}", key="guide")
    unknown = [o for o in s.outputs if o not in OUTPUTS]
    if unknown or not s.outputs:
        raise ValidationError(f"must be a subset of {', '.join(OUTPUTS)}", key="outputs")
    if not (np.isfinite(s.dt) and s.dt > 0):
        raise ValidationError("must be positive", key="dt")
    if not (np.isfinite(s.t_final) and s.t_final > s.dt):
        raise ValidationError("must exceed dt", key="t_final")
    if s.sample_stride < 1:
        raise ValidationError("must be a positive integer", key="sample_stride")
    if not np.all(np.isfinite(s.alpha0)) or not np.allclose(s.alpha0, s.alpha0.T):
        raise ValidationError("must be a finite symmetric matrix", key="alpha0")
    if not np.all(np.linalg.eigvalsh(s.alpha0.imag) > 0):
        raise ValidationError("Im alpha0 must be positive definite", key="alpha0")
    if not isinstance(s.gamma0, str) and not np.isfinite(complex(s.gamma0)):
        raise ValidationError("must be finite", key="gamma0")
    g = s.grid
    if g is not None:
        if g.scheme not in SCHEMES:
            raise ValidationError(f"must be one of {', '.join(SCHEMES)}", key="grid.scheme")
        if g.n < 8:
            raise ValidationError("needs at least 8 points", key="grid.n")
        if not (np.isfinite(g.length) and g.length > 0):
            raise ValidationError("must be positive", key="grid.L")
        if not np.isfinite(g.center):
            raise ValidationError("must be finite", key="grid.center")
        if g.time_stride < 1 or g.x_stride < 1:
            raise ValidationError("strides must be positive integers", key="density")
        if s.model.dim != 1:
            raise ValidationError("grid propagation is one-dimensional", key="grid")
        if s.mode == "grid" and g.scheme == "none":
            raise ValidationError("mode grid needs a propagation scheme", key="grid.scheme")
        if g.scheme == "spectral" and not s.model.vecpot.is_constant:
            raise ValidationError("the spectral scheme needs a constant b; use cn", key="grid.scheme")
    if s.mode == "grid" and g is None:
        raise ValidationError("mode grid needs grid settings", key="grid")


def format_scenario(s):
    """Scenario text that parses back to an equal Scenario."""
    m = s.model
    join = lambda values, fmt=format_real: ",".join(fmt(v) for v in values)  # noqa: E731
    lines = [
        f"mode = {s.mode}",
        f"dim = {m.dim}",
        f"mass = {join(m.masses)}",
        f"hbar = {format_real(m.hbar)}",
    ]
    if m.dim == 1:
        lines.append(f"potential.coeffs = {join(m.potential.dense_coeffs_1d())}")
    elif m.potential.terms:
        pairs = "; ".join(f"{','.join(str(e) for e in exps)}:{format_real(c)}" for exps, c in m.potential.terms)
        lines.append(f"potential.terms = {pairs}")
    lines += [
        f"b.slope = {join(m.vecpot.slope)}",
        f"b.offset = {join(m.vecpot.offset)}",
        f"q0 = {join(s.q0)}",
        f"p0 = {join(s.p0)}",
        f"alpha0 = {join(s.alpha0.ravel() if m.dim > 1 else np.diag(s.alpha0), format_complex)}",
        f"gamma0 = {s.gamma0 if isinstance(s.gamma0, str) else format_complex(s.gamma0)}",
        f"guide = {s.guide}",
        f"dt = {format_real(s.dt)}",
        f"t_final = {format_real(s.t_final)}",
        f"sample_stride = {s.sample_stride}",
    ]
    if s.grid is not None:
        g = s.grid
        lines += [
            f"grid.n = {g.n}",
            f"grid.L = {format_real(g.length)}",
            f"grid.center = {format_real(g.center)}",
            f"grid.scheme = {g.scheme}",
            f"density.time_stride = {g.time_stride}",
            f"density.x_stride = {g.x_stride}",
        ]
    lines.append(f"outputs = {','.join(s.outputs)}")
    return "\n".join(lines) + "\n"


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
