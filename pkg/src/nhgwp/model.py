"""Physical model and Gaussian wavepacket state.

The Hamiltonian is

    H = sum_j (P_j + i b_j(X_j))^2 / (2 m_j) + V(X)

with V a real multivariate polynomial and b_j(x) = k_j x + c_j.

Convention warning: the quadratic term of the local expansion is written
without a factor 1/2,

    V(x) ~ V(q) + grad . (x - q) + (x - q) . H2 . (x - q),

so ``H2`` is HALF the Hessian. Every equation of motion in this package uses
that half-Hessian. For V = m w^2 x^2 / 2 it equals m w^2 / 2, which is what
makes alpha = i m w / 2 a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonNormalizable, ValidationError


def _as_vector(values, dim, name, dtype=float):
    arr = np.atleast_1d(np.asarray(values, dtype=dtype))
    if arr.shape != (dim,):
        raise ValidationError(f"expected a vector of length {dim}, got shape {arr.shape}", key=name)
    return arr


@dataclass(frozen=True)
class PolynomialPotential:
    """Real-coefficient polynomial in ``dim`` variables.

    ``terms`` is a sequence of ``(exponents, coefficient)`` pairs where
    ``exponents`` is a length-``dim`` tuple of non-negative integers.
    Repeated exponent tuples are summed.
    """

    dim: int
    terms: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("dimension must be positive", key="dim")
        merged = {}
        for exps, coeff in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.dim:
                raise ValidationError(f"exponent {exps} does not have {self.dim} entries", key="potential")
            if any(e < 0 for e in exps):
                raise ValidationError(f"negative exponent in {exps}", key="potential")
            coeff = float(coeff)
            if not np.isfinite(coeff):
                raise ValidationError("coefficients must be finite reals", key="potential")
            merged[exps] = merged.get(exps, 0.0) + coeff
        terms = tuple(sorted((e, c) for e, c in merged.items() if c != 0.0))
        object.__setattr__(self, "terms", terms)
        exps = np.array([e for e, _ in terms], dtype=int).reshape(len(terms), self.dim)
        object.__setattr__(self, "_exps", exps)

    @classmethod
    def from_coeffs_1d(cls, coeffs):
        """Build a 1D polynomial from dense power coefficients c0, c1, c2, ..."""
        return cls(1, tuple(((n,), c) for n, c in enumerate(coeffs)))

    @classmethod
    def zero(cls, dim):
        return cls(dim, ())

    @classmethod
    def harmonic(cls, masses, omegas):
        """sum_j m_j w_j^2 x_j^2 / 2"""
        masses = np.atleast_1d(masses)
        omegas = np.atleast_1d(omegas)
        dim = len(masses)
        terms = []
        for j in range(dim):
            exps = [0] * dim
            exps[j] = 2
            terms.append((tuple(exps), 0.5 * masses[j] * omegas[j] ** 2))
        return cls(dim, tuple(terms))

    @property
    def degree(self):
        if not self.terms:
            return 0
        return int(self._exps.sum(axis=1).max())

    def dense_coeffs_1d(self):
        """Dense power coefficients; only defined for dim == 1."""
        if self.dim != 1:
            raise ValidationError("dense coefficients exist only for dim == 1", key="potential")
        out = [0.0] * (self.degree + 1)
        for (n,), c in self.terms:
            out[n] += c
        return out

    def __call__(self, x):
        """Evaluate at points ``x`` of shape (..., dim); complex input allowed."""
        x = np.asarray(x)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        total = np.zeros(x.shape[:-1], dtype=np.result_type(x, float))
        for exps, c in self.terms:
            term = c
            for j, e in enumerate(exps):
                if e:
                    term = term * x[..., j] ** e
            total = total + term
        return total

    def lha(self, q):
        return potential_lha(self, q)


def potential_lha(potential, q):
    """Value, gradient and half-Hessian of ``potential`` at complex point ``q``.

    Polynomials are entire, so evaluation at complex ``q`` is the exact
    analytic continuation.

    Returns
    -------
    value : complex
    grad : complex ndarray (D,)
    half_hessian : complex ndarray (D, D)
        Hessian / 2, the matrix multiplying (x-q).(x-q) with no 1/2 in front.
    """
    dim = potential.dim
    q = _as_vector(q, dim, "q", dtype=complex)
    qs = q.tolist()
    value = 0j
    grad = [0j] * dim
    hess = [[0j] * dim for _ in range(dim)]
    # scalar loops: D and the term count are small, and this runs every RK stage
    for exps, c in potential.terms:
        pw0 = [qs[j] ** e for j, e in enumerate(exps)]
        pw1 = [e * qs[j] ** (e - 1) if e >= 1 else 0j for j, e in enumerate(exps)]
        pw2 = [e * (e - 1) * qs[j] ** (e - 2) if e >= 2 else 0j for j, e in enumerate(exps)]
        value += c * _prod(pw0)
        for a in range(dim):
            if not exps[a]:
                continue
            grad[a] += c * pw1[a] * _prod(pw0, skip=(a,))
            hess[a][a] += c * pw2[a] * _prod(pw0, skip=(a,))
            for b in range(a + 1, dim):
                if exps[b]:
                    h = c * pw1[a] * pw1[b] * _prod(pw0, skip=(a, b))
                    hess[a][b] += h
                    hess[b][a] += h
    return value, np.array(grad, dtype=complex), 0.5 * np.array(hess, dtype=complex)


def _prod(values, skip=()):
    out = 1 + 0j
    for i, v in enumerate(values):
        if i not in skip:
            out *= v
    return out


@dataclass(frozen=True)
class LinearVectorPotential:
    """Separable imaginary vector potential b_j(x_j) = slope_j * x_j + offset_j."""

    slope: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        slope = np.atleast_1d(np.asarray(self.slope, dtype=float))
        offset = np.atleast_1d(np.asarray(self.offset, dtype=float))
        if slope.shape != offset.shape or slope.ndim != 1:
            raise ValidationError("slope and offset must be vectors of equal length", key="b")
        if not (np.all(np.isfinite(slope)) and np.all(np.isfinite(offset))):
            raise ValidationError("slope and offset must be finite", key="b")
        object.__setattr__(self, "slope", slope)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def constant(cls, k):
        k = np.atleast_1d(np.asarray(k, dtype=float))
        return cls(np.zeros_like(k), k)

    @classmethod
    def zero(cls, dim):
        return cls(np.zeros(dim), np.zeros(dim))

    @property
    def dim(self):
        return len(self.slope)

    @property
    def is_constant(self):
        return not np.any(self.slope)

    def __call__(self, x):
        return self.slope * x + self.offset

    def __eq__(self, other):
        if not isinstance(other, LinearVectorPotential):
            return NotImplemented
        return np.array_equal(self.slope, other.slope) and np.array_equal(self.offset, other.offset)

    __hash__ = None


def eval_b(vecpot, q):
    """b(q) (complex, analytically continued) and b'(q) (real) per dimension."""
    q = _as_vector(q, vecpot.dim, "q", dtype=complex)
    return vecpot.slope * q + vecpot.offset, vecpot.slope.copy()


@dataclass(frozen=True)
class ModelSpec:
    dim: int
    masses: np.ndarray
    potential: PolynomialPotential
    vecpot: LinearVectorPotential
    hbar: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValidationError("dimension must be a positive integer", key="dim")
        masses = _as_vector(self.masses, self.dim, "mass")
        if np.any(masses <= 0) or not np.all(np.isfinite(masses)):
            raise ValidationError("masses must be positive", key="mass")
        object.__setattr__(self, "masses", masses)
        if not (self.hbar > 0 and np.isfinite(self.hbar)):
            raise ValidationError("hbar must be positive", key="hbar")
        object.__setattr__(self, "hbar", float(self.hbar))
        if self.potential.dim != self.dim:
            raise ValidationError("potential dimension does not match dim", key="potential")
        if self.vecpot.dim != self.dim:
            raise ValidationError("vector potential dimension does not match dim", key="b")

    def __eq__(self, other):
        if not isinstance(other, ModelSpec):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.masses, other.masses)
            and self.hbar == other.hbar
            and self.potential == other.potential
            and self.vecpot == other.vecpot
        )

    __hash__ = None

    def with_vecpot(self, vecpot):
        return ModelSpec(self.dim, self.masses, self.potential, vecpot, self.hbar)


@dataclass(frozen=True)
class WavepacketState:
    """Parameters of psi(x) = exp(i/hbar [(x-q).alpha.(x-q) + p.(x-q) + gamma]).

    ``alpha`` is stored symmetrized. Positive definiteness of Im(alpha) is
    not checked here; see :func:`require_normalizable`.
    """

    alpha: np.ndarray
    q: np.ndarray
    p: np.ndarray
    gamma: complex = 0j
    t: float = 0.0

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=complex))
        if q.ndim != 1:
            raise ValidationError("q must be a vector", key="q")
        dim = len(q)
        p = _as_vector(self.p, dim, "p", dtype=complex)
        alpha = np.asarray(self.alpha, dtype=complex)
        if alpha.ndim == 0 or alpha.size == 1 and dim == 1:
            alpha = alpha.reshape(1, 1)
        if alpha.shape != (dim, dim):
            raise ValidationError(f"alpha must be {dim}x{dim}", key="alpha")
        alpha = 0.5 * (alpha + alpha.T)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self):
        return len(self.q)

    def replace(self, **changes):
        fields = dict(alpha=self.alpha, q=self.q, p=self.p, gamma=self.gamma, t=self.t)
        fields.update(changes)
        return WavepacketState(**fields)

    def width_squared(self, hbar=1.0):
        """Squared widths sigma_j^2 = hbar/2 [(Im alpha)^-1]_jj.

        In 1D this is hbar / (2 Im alpha). Note |psi|^2 has variance
        sigma^2 / 2, not sigma^2.
        """
        return 0.5 * hbar * np.diag(np.linalg.inv(self.alpha.imag)).real


def require_normalizable(alpha):
    """Raise NonNormalizable unless Im(alpha) is symmetric positive definite."""
    im = np.asarray(alpha).imag
    try:
        np.linalg.cholesky(0.5 * (im + im.T))
    except np.linalg.LinAlgError:
        raise NonNormalizable(f"Im(alpha) is not positive definite: eigenvalues {np.linalg.eigvalsh(0.5 * (im + im.T))}")


def unit_norm_gamma(alpha, hbar=1.0):
    """Im gamma making a real-centred packet with width matrix ``alpha`` unit-normalized.

    Solves (pi hbar)^D / det(2 Im alpha) = exp(4 Im gamma / hbar).
    """
    alpha = np.atleast_2d(np.asarray(alpha, dtype=complex))
    require_normalizable(alpha)
    dim = alpha.shape[0]
    _, logdet = np.linalg.slogdet(2.0 * alpha.imag)
    return 1j * 0.25 * hbar * (dim * np.log(np.pi * hbar) - logdet)


def gaussian_state(q0, p0, alpha0, gamma0="unit-norm", hbar=1.0, t=0.0):
    """Convenience constructor with a gamma policy: 'unit-norm', 'zero' or a number."""
    q0 = np.atleast_1d(np.asarray(q0, dtype=complex))
    alpha0 = np.asarray(alpha0, dtype=complex)
    if alpha0.ndim < 2:
        alpha0 = np.diag(np.broadcast_to(alpha0, q0.shape)).astype(complex)
    if isinstance(gamma0, str):
        if gamma0 == "unit-norm":
            gamma = unit_norm_gamma(alpha0, hbar)
        elif gamma0 == "zero":
            gamma = 0j
        else:
            raise ValidationError(f"unknown gamma policy {gamma0!r}", key="gamma0")
    else:
        gamma = complex(gamma0)
    return WavepacketState(alpha0, q0, p0, gamma, t)
