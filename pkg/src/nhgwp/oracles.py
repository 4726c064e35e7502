"""Closed-form 1D solutions for a constant imaginary vector potential b = k.

Each oracle takes the physical initial data (q0, p0 real, alpha0 = i hbar /
(2 sigma0^2)) and returns the guiding trajectory q~, alpha and the real
centre. The guiding trajectory starts at q~(0) = q0 - k sigma0^2 / hbar.

The width parameter obeys a Riccati equation whose solution is a Moebius
map of alpha0,

    alpha(t) = (a alpha0 + b) / (c alpha0 + d),

with (a, b, c, d) the propagator of the linear lift u'' = -w^2 u (or u'' = 0
for the free case). This form has no cot/tan singularities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class FreeParticle:
    pass


@dataclass(frozen=True)
class LinearRamp:
    beta: float


@dataclass(frozen=True)
class Harmonic:
    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValidationError("omega must be positive", key="omega")


@dataclass(frozen=True)
class OracleParams:
    m: float = 1.0
    hbar: float = 1.0
    k: float = 0.0
    sigma0_sq: float = 0.125
    q0: float = 0.0
    p0: float = 0.0
    scenario: object = FreeParticle()

    def __post_init__(self):
        if not self.sigma0_sq > 0:
            raise ValidationError("sigma0^2 must be positive", key="sigma0_sq")
        if not (self.m > 0 and self.hbar > 0):
            raise ValidationError("m and hbar must be positive")

    @classmethod
    def from_alpha0(cls, alpha0, **kwargs):
        hbar = kwargs.get("hbar", 1.0)
        alpha0 = complex(alpha0)
        if alpha0.real != 0 or alpha0.imag <= 0:
            raise ValidationError("alpha0 must be purely imaginary with positive imaginary part", key="alpha0")
        return cls(sigma0_sq=hbar / (2.0 * alpha0.imag), **kwargs)

    @property
    def alpha0(self):
        return 1j * self.hbar / (2.0 * self.sigma0_sq)

    @property
    def guiding_q0(self):
        return self.q0 - self.k * self.sigma0_sq / self.hbar


def mobius(matrix, z):
    (a, b), (c, d) = matrix
    return (a * z + b) / (c * z + d)


def _require(params, kind):
    if not isinstance(params.scenario, kind):
        raise ValidationError(f"oracle needs a {kind.__name__} scenario, got {params.scenario!r}", key="scenario")


def _free_alpha(params, t):
    t = np.asarray(t, dtype=float)
    return mobius(((1.0, 0.0), (2.0 * t / params.m, 1.0)), params.alpha0)


def free_particle(params, t):
    """(q~, alpha, Q, P) for V = 0."""
    _require(params, FreeParticle)
    m, hbar, k, s2 = params.m, params.hbar, params.k, params.sigma0_sq
    t = np.asarray(t, dtype=float)
    q_guide = params.guiding_q0 + params.p0 * t / m
    alpha = _free_alpha(params, t)
    Q = params.q0 + params.p0 * t / m + hbar * k * t**2 / (m**2 * s2)
    P = params.p0 + hbar * k * t / (m * s2)
    return q_guide, alpha, Q, P


def linear_ramp(params, t):
    """(p, q~, Q) for V = beta x; alpha is the free-particle one."""
    _require(params, LinearRamp)
    m, hbar, k, s2 = params.m, params.hbar, params.k, params.sigma0_sq
    beta = params.scenario.beta
    t = np.asarray(t, dtype=float)
    p = params.p0 - beta * t
    q_guide = params.guiding_q0 + params.p0 * t / m - beta * t**2 / (2.0 * m)
    Q = params.q0 + params.p0 * t / m + (hbar * k / (m**2 * s2) - beta / (2.0 * m)) * t**2
    return p, q_guide, Q


def linear_ramp_alpha(params, t):
    _require(params, LinearRamp)
    return _free_alpha(params, t)


def critical_beta(params):
    """Ramp slope 2 hbar k / (m sigma0^2) that cancels the non-Hermitian drift."""
    return 2.0 * params.hbar * params.k / (params.m * params.sigma0_sq)


def harmonic_alpha(params, t):
    _require(params, Harmonic)
    m, w = params.m, params.scenario.omega
    t = np.asarray(t, dtype=float)
    c, s = np.cos(w * t), np.sin(w * t)
    return mobius(((c, -0.5 * m * w * s), (2.0 * s / (m * w), c)), params.alpha0)


def harmonic(params, t):
    """(q~, alpha, Q) for V = m w^2 x^2 / 2."""
    _require(params, Harmonic)
    m, hbar, k, s2 = params.m, params.hbar, params.k, params.sigma0_sq
    w = params.scenario.omega
    t = np.asarray(t, dtype=float)
    c, s = np.cos(w * t), np.sin(w * t)
    q_guide = params.guiding_q0 * c + params.p0 / (m * w) * s
    alpha = harmonic_alpha(params, t)
    shift = (hbar**2 * s**2 + m**2 * w**2 * s2**2 * c**2) / (hbar * m**2 * w**2 * s2)
    return q_guide, alpha, q_guide + shift * k
