"""Thawed Gaussian propagation under the non-Hermitian Hamiltonian.

State layout for the integrator is a flat complex vector
``[q (D), p (D), alpha (D*D, row major), gamma]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonNormalizable, ValidationError
from .model import WavepacketState, eval_b, potential_lha, require_normalizable

DEFAULT_DT = 1e-3


@dataclass(frozen=True)
class StateDerivative:
    dq: np.ndarray
    dp: np.ndarray
    dalpha: np.ndarray
    dgamma: complex

    def replace(self, **changes):
        fields = dict(dq=self.dq, dp=self.dp, dalpha=self.dalpha, dgamma=self.dgamma)
        fields.update(changes)
        return StateDerivative(**fields)


def _derivatives(q, p, alpha, model):
    m = model.masses
    hbar = model.hbar
    V, grad, h2 = potential_lha(model.potential, q)
    b, db = eval_b(model.vecpot, q)
    v = p + 1j * b
    dq = v / m
    dp = -grad - 1j * db / m * v
    # i alpha_kl (b'_l/m_l + b'_k/m_k): symmetric form of the 2i alpha b'/m term
    w = db / m
    mixed = 1j * alpha * (w[None, :] + w[:, None])
    dalpha = -(h2 - np.diag(db**2 / (2.0 * m)) + mixed + 2.0 * (alpha / m[None, :]) @ alpha)
    dgamma = (
        np.sum(p**2 / (2.0 * m))
        - V
        + 1j * hbar * np.sum(np.diag(alpha) / m)
        + np.sum((b**2 - hbar * db) / (2.0 * m))
    )
    return dq, dp, dalpha, dgamma


def rhs(state, model):
    """Time derivatives of (q, p, alpha, gamma).

    q and p follow the complexified classical equations
    dq = (p + i b)/m, dp = -dV - i b'/m (p + i b). The alpha equation is the
    Riccati equation with the half-Hessian (see :mod:`nhgwp.model`).

    The gamma equation uses the b' coefficient hbar b'/(2m) that follows from
    the operator term hbar b'/(2m) in H; it reduces to the constant-b form
    whenever b' = 0.
    """
    if state.dim != model.dim:
        raise ValidationError(f"state has dimension {state.dim}, model has {model.dim}", key="dim")
    dq, dp, dalpha, dgamma = _derivatives(state.q, state.p, state.alpha, model)
    return StateDerivative(dq, dp, dalpha, complex(dgamma))


def _pack(state):
    return np.concatenate([state.q, state.p, state.alpha.ravel(), [state.gamma]])


def _unpack(y, dim):
    q = y[:dim]
    p = y[dim : 2 * dim]
    alpha = y[2 * dim : 2 * dim + dim * dim].reshape(dim, dim)
    return q, p, alpha, y[-1]


def _general_rhs(model):
    dim = model.dim

    def f(y):
        q, p, alpha, _ = _unpack(y, dim)
        dq, dp, dalpha, dgamma = _derivatives(q, p, alpha, model)
        out = np.empty_like(y)
        out[:dim] = dq
        out[dim : 2 * dim] = dp
        out[2 * dim : -1] = dalpha.ravel()
        out[-1] = dgamma
        return out

    return f


def _scalar_rhs(model):
    # D = 1 with plain complex scalars; numpy call overhead dominates otherwise
    coeffs = model.potential.dense_coeffs_1d()
    d1 = [n * c for n, c in enumerate(coeffs)][1:]
    d2 = [n * c for n, c in enumerate(d1)][1:]
    m = float(model.masses[0])
    hbar = model.hbar
    k = float(model.vecpot.slope[0])
    c0 = float(model.vecpot.offset[0])
    const_alpha = k * k / (2.0 * m)
    const_gamma = -hbar * k / (2.0 * m)

    def horner(cs, x):
        acc = 0j
        for c in reversed(cs):
            acc = acc * x + c
        return acc

    def f(y):
        q, p, a, _ = y.tolist()
        b = k * q + c0
        v = p + 1j * b
        dq = v / m
        dp = -horner(d1, q) - 1j * k / m * v
        da = -(0.5 * horner(d2, q) - const_alpha + 2j * a * k / m + 2.0 * a * a / m)
        dg = p * p / (2.0 * m) - horner(coeffs, q) + 1j * hbar * a / m + b * b / (2.0 * m) + const_gamma
        return np.array((dq, dp, da, dg))

    return f


def make_flat_rhs(model):
    """Vector field on the packed state, specialised to the model."""
    if model.dim == 1:
        return _scalar_rhs(model)
    return _general_rhs(model)


def _rk4(y, f, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _to_state(y, dim, t):
    q, p, alpha, gamma = _unpack(y, dim)
    return WavepacketState(alpha.copy(), q.copy(), p.copy(), gamma, t)


def step_rk4(state, model, dt):
    """One classical RK4 step; alpha is re-symmetrized afterwards.

    Raises NonNormalizable if Im(alpha) stops being positive definite.
    """
    if dt < 0:
        raise ValidationError("dt must be non-negative", key="dt")
    if dt == 0:
        return state
    y = _rk4(_pack(state), make_flat_rhs(model), dt)
    new = _to_state(y, model.dim, state.t + dt)
    require_normalizable(new.alpha)
    return new


@dataclass
class Trajectory:
    samples: list
    model: object
    dt: float
    sample_stride: int
    steps: int = 0

    @property
    def times(self):
        return np.array([s.t for s in self.samples])

    @property
    def q(self):
        return np.array([s.q for s in self.samples])

    @property
    def p(self):
        return np.array([s.p for s in self.samples])

    @property
    def alpha(self):
        return np.array([s.alpha for s in self.samples])

    @property
    def gamma(self):
        return np.array([s.gamma for s in self.samples])

    @property
    def final(self):
        return self.samples[-1]

    def __len__(self):
        return len(self.samples)


def propagate(state0, model, t_final, dt=DEFAULT_DT, sample_stride=10):
    """Integrate from ``state0.t`` to ``t_final`` with fixed-step RK4.

    The last step is shortened so the final sample lands exactly on
    ``t_final``. Samples are taken every ``sample_stride`` steps, plus the
    initial and final states.
    """
    if state0.dim != model.dim:
        raise ValidationError(f"state has dimension {state0.dim}, model has {model.dim}", key="dim")
    t0 = state0.t
    if not t_final > t0:
        raise ValidationError("t_final must exceed the initial time", key="t_final")
    if not dt > 0:
        raise ValidationError("dt must be positive", key="dt")
    if int(sample_stride) != sample_stride or sample_stride < 1:
        raise ValidationError("sample_stride must be a positive integer", key="sample_stride")
    require_normalizable(state0.alpha)

    span = t_final - t0
    n_steps = max(1, math.ceil(span / dt - 1e-9))
    dim = model.dim
    y = _pack(state0)
    f = make_flat_rhs(model)
    samples = [state0]
    for i in range(1, n_steps + 1):
        if i < n_steps:
            h = dt
            t = t0 + i * dt
        else:
            h = t_final - (t0 + (n_steps - 1) * dt)
            t = t_final
        y = _rk4(y, f, h)
        if dim > 1:
            a = y[2 * dim : -1].reshape(dim, dim)
            y[2 * dim : -1] = (0.5 * (a + a.T)).ravel()
        if i % sample_stride == 0 or i == n_steps:
            state = _to_state(y, dim, t)
            try:
                require_normalizable(state.alpha)
            except NonNormalizable as exc:
                raise NonNormalizable(f"at t={t:.6g}: {exc}") from None
            samples.append(state)
    return Trajectory(samples, model, dt, int(sample_stride), n_steps)


def eom1_residual(state, deriv, model):
    """LHS minus RHS of the q/p consistency equation of the Gaussian ansatz.

    [2 alpha dq - dp] - [dV - b b'/m + 2 alpha M^-1 (p + i b) + i p b'/m]

    Vanishes identically when dq and dp come from the complexified
    classical equations.
    """
    m = model.masses
    _, grad, _ = potential_lha(model.potential, state.q)
    b, db = eval_b(model.vecpot, state.q)
    lhs = 2.0 * state.alpha @ deriv.dq - deriv.dp
    rhs_ = grad - b * db / m + 2.0 * state.alpha @ ((state.p + 1j * b) / m) + 1j * state.p * db / m
    return lhs - rhs_
