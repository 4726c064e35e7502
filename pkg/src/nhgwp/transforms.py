"""Representation changes of generalized Gaussians and real phase-space recovery.

Two parameter sets describe the same wavefunction exactly when

    p - 2 alpha q                      and
    gamma + q.alpha.q - p.q

agree (alpha itself is shared). Everything here is built on those two
invariants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonNormalizable, PreconditionViolation, SingularTransform
from .model import eval_b, require_normalizable

REALITY_TOL = 1e-10


@dataclass(frozen=True)
class RealPhasePoint:
    Q: np.ndarray
    P: np.ndarray


def _real(values, what, tol=REALITY_TOL):
    values = np.asarray(values)
    residue = np.max(np.abs(values.imag), initial=0.0)
    if residue > tol * max(1.0, np.max(np.abs(values.real), initial=0.0)):
        raise NonNormalizable(f"{what} has an imaginary residue {residue:.3e}")
    return values.real.copy()


def invariants(state):
    """The two representation invariants (vector, scalar)."""
    a, q, p = state.alpha, state.q, state.p
    return p - 2.0 * a @ q, state.gamma + q @ a @ q - p @ q


def to_real_phase_space(state):
    """Physical centre (Q, P) of a generalized Gaussian.

    Q is the centroid of |psi|^2. P is the real momentum parameter of the
    equivalent real-centred representation (the canonical momentum, not
    m dQ/dt).
    """
    require_normalizable(state.alpha)
    re_a, im_a = state.alpha.real, state.alpha.imag
    q, p = state.q, state.p
    Q = q.real + np.linalg.solve(im_a, re_a @ q.imag - 0.5 * p.imag)
    P = p.real + 2.0 * im_a @ q.imag + 2.0 * re_a @ (Q - q.real)
    return RealPhasePoint(Q, P)


def shift_representation(state, new_p):
    """Equivalent state whose momentum parameter is ``new_p``.

    q moves by alpha^-1 (new_p - p) / 2 and gamma is recomputed from the
    scalar invariant, so psi(x) is unchanged.
    """
    require_normalizable(state.alpha)
    new_p = np.atleast_1d(np.asarray(new_p, dtype=complex))
    a = state.alpha
    new_q = state.q + 0.5 * np.linalg.solve(a, new_p - state.p)
    _, scalar = invariants(state)
    new_gamma = scalar - new_q @ a @ new_q + new_p @ new_q
    return state.replace(q=new_q, p=new_p, gamma=new_gamma)


def _check_guiding_input(state0, diagonal=False):
    if np.any(state0.q.imag) or np.any(state0.p.imag):
        raise PreconditionViolation("initial q and p must be real", key="initial")
    if np.any(state0.alpha.real):
        raise PreconditionViolation("initial alpha must be purely imaginary", key="alpha0")
    if diagonal and np.any(state0.alpha - np.diag(np.diag(state0.alpha))):
        raise PreconditionViolation("initial alpha must be diagonal for a linear b", key="alpha0")


def guiding_ic_constant(state0, model):
    """Move the non-Hermitian shift into the momentum: p -> p - i k.

    The resulting q and initial velocity p/m are real, so the centre then
    follows the Hermitian classical trajectory.
    """
    if not model.vecpot.is_constant:
        raise PreconditionViolation("vector potential must be constant (slope = 0)", key="b.slope")
    _check_guiding_input(state0)
    k = model.vecpot.offset
    shifted = shift_representation(state0, state0.p - 1j * k)
    _real(shifted.q, "guided q(0)")
    _real((shifted.p + 1j * k) / model.masses, "guided velocity")
    return shifted


def guiding_ic_linear(state0, model):
    """Guiding initial conditions for b_j(x) = k_j x + c_j.

    q~(0) = (2 Im a + K)^-1 (2 Im a q(0) - c),
    i f   = -2 a (2 Im a + K)^-1 b(q(0)),  p~(0) = p(0) + i f.
    """
    _check_guiding_input(state0, diagonal=True)
    im_a = state0.alpha.imag
    K = np.diag(model.vecpot.slope)
    denom = 2.0 * im_a + K
    diag = np.diag(denom)
    if np.any(np.abs(diag) <= 1e-14 * np.maximum(1.0, np.abs(np.diag(2.0 * im_a)))):
        raise SingularTransform("2 Im alpha(0) + k is singular")
    q0 = state0.q.real
    b_q0 = model.vecpot(q0)
    if_ = -2.0 * state0.alpha @ (b_q0 / diag)
    shifted = shift_representation(state0, state0.p + if_)
    expected_q = (2.0 * np.diag(im_a) * q0 - model.vecpot.offset) / diag
    q_new = _real(shifted.q, "guided q(0)")
    if not np.allclose(q_new, expected_q, rtol=1e-12, atol=1e-12):
        raise SingularTransform("guided q(0) inconsistent with the shift")
    b_new, _ = eval_b(model.vecpot, shifted.q)
    _real((shifted.p + 1j * b_new) / model.masses, "guided velocity")
    return shifted


def guiding_ic(state0, model):
    """Dispatch on whether b is constant."""
    if model.vecpot.is_constant:
        return guiding_ic_constant(state0, model)
    return guiding_ic_linear(state0, model)


def compute_real_center_constant(guiding_q, guiding_v, alpha_t, model):
    """Real centre from the guiding trajectory for a constant b = k.

    Q = q~ + (Im a)^-1 k / 2,  P = m dq~/dt + Re a (Im a)^-1 k.
    """
    if not model.vecpot.is_constant:
        raise PreconditionViolation("vector potential must be constant (slope = 0)", key="b.slope")
    alpha_t = np.atleast_2d(np.asarray(alpha_t, dtype=complex))
    require_normalizable(alpha_t)
    k = model.vecpot.offset
    x = np.linalg.solve(alpha_t.imag, k)
    Q = np.asarray(guiding_q, dtype=float) + 0.5 * x
    P = model.masses * np.asarray(guiding_v, dtype=float) + alpha_t.real @ x
    return RealPhasePoint(Q, P)


def real_trajectory(traj):
    """(Q, P) arrays of shape (n_samples, D) for a Trajectory."""
    points = [to_real_phase_space(s) for s in traj.samples]
    return np.array([pt.Q for pt in points]), np.array([pt.P for pt in points])


def mechanical_momentum(times, Q, masses):
    """m dQ/dt by second-order finite differences on the sample grid."""
    return np.asarray(masses) * np.gradient(np.asarray(Q), np.asarray(times), axis=0, edge_order=2)
