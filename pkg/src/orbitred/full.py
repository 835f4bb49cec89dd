"""Unreduced dynamics on ``T*Q`` for ``Q = SO(3) x T^m``.

Two formulations serve as oracles for the reduced equations:

* left-trivialized: ``(R, theta, pi, p)`` with body momentum ``pi``;
* canonical chart: Z-X-Z Euler angles plus shape angles with their conjugate
  momenta, integrated from Hamilton's equations with finite-difference
  gradients. This path only calls the energy function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bundle import BundlePoint
from .errors import ChartSingularityError, InvalidInputError
from .lie import (
    SO3,
    Ad_star_inv,
    CoalgebraElement,
    GroupElement,
    LieStructure,
    ad_star,
    hat,
    orthonormalize,
)
from .reduced_one import ReducedHamiltonian1, ReducedState1, _vec, orbit_radii, rescale_to_radii

SO3_ONLY = LieStructure.of(SO3)
CHART_GUARD = 1e-6
CHART_FD_STEP = 1e-6


@dataclass(frozen=True)
class FullState:
    """Unreduced phase point: attitude and shape angles, body momentum, shape momenta."""

    q: BundlePoint
    pi: CoalgebraElement
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _vec(self.p))
        if self.q.shape.shape != self.p.shape:
            raise InvalidInputError("shape angles and momenta must have the same dimension")
        if self.pi.structure != SO3_ONLY:
            raise InvalidInputError("body momentum must be an element of so(3)*")

    @classmethod
    def make(cls, R, theta, pi, p) -> "FullState":
        q = BundlePoint(_vec(theta), GroupElement(SO3_ONLY, [np.asarray(R, dtype=float)]))
        return cls(q, CoalgebraElement(SO3_ONLY, pi), p)

    @property
    def R(self) -> np.ndarray:
        return self.q.group.rotation()

    @property
    def theta(self) -> np.ndarray:
        return self.q.shape

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.R.reshape(-1), self.theta, self.pi.coords, self.p])

    def with_vector(self, v: np.ndarray) -> "FullState":
        m = self.theta.shape[0]
        R = v[:9].reshape(3, 3)
        q = BundlePoint(v[9 : 9 + m], GroupElement(SO3_ONLY, [R], check=False))
        return FullState(q, CoalgebraElement(SO3_ONLY, v[9 + m : 12 + m]), v[12 + m :])

    def finalize(self) -> "FullState":
        q = BundlePoint(self.theta, GroupElement(SO3_ONLY, [orthonormalize(self.R)], check=False))
        return FullState(q, self.pi, self.p)

    def project_orbit(self, reference: "FullState") -> "FullState":
        return FullState(self.q, rescale_to_radii(self.pi, orbit_radii(reference.pi)), self.p)


@dataclass(frozen=True)
class FullTangent:
    Rdot: np.ndarray
    thetadot: np.ndarray
    pidot: CoalgebraElement
    pdot: np.ndarray

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.Rdot.reshape(-1), self.thetadot, self.pidot.coords, self.pdot])


def project_to_reduced(s: FullState) -> ReducedState1:
    """Forget the attitude: ``(x, alpha, nu) = (theta, p, pi)``."""
    return ReducedState1(s.theta.copy(), s.p.copy(), s.pi)


def full_field_trivialized(H: ReducedHamiltonian1, s: FullState) -> FullTangent:
    """Hamilton's equations in the left trivialization of ``T*SO(3)``.

    ``H`` is the G-invariant energy written on ``(theta, p, pi)``.
    """
    dx, dp, dpi = H.partials(project_to_reduced(s))
    return FullTangent(s.R @ hat(dpi.coords), dp, ad_star(dpi, s.pi), -dx)


def momentum_map(s: FullState, structure: Optional[LieStructure] = None) -> CoalgebraElement:
    """Momentum map of the left action.

    With the default structure ``so3`` this is the spatial angular momentum
    ``R pi``. For ``so3 x abelian(m)`` (rotation plus shape translations) the
    shape momenta are appended.
    """
    spatial = s.R @ s.pi.coords
    if structure is None or structure == SO3_ONLY:
        return CoalgebraElement(SO3_ONLY, spatial)
    if structure.dim != 3 + s.p.shape[0] or structure.factors[0] != SO3:
        raise InvalidInputError(f"momentum map not defined for {structure}")
    return CoalgebraElement(structure, np.concatenate([spatial, s.p]))


def act(g: GroupElement, s: FullState) -> FullState:
    """Left action of ``SO(3)`` or ``SO(3) x T^m`` on a full state."""
    R = g.rotation() @ s.R
    theta = s.theta
    if len(g.structure.factors) > 1:
        theta = theta + np.concatenate([p for p in g.parts[1:]])
    return FullState.make(R, theta, s.pi.coords, s.p)


def momentum_equivariance_residual(
    s: FullState, g: GroupElement, structure: Optional[LieStructure] = None
) -> float:
    lhs = momentum_map(act(g, s), structure)
    rhs = Ad_star_inv(g, momentum_map(s, structure))
    return float(np.max(np.abs(lhs.coords - rhs.coords)))


# ---------------------------------------------------------------------------
# Euler-angle chart
# ---------------------------------------------------------------------------


def rotation_zxz(phi: float, theta: float, psi: float) -> np.ndarray:
    def rz(a):
        c, s = np.cos(a), np.sin(a)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    c, s = np.cos(theta), np.sin(theta)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    return rz(phi) @ rx @ rz(psi)


def euler_zxz(R: np.ndarray) -> np.ndarray:
    """Angles ``(phi, theta, psi)`` with ``R = Rz(phi) Rx(theta) Rz(psi)``."""
    theta = float(np.arccos(np.clip(R[2, 2], -1.0, 1.0)))
    if abs(np.sin(theta)) < CHART_GUARD:
        raise ChartSingularityError("attitude is at the Euler-chart singularity")
    psi = float(np.arctan2(R[2, 0], R[2, 1]))
    phi = float(np.arctan2(R[0, 2], -R[1, 2]))
    return np.array([phi, theta, psi])


def body_rate_matrix(theta, psi) -> np.ndarray:
    """``M`` with ``Omega_body = M @ (phidot, thetadot, psidot)``; batched over inputs."""
    theta = np.asarray(theta, dtype=float)
    psi = np.asarray(psi, dtype=float)
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(psi), np.cos(psi)
    zero = np.zeros_like(theta)
    one = np.ones_like(theta)
    rows = [
        [st * sp, cp, zero],
        [st * cp, -sp, zero],
        [ct, zero, one],
    ]
    return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


@dataclass(frozen=True)
class ChartState:
    """Canonical coordinates: 3 Euler angles + shape angles, and conjugate momenta."""

    angles: np.ndarray
    momenta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "angles", _vec(self.angles))
        object.__setattr__(self, "momenta", _vec(self.momenta))
        if self.angles.shape != self.momenta.shape or self.angles.shape[0] < 3:
            raise InvalidInputError("chart state needs matching angles and momenta (>= 3)")

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.angles, self.momenta])

    def with_vector(self, v: np.ndarray) -> "ChartState":
        n = self.angles.shape[0]
        return ChartState(v[:n], v[n:])

    def finalize(self) -> "ChartState":
        return self

    def project_orbit(self, reference: "ChartState") -> "ChartState":
        raise InvalidInputError("orbit projection is not defined in the canonical chart")

    @property
    def rotation(self) -> np.ndarray:
        return rotation_zxz(*self.angles[:3])

    @property
    def body_momentum(self) -> np.ndarray:
        M = body_rate_matrix(self.angles[1], self.angles[2])
        return np.linalg.solve(M.T, self.momenta[:3])

    @property
    def shape_momenta(self) -> np.ndarray:
        return self.momenta[3:]


def chart_from_full(s: FullState) -> ChartState:
    eul = euler_zxz(s.R)
    M = body_rate_matrix(eul[1], eul[2])
    return ChartState(np.concatenate([eul, s.theta]), np.concatenate([M.T @ s.pi.coords, s.p]))


def full_from_chart(c: ChartState) -> FullState:
    return FullState.make(c.rotation, c.angles[3:], c.body_momentum, c.shape_momenta)


EnergyFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def chart_hamiltonian(energy: EnergyFn) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Build ``H(angles, momenta)`` from ``energy(shape_momenta, body_momentum)``.

    Vectorized over leading axes; the body momentum is recovered as
    ``M^-T p_euler``.
    """

    def H(angles: np.ndarray, momenta: np.ndarray) -> np.ndarray:
        M = body_rate_matrix(angles[..., 1], angles[..., 2])
        pi = np.linalg.solve(np.swapaxes(M, -1, -2), momenta[..., :3, None])[..., 0]
        return energy(momenta[..., 3:], pi)

    return H


def full_field_chart(H_chart: Callable, s: ChartState) -> ChartState:
    """Canonical equations ``qdot = dH/dp``, ``pdot = -dH/dq`` by central differences.

    Returns the tangent packed as a ``ChartState`` (angle rates, momentum rates).
    """
    if abs(np.sin(s.angles[1])) < CHART_GUARD:
        raise ChartSingularityError(
            f"|sin(theta)| = {abs(np.sin(s.angles[1])):.2e} is below {CHART_GUARD}"
        )
    z = s.to_vector()
    d = z.shape[0]
    n = s.angles.shape[0]
    steps = CHART_FD_STEP * np.maximum(1.0, np.abs(z))
    pert = np.repeat(z[None, :], 2 * d, axis=0)
    idx = np.arange(d)
    pert[idx, idx] += steps
    pert[d + idx, idx] -= steps
    values = H_chart(pert[:, :n], pert[:, n:])
    grad = (values[:d] - values[d:]) / (2.0 * steps)
    return ChartState(grad[n:], -grad[:n])
