"""Reference systems: rigid body with three rotors, and the free rigid body.

Rigid body with rotors, one stage: ``Q = SO(3) x T^3``, ``G = SO(3)``,
``Q/G = T^3`` with the flat connection. Reduced coordinates are the rotor
angles ``theta``, rotor momenta ``y`` and the body angular momentum ``nu``::

    h(y, nu) = 1/2 sum (nu_r - y_r)^2 / I_r + 1/2 sum y_r^2 / K_r

Two stages: ``G = SO(3) x T^3``, ``N = SO(3)``, ``H = T^3`` with the
second-stage Hamiltonian ``h2(tau, eta) = h(tau, eta)`` on the point orbit
``tau = rho``; ``rho = 0`` gives ``1/2 sum eta_r^2 / I_r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .bundle import ConnectionData
from .errors import InvalidInputError
from .full import SO3_ONLY, ChartState, FullState, chart_hamiltonian, momentum_map
from .lie import SO3, CoalgebraElement, LieStructure, abelian, ad_star, AlgebraElement
from .reduced_one import ReducedHamiltonian1, ReducedState1, ReducedTangent1
from .reduced_two import ReducedHamiltonian2, ReducedState2, StagesContext

ROTOR_GROUP = LieStructure.of(SO3, abelian(3))


def _positive3(name: str, v) -> tuple[float, float, float]:
    v = tuple(float(a) for a in v)
    if len(v) != 3 or not all(a > 0 for a in v):
        raise InvalidInputError(f"{name} needs three positive entries, got {v}")
    return v


@dataclass(frozen=True)
class RigidBodyRotors:
    """Rigid body carrying three rotors aligned with its principal axes.

    Args:
        I: body inertia (diagonal).
        K: rotor inertia (diagonal).
        orbit_radius: ``|nu|`` of the coadjoint orbit in use.
    """

    I: tuple = (1.0, 2.0, 3.0)
    K: tuple = (0.1, 0.1, 0.1)
    orbit_radius: float = 1.0

    model_id = "rigid-body-rotors"
    shape_dim = 3

    def __post_init__(self):
        object.__setattr__(self, "I", _positive3("I", self.I))
        object.__setattr__(self, "K", _positive3("K", self.K))
        if not self.orbit_radius > 0:
            raise InvalidInputError("orbit_radius must be positive")

    @property
    def _I(self) -> np.ndarray:
        return np.array(self.I)

    @property
    def _K(self) -> np.ndarray:
        return np.array(self.K)

    def energy(self, y, nu):
        """Vectorized ``h(y, nu)`` over leading axes."""
        y = np.asarray(y, dtype=float)
        nu = np.asarray(nu, dtype=float)
        return 0.5 * np.sum((nu - y) ** 2 / self._I, axis=-1) + 0.5 * np.sum(y**2 / self._K, axis=-1)

    def omega(self, y, nu) -> np.ndarray:
        """Body angular velocity ``(nu - y) / I``."""
        return (np.asarray(nu, dtype=float) - np.asarray(y, dtype=float)) / self._I

    def rotor_rates(self, y, nu) -> np.ndarray:
        return (np.asarray(y) - np.asarray(nu)) / self._I + np.asarray(y) / self._K

    def connection(self) -> ConnectionData:
        return ConnectionData.flat(SO3_ONLY, 3)

    def hamiltonian(self) -> ReducedHamiltonian1:
        zero = np.zeros(3)
        return ReducedHamiltonian1(
            h=lambda s: float(self.energy(s.alpha, s.nu.coords)),
            dh_dx=lambda s: zero,
            dh_dalpha=lambda s: self.rotor_rates(s.alpha, s.nu.coords),
            dh_dnu=lambda s: self.omega(s.alpha, s.nu.coords),
        )

    def state(self, theta, y, nu) -> ReducedState1:
        return ReducedState1(theta, y, CoalgebraElement(SO3_ONLY, nu))

    # Reduction by the full group SO(3) x T^3 (Q = G): the orbit is S^2 x {y}.
    def full_group_connection(self) -> ConnectionData:
        return ConnectionData.flat(ROTOR_GROUP, 0)

    def full_group_hamiltonian(self) -> ReducedHamiltonian1:
        empty = np.zeros(0)

        def dnu(s):
            y, nu = s.nu.coords[3:], s.nu.coords[:3]
            return np.concatenate([self.omega(y, nu), self.rotor_rates(y, nu)])

        return ReducedHamiltonian1(
            h=lambda s: float(self.energy(s.nu.coords[3:], s.nu.coords[:3])),
            dh_dx=lambda s: empty,
            dh_dalpha=lambda s: empty,
            dh_dnu=dnu,
        )

    def full_group_state(self, y, nu) -> ReducedState1:
        return ReducedState1(
            np.zeros(0), np.zeros(0), CoalgebraElement(ROTOR_GROUP, np.concatenate([nu, y]))
        )

    def energy_of(self, s) -> float:
        if isinstance(s, ReducedState1):
            if s.nu.structure == ROTOR_GROUP:
                return float(self.energy(s.nu.coords[3:], s.nu.coords[:3]))
            return float(self.energy(s.alpha, s.nu.coords))
        if isinstance(s, ReducedState2):
            return float(self.energy(s.tau.coords, s.eta.coords))
        if isinstance(s, FullState):
            return float(self.energy(s.p, s.pi.coords))
        if isinstance(s, ChartState):
            return float(self.energy(s.shape_momenta, s.body_momentum))
        raise InvalidInputError(f"unsupported state kind {type(s).__name__}")


def rbr_hamiltonian(m: RigidBodyRotors, y, nu) -> float:
    if isinstance(nu, CoalgebraElement):
        nu = nu.coords
    return float(m.energy(y, nu))


def rbr_one_stage_field(m: RigidBodyRotors, s: ReducedState1) -> ReducedTangent1:
    """Closed-form orbit-reduced equations of the rotor model.

    ``ydot = 0``, ``thetadot = (y - nu)/I + y/K``, ``nudot = nu x Omega`` with
    ``Omega = (nu - y)/I``.
    """
    y, nu = s.alpha, s.nu.coords
    nudot = np.cross(nu, m.omega(y, nu))
    return ReducedTangent1(m.rotor_rates(y, nu), np.zeros(3), CoalgebraElement(SO3_ONLY, nudot))


def rbr_two_stage_model(m: RigidBodyRotors, rho=None) -> tuple[StagesContext, ReducedHamiltonian2]:
    """Stages data for ``G = SO(3) x T^3``, ``N = SO(3)``, ``H = T^3``.

    ``rho`` is the rotor-momentum level (H-part of ``mu`` under the canonical
    extension); it defaults to zero. ``mu`` takes ``nu = orbit_radius * e1``.
    """
    rho = np.zeros(3) if rho is None else np.asarray(rho, dtype=float)
    mu = CoalgebraElement(ROTOR_GROUP, np.concatenate([[m.orbit_radius, 0.0, 0.0], rho]))
    ctx = StagesContext(ROTOR_GROUP, (0,), mu, stabilizer_is_full=True)
    empty = np.zeros(0)
    h2 = ReducedHamiltonian2(
        h2=lambda s: float(m.energy(s.tau.coords, s.eta.coords)),
        dh_dy=lambda s: empty,
        dh_dgamma=lambda s: empty,
        dh_dtau=lambda s: m.rotor_rates(s.tau.coords, s.eta.coords),
        dh_deta=lambda s: m.omega(s.tau.coords, s.eta.coords),
    )
    return ctx, h2


def rbr_two_stage_connections(ctx: StagesContext) -> tuple[ConnectionData, ConnectionData]:
    return ConnectionData.flat(ctx.N, 0), ConnectionData.flat(ctx.H, 0)


def rbr_two_stage_state(ctx: StagesContext, eta, rho=None, phase=None) -> ReducedState2:
    rho = np.zeros(ctx.H.dim) if rho is None else rho
    return ReducedState2(
        np.zeros(0),
        np.zeros(0),
        CoalgebraElement(ctx.H, rho),
        CoalgebraElement(ctx.N, eta),
        np.zeros(0) if phase is None else phase,
    )


@dataclass(frozen=True)
class FreeRigidBody:
    """Free rigid body, ``Q = G = SO(3)``; ``h(nu) = 1/2 sum nu_r^2 / I_r``."""

    I: tuple = (1.0, 2.0, 3.0)
    orbit_radius: float = 1.0

    model_id = "free-rigid-body"
    shape_dim = 0

    def __post_init__(self):
        object.__setattr__(self, "I", _positive3("I", self.I))
        if not self.orbit_radius > 0:
            raise InvalidInputError("orbit_radius must be positive")

    @property
    def _I(self) -> np.ndarray:
        return np.array(self.I)

    def energy(self, y, nu):
        nu = np.asarray(nu, dtype=float)
        return 0.5 * np.sum(nu**2 / self._I, axis=-1)

    def omega(self, y, nu) -> np.ndarray:
        return np.asarray(nu, dtype=float) / self._I

    def connection(self) -> ConnectionData:
        return ConnectionData.flat(SO3_ONLY, 0)

    def hamiltonian(self) -> ReducedHamiltonian1:
        empty = np.zeros(0)
        return ReducedHamiltonian1(
            h=lambda s: float(self.energy(None, s.nu.coords)),
            dh_dx=lambda s: empty,
            dh_dalpha=lambda s: empty,
            dh_dnu=lambda s: self.omega(None, s.nu.coords),
        )

    def state(self, nu) -> ReducedState1:
        return ReducedState1(np.zeros(0), np.zeros(0), CoalgebraElement(SO3_ONLY, nu))

    def euler_field(self, nu: CoalgebraElement) -> CoalgebraElement:
        """``nudot = nu x (nu / I)`` via the coadjoint action."""
        return ad_star(AlgebraElement(nu.structure, self.omega(None, nu.coords)), nu)

    def energy_of(self, s) -> float:
        if isinstance(s, ReducedState1):
            return float(self.energy(None, s.nu.coords))
        if isinstance(s, FullState):
            return float(self.energy(None, s.pi.coords))
        if isinstance(s, ChartState):
            return float(self.energy(None, s.body_momentum))
        raise InvalidInputError(f"unsupported state kind {type(s).__name__}")


Model = Union[RigidBodyRotors, FreeRigidBody]


def axisymmetric_closed_form(m: FreeRigidBody, nu0, t: float) -> CoalgebraElement:
    """Exact Euler flow for ``I1 == I2``: ``nu3`` fixed, ``(nu1, nu2)`` precessing.

    With ``wp = nu3 (I1 - I3) / (I1 I3)`` the equations read
    ``nu1' = wp nu2``, ``nu2' = -wp nu1``.
    """
    I1, I2, I3 = m.I
    if I1 != I2:
        raise InvalidInputError("closed form needs an axisymmetric body (I1 == I2)")
    if isinstance(nu0, CoalgebraElement):
        nu0 = nu0.coords
    n1, n2, n3 = (float(a) for a in nu0)
    wp = n3 * (I1 - I3) / (I1 * I3)
    c, s = np.cos(wp * t), np.sin(wp * t)
    return CoalgebraElement(SO3_ONLY, [c * n1 + s * n2, -s * n1 + c * n2, n3])


MODELS = {
    RigidBodyRotors.model_id: RigidBodyRotors,
    FreeRigidBody.model_id: FreeRigidBody,
}


def get_model(model_id: str, **params) -> Model:
    try:
        cls = MODELS[model_id]
    except KeyError:
        raise InvalidInputError(
            f"unknown model {model_id!r}; choose from {sorted(MODELS)}"
        ) from None
    return cls(**params)


def chart_energy(m: Model):
    """Canonical-chart Hamiltonian for a registered model."""
    return chart_hamiltonian(m.energy)


def casimirs(s) -> np.ndarray:
    """``|nu|`` on every so(3) factor carried by the state."""
    if isinstance(s, ReducedState1):
        nu = s.nu
    elif isinstance(s, ReducedState2):
        nu = s.eta
    elif isinstance(s, FullState):
        nu = s.pi
    elif isinstance(s, ChartState):
        return np.array([np.linalg.norm(s.body_momentum)])
    else:
        raise InvalidInputError(f"unsupported state kind {type(s).__name__}")
    return np.array([np.linalg.norm(nu.coords[sl]) for sl in nu.structure.so3_slices()])


def spatial_momentum(s):
    if isinstance(s, FullState):
        return momentum_map(s).coords
    if isinstance(s, ChartState):
        return s.rotation @ s.body_momentum
    return None
