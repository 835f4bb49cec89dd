"""Orbit reduction by two stages for a direct product ``G = N x H``.

Scope: the orbit stabilizer is all of ``G``, ``H`` is abelian and bundles are
trivial. Points of the second reduced space are ``(y, gamma, tau, eta)`` with
``tau`` on the (point) H-orbit of ``rho`` and ``eta`` on the N-orbit of ``nu``.
Both connections live over the base ``Y = (Q/N)/H``; the representative of
``x`` in ``Q/N = Y x H`` is ``(y, e)``.

The two-stage form is::

    w2 = <gd2, yd1> - <gd1, yd2> + <td2, A_H(yd1)> - <td1, A_H(yd2)>
         - <tau, B_H(yd1, yd2)> - <eta, B_N(yd1^h, yd2^h)>
         - <eta, [e1 + A_N(yd1), e2 + A_N(yd2)]>

The ``td`` terms vanish on an abelian H-orbit; the ``tau``-curvature term is
the magnetic contribution of the second stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bundle import BundlePoint, ConnectionData
from .errors import InvalidExtensionError, InvalidInputError, InvalidTangentError
from .lie import (
    Ad_star_inv,
    AlgebraElement,
    CoalgebraElement,
    GroupElement,
    LieStructure,
    ad_star,
    bracket,
    orbit_tangent,
    rodrigues,
    solve_coadjoint_tangent,
)
from .reduced_one import _central_gradient, _vec, orbit_radii, rescale_to_radii

EXTENSION_TOL = 1e-12


@dataclass(frozen=True)
class StagesContext:
    """Normal factor ``N``, quotient ``H`` and the momentum data of both stages.

    ``n_index`` lists the factors of ``G`` that make up ``N``; the remaining
    factors form ``H``. ``nu`` is the N-restriction of ``mu``.
    """

    G: LieStructure
    n_index: tuple[int, ...]
    mu: CoalgebraElement
    stabilizer_is_full: bool = True
    N: LieStructure = field(init=False)
    H: LieStructure = field(init=False)
    nu: CoalgebraElement = field(init=False)

    def __post_init__(self):
        idx = tuple(sorted(set(self.n_index)))
        if not idx or any(i < 0 or i >= len(self.G.factors) for i in idx):
            raise InvalidInputError(f"bad normal-factor indices {self.n_index}")
        if len(idx) == len(self.G.factors):
            raise InvalidInputError("N must be a proper factor of G")
        if self.mu.structure != self.G:
            raise InvalidInputError("mu must be an element of g*")
        object.__setattr__(self, "n_index", idx)
        h_index = tuple(i for i in range(len(self.G.factors)) if i not in idx)
        object.__setattr__(self, "N", LieStructure(tuple(self.G.factors[i] for i in idx)))
        object.__setattr__(self, "H", LieStructure(tuple(self.G.factors[i] for i in h_index)))
        sl = list(self.G.blocks())
        n_cols = np.concatenate([np.arange(sl[i][1].start, sl[i][1].stop) for i in idx])
        h_cols = np.concatenate([np.arange(sl[i][1].start, sl[i][1].stop) for i in h_index])
        object.__setattr__(self, "_n_cols", n_cols)
        object.__setattr__(self, "_h_cols", h_cols)
        object.__setattr__(self, "nu", self.restrict_n(self.mu))

    @property
    def h_is_abelian(self) -> bool:
        return all(f.kind == "abelian" for f in self.H.factors)

    def include_n(self, xi: AlgebraElement) -> AlgebraElement:
        if xi.structure != self.N:
            raise InvalidInputError("expected an element of n")
        c = np.zeros(self.G.dim)
        c[self._n_cols] = xi.coords
        return AlgebraElement(self.G, c)

    def project_n(self, xi: AlgebraElement) -> AlgebraElement:
        return AlgebraElement(self.N, xi.coords[self._n_cols])

    def restrict_n(self, m: CoalgebraElement) -> CoalgebraElement:
        if m.structure != self.G:
            raise InvalidInputError("expected an element of g*")
        return CoalgebraElement(self.N, m.coords[self._n_cols])

    def restrict_h(self, m: CoalgebraElement) -> CoalgebraElement:
        if m.structure != self.G:
            raise InvalidInputError("expected an element of g*")
        return CoalgebraElement(self.H, m.coords[self._h_cols])

    def combine(self, n_part: CoalgebraElement, h_part: CoalgebraElement) -> CoalgebraElement:
        c = np.zeros(self.G.dim)
        c[self._n_cols] = n_part.coords
        c[self._h_cols] = h_part.coords
        return CoalgebraElement(self.G, c)

    def canonical_extension(self) -> CoalgebraElement:
        """``nu~ = (nu, 0)`` in product coordinates."""
        return self.combine(self.nu, CoalgebraElement.zero(self.H))

    def orbit_preservation_residual(self, rng: np.random.Generator, samples: int = 16) -> float:
        """Worst change of the N-orbit radius of ``nu`` under random ``g in G``."""
        r0 = orbit_radii(self.nu)
        nut = self.canonical_extension()
        worst = 0.0
        for _ in range(samples):
            parts = []
            for f in self.G.factors:
                if f.kind == "so3":
                    parts.append(rodrigues(rng.normal(size=3)))
                else:
                    parts.append(rng.uniform(0, 2 * np.pi, f.dim))
            g = GroupElement(self.G, parts, check=False)
            moved = self.restrict_n(Ad_star_inv(g, nut))
            worst = max(worst, float(np.max(np.abs(orbit_radii(moved) - r0), initial=0.0)))
        return worst


def rho_shift(
    ctx: StagesContext, mu: CoalgebraElement, nutilde: CoalgebraElement
) -> CoalgebraElement:
    """Second-stage momentum ``rho = (mu - nu~)`` restricted to h.

    ``nutilde`` must extend ``ctx.nu``. Different extensions shift ``rho`` by
    their H-parts; ``rho + nutilde_H == mu_H`` for every extension.
    """
    if not ctx.stabilizer_is_full:
        raise InvalidInputError("rho shift is only available when the orbit stabilizer is G")
    n_part = ctx.restrict_n(nutilde).coords
    scale = max(1.0, float(np.linalg.norm(ctx.nu.coords)))
    if np.max(np.abs(n_part - ctx.nu.coords), initial=0.0) > EXTENSION_TOL * scale:
        raise InvalidExtensionError("nutilde does not restrict to nu on n")
    return ctx.restrict_h(mu - nutilde)


@dataclass(frozen=True)
class ReducedState2:
    """Point ``(y, gamma, tau, eta)`` of the second reduced space.

    ``phase`` optionally carries H-group coordinates reconstructed from
    ``dh2/dtau``; it never enters the reduced dynamics.
    """

    y: np.ndarray
    gamma: np.ndarray
    tau: CoalgebraElement
    eta: CoalgebraElement
    phase: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "y", _vec(self.y))
        object.__setattr__(self, "gamma", _vec(self.gamma))
        object.__setattr__(self, "phase", _vec(self.phase))
        if self.y.shape != self.gamma.shape:
            raise InvalidInputError("y and gamma must have the same dimension")
        if self.phase.shape[0] not in (0, self.tau.structure.dim):
            raise InvalidInputError("phase must be empty or match dim h")

    def _sizes(self):
        return (self.y.shape[0], self.y.shape[0], self.tau.structure.dim, self.eta.structure.dim)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.y, self.gamma, self.tau.coords, self.eta.coords, self.phase])

    def with_vector(self, v: np.ndarray) -> "ReducedState2":
        a, b, c, d = self._sizes()
        i = np.cumsum([a, b, c, d])
        return ReducedState2(
            v[: i[0]],
            v[i[0] : i[1]],
            CoalgebraElement(self.tau.structure, v[i[1] : i[2]]),
            CoalgebraElement(self.eta.structure, v[i[2] : i[3]]),
            v[i[3] :],
        )

    def reduced_vector(self) -> np.ndarray:
        return np.concatenate([self.y, self.gamma, self.tau.coords, self.eta.coords])

    def project_orbit(self, reference: "ReducedState2") -> "ReducedState2":
        return ReducedState2(
            self.y,
            self.gamma,
            reference.tau if _all_abelian(self.tau.structure) else self.tau,
            rescale_to_radii(self.eta, orbit_radii(reference.eta)),
            self.phase,
        )

    def finalize(self) -> "ReducedState2":
        return self


def _all_abelian(st: LieStructure) -> bool:
    return all(f.kind == "abelian" for f in st.factors)


@dataclass(frozen=True)
class ReducedTangent2:
    ydot: np.ndarray
    gammadot: np.ndarray
    taudot: CoalgebraElement
    etadot: CoalgebraElement
    phasedot: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "ydot", _vec(self.ydot))
        object.__setattr__(self, "gammadot", _vec(self.gammadot))
        object.__setattr__(self, "phasedot", _vec(self.phasedot))

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.ydot, self.gammadot, self.taudot.coords, self.etadot.coords, self.phasedot]
        )


@dataclass(frozen=True)
class ReducedHamiltonian2:
    """Second-stage reduced Hamiltonian; partials as in ``ReducedHamiltonian1``."""

    h2: Callable[[ReducedState2], float]
    dh_dy: Optional[Callable] = None
    dh_dgamma: Optional[Callable] = None
    dh_dtau: Optional[Callable] = None
    dh_deta: Optional[Callable] = None

    @property
    def analytic(self) -> bool:
        return None not in (self.dh_dy, self.dh_dgamma, self.dh_dtau, self.dh_deta)

    def __call__(self, s: ReducedState2) -> float:
        return float(self.h2(s))

    def fd_partials(self, s: ReducedState2):
        base = s.reduced_vector()
        grad = _central_gradient(
            lambda v: self.h2(s.with_vector(np.concatenate([v, s.phase]))), base
        )
        a, b, c, _ = s._sizes()
        i = np.cumsum([a, b, c])
        return grad[: i[0]], grad[i[0] : i[1]], grad[i[1] : i[2]], grad[i[2] :]

    def partials(self, s: ReducedState2):
        if self.analytic:
            parts = [_vec(f(s)) for f in (self.dh_dy, self.dh_dgamma, self.dh_dtau, self.dh_deta)]
        else:
            fd = self.fd_partials(s)
            fns = (self.dh_dy, self.dh_dgamma, self.dh_dtau, self.dh_deta)
            parts = [d if f is None else _vec(f(s)) for f, d in zip(fns, fd)]
        dy, dg, dt, de = parts
        return dy, dg, AlgebraElement(s.tau.structure, dt), AlgebraElement(s.eta.structure, de)


def _check_setting(ctx: StagesContext, connN: ConnectionData, connH: ConnectionData, s: ReducedState2):
    if not ctx.stabilizer_is_full:
        raise InvalidInputError("two-stage formulas need the orbit stabilizer to be all of G")
    if not ctx.h_is_abelian:
        raise InvalidInputError("only abelian quotient groups H are supported")
    if connN.structure != ctx.N or connH.structure != ctx.H:
        raise InvalidInputError("connections must be over N and H respectively")
    if s.eta.structure != ctx.N or s.tau.structure != ctx.H:
        raise InvalidInputError("state orbit elements do not match N and H")
    dim = s.y.shape[0]
    if connN.shape_dim != dim or connH.shape_dim != dim:
        raise InvalidInputError("connections must be over the second base space")
    return BundlePoint.at_identity(ctx.N, s.y), BundlePoint.at_identity(ctx.H, s.y)


def _check_tau_tangent(taudot: CoalgebraElement, scale: float) -> None:
    if float(np.linalg.norm(taudot.coords)) > 1e-10 * max(1.0, scale):
        raise InvalidTangentError("the H-orbit of rho is a point; taudot must vanish")


def omega_two(
    ctx: StagesContext,
    connN: ConnectionData,
    connH: ConnectionData,
    s: ReducedState2,
    t1: ReducedTangent2,
    t2: ReducedTangent2,
) -> float:
    """Symplectic form of the second reduced space."""
    qN, qH = _check_setting(ctx, connN, connH, s)
    scale = float(np.linalg.norm(s.tau.coords))
    _check_tau_tangent(t1.taudot, scale)
    _check_tau_tangent(t2.taudot, scale)
    e1 = solve_coadjoint_tangent(s.eta, t1.etadot)
    e2 = solve_coadjoint_tangent(s.eta, t2.etadot)

    value = float(t2.gammadot @ t1.ydot) - float(t1.gammadot @ t2.ydot)
    if not connH.trivial:
        value += t2.taudot.pair(connH.shape_part(qH, t1.ydot))
        value -= t1.taudot.pair(connH.shape_part(qH, t2.ydot))
        value -= s.tau.pair(connH.B(qH, t1.ydot, t2.ydot))
    if connN.trivial:
        value -= s.eta.pair(bracket(e1, e2))
    else:
        value -= s.eta.pair(connN.B(qN, t1.ydot, t2.ydot))
        xi1 = e1 + connN.shape_part(qN, t1.ydot)
        xi2 = e2 + connN.shape_part(qN, t2.ydot)
        value -= s.eta.pair(bracket(xi1, xi2))
    return value


def quotient_velocity(
    ctx: StagesContext, connH: ConnectionData, h2: ReducedHamiltonian2, s: ReducedState2
) -> np.ndarray:
    """H-group velocity ``w`` from ``dh2/dtau = A_H(x)(xdot)``."""
    dy, dg, dt, _ = h2.partials(s)
    qH = BundlePoint.at_identity(ctx.H, s.y)
    return dt.coords - connH.shape_part(qH, dg).coords


def two_stage_vector_field(
    ctx: StagesContext,
    connN: ConnectionData,
    connH: ConnectionData,
    h2: ReducedHamiltonian2,
    s: ReducedState2,
) -> ReducedTangent2:
    """Hamiltonian vector field of ``h2`` for ``omega_two``.

    When the state carries a ``phase`` its rate is the reconstructed
    H-velocity.
    """
    qN, qH = _check_setting(ctx, connN, connH, s)
    dy, dg, dt, de = h2.partials(s)
    ydot = dg
    gammadot = -dy
    eps = -de
    if not connH.trivial:
        gammadot = gammadot - connH.B_covector(qH, s.tau.coords, ydot)
    if not connN.trivial:
        gammadot = (
            gammadot
            - connN.B_covector(qN, s.eta.coords, ydot)
            + connN.local(s.y).T @ ad_star(de, s.eta).coords
        )
        eps = eps - connN.shape_part(qN, ydot)
    etadot = orbit_tangent(s.eta, eps)
    phasedot = np.zeros(0)
    if s.phase.shape[0]:
        phasedot = dt.coords - connH.shape_part(qH, ydot).coords
    return ReducedTangent2(ydot, gammadot, CoalgebraElement.zero(ctx.H), etadot, phasedot)


def check_connection_compatibility(
    ctx: StagesContext,
    connG: ConnectionData,
    connN: ConnectionData,
    connH: ConnectionData,
    rng: np.random.Generator,
    samples: int = 16,
) -> float:
    """Worst residual of ``A_G(v) = 0  <=>  A_N(v) = 0 and A_H(T pi_N v) = 0``.

    Checked on horizontal lifts built both ways at random base points.
    """
    dim = connG.shape_dim
    worst = 0.0
    for _ in range(samples):
        y = rng.normal(size=dim)
        ydot = rng.normal(size=dim)
        qG = BundlePoint.at_identity(ctx.G, y)
        qN = BundlePoint.at_identity(ctx.N, y)
        qH = BundlePoint.at_identity(ctx.H, y)
        # G-horizontal vector, tested against N and H.
        wG = -connG.shape_part(qG, ydot).coords
        wN = wG[ctx._n_cols]
        wH = wG[ctx._h_cols]
        aN = wN + connN.shape_part(qN, ydot).coords
        aH = wH + connH.shape_part(qH, ydot).coords
        # N- and H-horizontal vector, tested against G.
        w = np.zeros(ctx.G.dim)
        w[ctx._n_cols] = -connN.shape_part(qN, ydot).coords
        w[ctx._h_cols] = -connH.shape_part(qH, ydot).coords
        aG = w + connG.shape_part(qG, ydot).coords
        worst = max(worst, float(np.max(np.abs(np.concatenate([aN, aH, aG])), initial=0.0)))
    return worst
