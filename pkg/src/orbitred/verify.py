"""Property and oracle suites behind ``orbitred verify``.

Every check returns its worst residual; a check passes when the residual is
below its tolerance (or above it, for lower-bound checks such as Gram
determinants). All randomness flows from one seeded generator.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .bundle import BundlePoint, ConnectionData, curvature_fd
from .errors import InvalidExtensionError
from .full import FullState, chart_from_full, full_field_chart, full_field_trivialized, project_to_reduced
from .full import momentum_equivariance_residual
from .integrate import diagnose, integrate, sup_deviation
from .lie import (
    SO3,
    Ad,
    Ad_star_inv,
    AlgebraElement,
    CoalgebraElement,
    GroupElement,
    LieStructure,
    abelian,
    ad_star,
    bracket,
    kks_form,
    orbit_tangent,
    rodrigues,
    solve_coadjoint_tangent,
)
from .models import (
    ROTOR_GROUP,
    FreeRigidBody,
    RigidBodyRotors,
    axisymmetric_closed_form,
    chart_energy,
    rbr_one_stage_field,
    rbr_two_stage_connections,
    rbr_two_stage_model,
    rbr_two_stage_state,
)
from .reduced_one import (
    ReducedHamiltonian1,
    ReducedState1,
    ReducedTangent1,
    differential_fd,
    gram_matrix,
    hamilton_poincare_field,
    omega_red,
    orbit_tangent_basis,
    reduced_vector_field,
    tangent_basis,
)
from .reduced_two import (
    ReducedState2,
    ReducedTangent2,
    StagesContext,
    check_connection_compatibility,
    omega_two,
    rho_shift,
    two_stage_vector_field,
)

DEFAULT_SEED = 20240917
SUITES = ("pairing", "symplectic", "stages", "oracle", "all")

# Generic rotor data used by the trajectory checks.
ROTOR_I = (1.0, 2.0, 3.0)
ROTOR_K = (0.1, 0.1, 0.1)
ROTOR_THETA0 = np.array([0.3, -0.2, 0.5])
ROTOR_Y0 = np.array([0.1, -0.05, 0.08])
ROTOR_NU0 = np.array([0.6, 0.78, 0.1])

SO3_ONLY = LieStructure.of(SO3)


def resolve_seed(seed: Optional[int] = None) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get("ORBITRED_SEED")
    return int(env) if env not in (None, "") else DEFAULT_SEED


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    residual: float
    tol: float
    lower_bound: bool = False

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.residual):
            return False
        return self.residual > self.tol if self.lower_bound else self.residual < self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        rel = ">" if self.lower_bound else "<"
        return f"{status} {self.suite}/{self.name}: worst={self.residual:.3e} (need {rel} {self.tol:.1e})"


@dataclass(frozen=True)
class Check:
    name: str
    tol: float
    fn: Callable[[np.random.Generator], float]
    lower_bound: bool = False


# ---------------------------------------------------------------------------
# Random data
# ---------------------------------------------------------------------------


def random_algebra(st: LieStructure, rng: np.random.Generator) -> AlgebraElement:
    return AlgebraElement(st, rng.normal(size=st.dim) / np.sqrt(st.dim))


def random_coalgebra(st: LieStructure, rng: np.random.Generator) -> CoalgebraElement:
    return CoalgebraElement(st, rng.normal(size=st.dim) / np.sqrt(st.dim))


def random_group(st: LieStructure, rng: np.random.Generator) -> GroupElement:
    parts = []
    for f in st.factors:
        parts.append(rodrigues(rng.normal(size=3)) if f.kind == "so3" else rng.uniform(0, 2 * np.pi, f.dim))
    return GroupElement(st, parts)


def random_sphere(rng: np.random.Generator, radius: Optional[float] = None) -> np.ndarray:
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    return u * (rng.uniform(0.5, 1.5) if radius is None else radius)


def random_rotor_state(rng: np.random.Generator) -> ReducedState1:
    return ReducedState1(
        rng.uniform(0, 2 * np.pi, 3),
        rng.normal(scale=0.3, size=3),
        CoalgebraElement(SO3_ONLY, random_sphere(rng)),
    )


def random_tangent1(s: ReducedState1, rng: np.random.Generator) -> ReducedTangent1:
    n = s.x.shape[0]
    nudot = sum((b * rng.normal() for b in orbit_tangent_basis(s.nu)), CoalgebraElement.zero(s.nu.structure))
    return ReducedTangent1(rng.normal(size=n), rng.normal(size=n), nudot)


def _combine1(a: float, t1: ReducedTangent1, b: float, t2: ReducedTangent1) -> ReducedTangent1:
    return ReducedTangent1(a * t1.xdot + b * t2.xdot, a * t1.alphadot + b * t2.alphadot, t1.nudot * a + t2.nudot * b)


# ---------------------------------------------------------------------------
# A curved synthetic connection (so3 over a 2-dimensional shape space)
# ---------------------------------------------------------------------------


def curved_local_form(x: np.ndarray) -> np.ndarray:
    a = np.zeros((3, 2))
    a[:, 0] = [x[1], 0.0, np.sin(x[0])]
    a[:, 1] = [0.0, x[0], 0.5]
    return a


def curved_curvature(x: np.ndarray) -> np.ndarray:
    """``b = da - [a e1, a e2]`` for ``curved_local_form``."""
    a = curved_local_form(x)
    b01 = np.array([0.0, 1.0, 0.0]) - np.array([1.0, 0.0, 0.0]) - np.cross(a[:, 0], a[:, 1])
    b = np.zeros((3, 2, 2))
    b[:, 0, 1] = b01
    b[:, 1, 0] = -b01
    return b


def curved_connection() -> ConnectionData:
    return ConnectionData(SO3_ONLY, 2, curved_local_form, curved_curvature)


def curved_hamiltonian() -> ReducedHamiltonian1:
    """Generic test Hamiltonian; partials come from finite differences."""
    I = np.array([1.0, 2.0, 3.0])

    def h(s: ReducedState1) -> float:
        x, a, nu = s.x, s.alpha, s.nu.coords
        return float(
            0.5 * a @ a + 0.5 * np.sum(nu**2 / I) + 0.3 * np.cos(x[0]) * nu[0] + 0.2 * x[1] * a[0] + 0.1 * x[0] ** 2
        )

    return ReducedHamiltonian1(h)


def random_curved_state(rng: np.random.Generator) -> ReducedState1:
    return ReducedState1(rng.normal(size=2), rng.normal(size=2), CoalgebraElement(SO3_ONLY, random_sphere(rng)))


# ---------------------------------------------------------------------------
# pairing
# ---------------------------------------------------------------------------

N_ALG = 1000


def _pairing_identity(rng):
    worst = 0.0
    for _ in range(N_ALG):
        xi, eta = random_algebra(ROTOR_GROUP, rng), random_algebra(ROTOR_GROUP, rng)
        nu = random_coalgebra(ROTOR_GROUP, rng)
        worst = max(worst, abs(ad_star(xi, nu).pair(eta) - nu.pair(bracket(xi, eta))))
    return worst


def _antisymmetry(rng):
    worst = 0.0
    for _ in range(N_ALG):
        a, b = random_algebra(ROTOR_GROUP, rng), random_algebra(ROTOR_GROUP, rng)
        worst = max(worst, float(np.max(np.abs((bracket(a, b) + bracket(b, a)).coords))))
    return worst


def _jacobi(rng):
    worst = 0.0
    for _ in range(N_ALG):
        a, b, c = (random_algebra(ROTOR_GROUP, rng) for _ in range(3))
        j = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
        worst = max(worst, float(np.max(np.abs(j.coords))))
    return worst


def _kks_antisymmetry(rng):
    worst = 0.0
    for _ in range(N_ALG):
        nu = CoalgebraElement(SO3_ONLY, random_sphere(rng))
        v1 = orbit_tangent(nu, random_algebra(SO3_ONLY, rng))
        v2 = orbit_tangent(nu, random_algebra(SO3_ONLY, rng))
        worst = max(worst, abs(kks_form(nu, v1, v2) + kks_form(nu, v2, v1)))
    return worst


def _kks_definition(rng):
    worst = 0.0
    for _ in range(N_ALG):
        nu = CoalgebraElement(SO3_ONLY, random_sphere(rng))
        xi, eta = random_algebra(SO3_ONLY, rng), random_algebra(SO3_ONLY, rng)
        lhs = kks_form(nu, -ad_star(xi, nu), -ad_star(eta, nu))
        worst = max(worst, abs(lhs - nu.pair(bracket(xi, eta))))
    return worst


def _tangent_roundtrip(rng):
    worst = 0.0
    for _ in range(N_ALG):
        nu = CoalgebraElement(SO3_ONLY, random_sphere(rng))
        v = orbit_tangent(nu, random_algebra(SO3_ONLY, rng))
        back = orbit_tangent(nu, solve_coadjoint_tangent(nu, v))
        worst = max(worst, float(np.max(np.abs((back - v).coords))))
    return worst


def _coadjoint_invariance(rng):
    worst = 0.0
    for _ in range(N_ALG):
        g = random_group(ROTOR_GROUP, rng)
        xi, nu = random_algebra(ROTOR_GROUP, rng), random_coalgebra(ROTOR_GROUP, rng)
        worst = max(worst, abs(Ad_star_inv(g, nu).pair(Ad(g, xi)) - nu.pair(xi)))
    return worst


PAIRING = [
    Check("pairing-identity", 1e-12, _pairing_identity),
    Check("bracket-antisymmetry", 1e-12, _antisymmetry),
    Check("jacobi", 1e-12, _jacobi),
    Check("kks-antisymmetry", 1e-12, _kks_antisymmetry),
    Check("kks-on-generators", 1e-12, _kks_definition),
    Check("coadjoint-tangent-roundtrip", 1e-12, _tangent_roundtrip),
    Check("coadjoint-pairing-invariance", 1e-12, _coadjoint_invariance),
]


# ---------------------------------------------------------------------------
# symplectic
# ---------------------------------------------------------------------------

N_FORM = 200
N_GRAM = 100
N_HAM = 1000


def form_residuals(conn: ConnectionData, states: Iterable[ReducedState1], rng) -> tuple[float, float]:
    """Worst bilinearity and antisymmetry residuals of ``omega_red``."""
    bil = anti = 0.0
    for s in states:
        t1, t1b, t2 = (random_tangent1(s, rng) for _ in range(3))
        a, b = rng.normal(size=2)
        lhs = omega_red(conn, s, _combine1(a, t1, b, t1b), t2)
        rhs = a * omega_red(conn, s, t1, t2) + b * omega_red(conn, s, t1b, t2)
        bil = max(bil, abs(lhs - rhs))
        anti = max(anti, abs(omega_red(conn, s, t1, t2) + omega_red(conn, s, t2, t1)))
    return bil, anti


def _omega_red_bilinear(rng):
    m = RigidBodyRotors(ROTOR_I, ROTOR_K)
    flat = form_residuals(m.connection(), (random_rotor_state(rng) for _ in range(N_FORM)), rng)
    curved = form_residuals(curved_connection(), (random_curved_state(rng) for _ in range(N_FORM)), rng)
    return max(flat[0], curved[0])


def _omega_red_antisymmetric(rng):
    m = RigidBodyRotors(ROTOR_I, ROTOR_K)
    flat = form_residuals(m.connection(), (random_rotor_state(rng) for _ in range(N_FORM)), rng)
    curved = form_residuals(curved_connection(), (random_curved_state(rng) for _ in range(N_FORM)), rng)
    return max(flat[1], curved[1])


def two_stage_tangent(ctx: StagesContext, s: ReducedState2, rng) -> ReducedTangent2:
    n = s.y.shape[0]
    etadot = sum((b * rng.normal() for b in orbit_tangent_basis(s.eta)), CoalgebraElement.zero(ctx.N))
    return ReducedTangent2(rng.normal(size=n), rng.normal(size=n), CoalgebraElement.zero(ctx.H), etadot)


def _omega_two_contracts(rng):
    m = RigidBodyRotors(ROTOR_I, ROTOR_K)
    worst = 0.0
    for _ in range(N_FORM):
        rho = rng.normal(scale=0.3, size=3)
        ctx, _ = rbr_two_stage_model(m, rho=rho)
        connN, connH = rbr_two_stage_connections(ctx)
        s = rbr_two_stage_state(ctx, random_sphere(rng), rho=rho)
        t1, t1b, t2 = (two_stage_tangent(ctx, s, rng) for _ in range(3))
        a, b = rng.normal(size=2)
        comb = ReducedTangent2(
            a * t1.ydot + b * t1b.ydot,
            a * t1.gammadot + b * t1b.gammadot,
            CoalgebraElement.zero(ctx.H),
            t1.etadot * a + t1b.etadot * b,
        )
        w = lambda u, v: omega_two(ctx, connN, connH, s, u, v)  # noqa: E731
        worst = max(worst, abs(w(comb, t2) - a * w(t1, t2) - b * w(t1b, t2)), abs(w(t1, t2) + w(t2, t1)))
    return worst


def _gram_determinant(rng):
    m = RigidBodyRotors(ROTOR_I, ROTOR_K)
    conn = m.connection()
    worst = np.inf
    for _ in range(N_GRAM):
        s = random_rotor_state(rng)
        worst = min(worst, abs(float(np.linalg.det(gram_matrix(conn, s, tangent_basis(s))))))
    return worst


def hamiltonian_residual(conn: ConnectionData, h: ReducedHamiltonian1, s: ReducedState1) -> float:
    """``max_t |omega_red(X_h, t) - dh(t)|`` over a basis of the tangent space."""
    X = reduced_vector_field(conn, h, s)
    return max(abs(omega_red(conn, s, X, t) - differential_fd(h, s, t)) for t in tangent_basis(s))


def two_stage_hamiltonian_residual(ctx, connN, connH, h2, s: ReducedState2) -> float:
    X = two_stage_vector_field(ctx, connN, connH, h2, s)
    n = s.y.shape[0]
    basis = []
    for i in range(2 * n):
        e = np.zeros(2 * n)
        e[i] = 1.0
        basis.append(ReducedTangent2(e[:n], e[n:], CoalgebraElement.zero(ctx.H), CoalgebraElement.zero(ctx.N)))
    for b in orbit_tangent_basis(s.eta):
        basis.append(ReducedTangent2(np.zeros(n), np.zeros(n), CoalgebraElement.zero(ctx.H), b))
    worst = 0.0
    v = s.to_vector()
    for t in basis:
        d = t.to_vector()
        step = 1e-6
        dh = (h2(s.with_vector(v + step * d)) - h2(s.with_vector(v - step * d))) / (2 * step)
        worst = max(worst, abs(omega_two(ctx, connN, connH, s, X, t) - dh))
    return worst


def _hamiltonian_one_stage(rng):
    m = RigidBodyRotors(ROTOR_I, ROTOR_K)
    conn, h = m.connection(), m.hamiltonian()
    return max(hamiltonian_residual(conn, h, random_rotor_state(rng)) for _ in range(N_HAM))


def _hamiltonian_two_stage(rng):
    m = RigidBodyRotors(ROTOR_I, ROTOR_K)
    worst = 0.0
    for _ in range(N_HAM):
        rho = rng.normal(scale=0.3, size=3)
        ctx, h2 = rbr_two_stage_model(m, rho=rho)
        connN, connH = rbr_two_stage_connections(ctx)
        s = rbr_two_stage_state(ctx, random_sphere(rng), rho=rho)
        worst = max(worst, two_stage_hamiltonian_residual(ctx, connN, connH, h2, s))
    return worst


def _hamiltonian_curved(rng):
    conn, h = curved_connection(), curved_hamiltonian()
    return max(hamiltonian_residual(conn, h, random_curved_state(rng)) for _ in range(N_FORM))


def _curvature_formula(rng):
    conn = curved_connection()
    worst = 0.0
    for _ in range(N_FORM):
        q = BundlePoint(rng.normal(size=2), random_group(SO3_ONLY, rng))
        u, v = (w / np.linalg.norm(w) for w in rng.normal(size=(2, 2)))
        B = conn.B(q, u, v).coords
        err = np.max(np.abs(B - curvature_fd(conn, q, u, v).coords))
        worst = max(worst, float(err / max(1.0, np.linalg.norm(B))))
    return worst


SYMPLECTIC = [
    Check("omega-red-bilinear", 1e-12, _omega_red_bilinear),
    Check("omega-red-antisymmetric", 1e-12, _omega_red_antisymmetric),
    Check("omega-two-bilinear-antisymmetric", 1e-12, _omega_two_contracts),
    Check("omega-red-gram-determinant", 1e-6, _gram_determinant, lower_bound=True),
    Check("hamiltonian-field-one-stage", 1e-8, _hamiltonian_one_stage),
    Check("hamiltonian-field-two-stage", 1e-8, _hamiltonian_two_stage),
    Check("hamiltonian-field-curved", 1e-8, _hamiltonian_curved),
    Check("curvature-vs-finite-differences", 1e-8, _curvature_formula),
]


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------


def rotor_context(rng) -> StagesContext:
    mu = CoalgebraElement(ROTOR_GROUP, np.concatenate([random_sphere(rng), rng.normal(size=3)]))
    return StagesContext(ROTOR_GROUP, (0,), mu)


def _rho_shift_invariance(rng):
    worst = 0.0
    for _ in range(200):
        ctx = rotor_context(rng)
        ext = ctx.combine(ctx.nu, CoalgebraElement(ctx.H, rng.normal(size=3)))
        rho = rho_shift(ctx, ctx.mu, ext)
        worst = max(worst, float(np.max(np.abs(rho.coords + ctx.restrict_h(ext).coords - ctx.restrict_h(ctx.mu).coords))))
        canonical = rho_shift(ctx, ctx.mu, ctx.canonical_extension())
        worst = max(worst, float(np.max(np.abs(canonical.coords - ctx.restrict_h(ctx.mu).coords))))
    return worst


def _bad_extension_rejected(rng):
    failures = 0
    for _ in range(50):
        ctx = rotor_context(rng)
        bad = ctx.combine(ctx.nu + CoalgebraElement(ctx.N, 1e-3 * rng.normal(size=3)), CoalgebraElement.zero(ctx.H))
        try:
            rho_shift(ctx, ctx.mu, bad)
            failures += 1
        except InvalidExtensionError:
            pass
    return float(failures)


def _orbit_preservation(rng):
    return max(rotor_context(rng).orbit_preservation_residual(rng, 16) for _ in range(20))


def _connection_compatibility(rng):
    ctx = rotor_context(rng)
    y = 2
    aN = lambda x: curved_local_form(x)  # noqa: E731
    aH = lambda x: np.array([[np.cos(x[0]), 0.0], [0.0, x[0]], [x[1], 1.0]])  # noqa: E731
    bN = curved_curvature
    bH = lambda x: np.zeros((3, 2, 2))  # only compatibility is checked here  # noqa: E731
    connN = ConnectionData(ctx.N, y, aN, bN)
    connH = ConnectionData(ctx.H, y, aH, bH)
    connG = ConnectionData(ctx.G, y, lambda x: np.vstack([aN(x), aH(x)]), lambda x: np.concatenate([bN(x), bH(x)]))
    return check_connection_compatibility(ctx, connG, connN, connH, rng, 64)


def stage_trajectories(t_final: float = 10.0, dt: float = 1e-3):
    """One-stage (Q = G = SO(3) x T^3) and two-stage rotor trajectories."""
    m = RigidBodyRotors(ROTOR_I, ROTOR_K, orbit_radius=float(np.linalg.norm(ROTOR_NU0)))
    steps = int(round(t_final / dt))
    conn, h = m.full_group_connection(), m.full_group_hamiltonian()
    one = integrate(lambda s: reduced_vector_field(conn, h, s), m.full_group_state(ROTOR_Y0, ROTOR_NU0), dt, steps)
    ctx, h2 = rbr_two_stage_model(m, rho=ROTOR_Y0)
    connN, connH = rbr_two_stage_connections(ctx)
    two = integrate(
        lambda s: two_stage_vector_field(ctx, connN, connH, h2, s),
        rbr_two_stage_state(ctx, ROTOR_NU0, rho=ROTOR_Y0),
        dt,
        steps,
    )
    return one, two


def stage_deviation(t_final: float = 10.0, dt: float = 1e-3) -> float:
    one, two = stage_trajectories(t_final, dt)
    a = np.array([s.nu.coords for s in one.states])
    b = np.array([np.concatenate([s.eta.coords, s.tau.coords]) for s in two.states])
    return sup_deviation(a, b)


STAGES = [
    Check("rho-shift-invariance", 1e-12, _rho_shift_invariance),
    Check("bad-extension-rejected", 0.5, _bad_extension_rejected),
    Check("orbit-preservation", 1e-12, _orbit_preservation),
    Check("connection-compatibility", 1e-12, _connection_compatibility),
    Check("stage-equivalence", 1e-6, lambda rng: stage_deviation()),
]


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


def _euler_oracle(rng):
    worst = 0.0
    for _ in range(N_ALG):
        m = FreeRigidBody(tuple(rng.uniform(0.5, 3.0, 3)))
        s = m.state(random_sphere(rng))
        X = reduced_vector_field(m.connection(), m.hamiltonian(), s)
        expected = np.cross(s.nu.coords, m.omega(None, s.nu.coords))
        worst = max(worst, float(np.max(np.abs(X.nudot.coords - expected))))
    return worst


def _rotor_closed_form(rng):
    m = RigidBodyRotors(ROTOR_I, ROTOR_K)
    conn, h = m.connection(), m.hamiltonian()
    worst = 0.0
    for _ in range(N_ALG):
        s = random_rotor_state(rng)
        a = reduced_vector_field(conn, h, s).to_vector()
        worst = max(worst, float(np.max(np.abs(a - rbr_one_stage_field(m, s).to_vector()))))
        worst = max(worst, float(np.max(np.abs(a - hamilton_poincare_field(conn, h, s).to_vector()))))
    return worst


def _momentum_equivariance(rng):
    worst = 0.0
    for _ in range(200):
        s = FullState.make(rodrigues(rng.normal(size=3)), rng.normal(size=3), random_sphere(rng), rng.normal(size=3))
        worst = max(worst, momentum_equivariance_residual(s, random_group(SO3_ONLY, rng)))
        worst = max(worst, momentum_equivariance_residual(s, random_group(ROTOR_GROUP, rng), ROTOR_GROUP))
    return worst


def rotor_full_state(attitude: Optional[np.ndarray] = None) -> FullState:
    """Generic full rotor state; default attitude aligns ``R nu0`` with ``e_z``."""
    if attitude is None:
        u = ROTOR_NU0 / np.linalg.norm(ROTOR_NU0)
        axis = np.cross(u, [0.0, 0.0, 1.0])
        attitude = axis / np.linalg.norm(axis) * np.arctan2(np.linalg.norm(axis), u[2])
    return FullState.make(rodrigues(attitude), ROTOR_THETA0, ROTOR_NU0, ROTOR_Y0)


def reduced_rotor_trajectory(t_final: float, dt: float = 1e-3, project: bool = False):
    m = RigidBodyRotors(ROTOR_I, ROTOR_K, orbit_radius=float(np.linalg.norm(ROTOR_NU0)))
    conn, h = m.connection(), m.hamiltonian()
    s0 = m.state(ROTOR_THETA0, ROTOR_Y0, ROTOR_NU0)
    return m, integrate(lambda s: reduced_vector_field(conn, h, s), s0, dt, int(round(t_final / dt)), project=project)


def commutation_deviation(t_final: float = 5.0, dt: float = 1e-3) -> float:
    m, red = reduced_rotor_trajectory(t_final, dt)
    H = m.hamiltonian()
    full = integrate(lambda s: full_field_trivialized(H, s), rotor_full_state(np.array([0.4, -0.3, 0.2])), dt, len(red) - 1)
    a = np.array([project_to_reduced(s).to_vector() for s in full.states])
    return sup_deviation(a, red.vectors())


def chart_deviation(t_final: float = 5.0, dt: float = 1e-3) -> float:
    m, red = reduced_rotor_trajectory(t_final, dt)
    Hc = chart_energy(m)
    chart = integrate(lambda c: full_field_chart(Hc, c), chart_from_full(rotor_full_state()), dt, len(red) - 1)
    a = np.array([np.concatenate([c.shape_momenta, c.body_momentum]) for c in chart.states])
    b = np.array([np.concatenate([s.alpha, s.nu.coords]) for s in red.states])
    return sup_deviation(a, b)


CLOSED_FORM_NU0 = np.array([1.0, 0.0, 1.0])


def closed_form_error(dt: float, t_final: float = 1.0) -> float:
    m = FreeRigidBody((2.0, 2.0, 1.0), orbit_radius=float(np.linalg.norm(CLOSED_FORM_NU0)))
    conn, h = m.connection(), m.hamiltonian()
    traj = integrate(lambda s: reduced_vector_field(conn, h, s), m.state(CLOSED_FORM_NU0), dt, int(round(t_final / dt)))
    exact = axisymmetric_closed_form(m, CLOSED_FORM_NU0, t_final)
    return float(np.max(np.abs(traj.states[-1].nu.coords - exact.coords)))


def rk4_order_ratio(dt: float = 0.1) -> float:
    """Error ratio when halving ``dt``; coarse steps keep errors above roundoff."""
    return closed_form_error(dt) / closed_form_error(dt / 2)


def conservation(project: bool, steps: int = 10_000, dt: float = 1e-3) -> dict:
    m, traj = reduced_rotor_trajectory(steps * dt, dt, project=project)
    d = diagnose(traj, m)
    y = np.array([s.alpha for s in traj.states])
    return {
        "energy_drift": d.energy_drift,
        "casimir_drift": float(np.max(d.casimir_drift)),
        "y_change": float(np.max(np.abs(y - y[0]))),
    }


def _conservation_free(rng):
    c = conservation(False)
    return max(c["energy_drift"] / 1e-8, c["casimir_drift"] / 1e-8, 1.0 if c["y_change"] != 0.0 else 0.0)


def _conservation_projected(rng):
    c = conservation(True)
    return max(c["energy_drift"] / 1e-8, c["casimir_drift"] / 1e-14, 1.0 if c["y_change"] != 0.0 else 0.0)


ORACLE = [
    Check("euler-equations", 1e-12, _euler_oracle),
    Check("rotor-closed-form-and-hamilton-poincare", 1e-12, _rotor_closed_form),
    Check("momentum-map-equivariance", 1e-12, _momentum_equivariance),
    Check("reduction-commutes-with-flow", 1e-6, lambda rng: commutation_deviation()),
    Check("chart-vs-reduced", 1e-5, lambda rng: chart_deviation()),
    Check("axisymmetric-closed-form", 1e-8, lambda rng: closed_form_error(1e-3)),
    # |ratio - 16| < 2 is the admissible band [14, 18].
    Check("rk4-order-ratio", 2.0, lambda rng: abs(rk4_order_ratio() - 16.0)),
    # Drifts are reported as multiples of their thresholds.
    Check("conservation-unprojected", 1.0, _conservation_free),
    Check("conservation-projected", 1.0, _conservation_projected),
]


# ---------------------------------------------------------------------------
# io (part of "all")
# ---------------------------------------------------------------------------


def _determinism_and_roundtrip(rng):
    from .cli import main
    from .io import parse_csv, parse_json
    from .simulation import RunConfig, run, trajectory_rows

    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        for fmt in ("csv", "json"):
            # Same path twice: the JSON meta echoes the output path.
            path = os.path.join(tmp, f"run.{fmt}")
            data = []
            for _ in range(2):
                code = main(["simulate", "--steps", "50", "--format", fmt, "--output", path, "--quiet"])
                failures += code != 0
                with open(path, "rb") as fh:
                    data.append(fh.read())
            failures += data[0] != data[1]
            m, traj = run(RunConfig(steps=50, format=fmt))
            columns, rows = trajectory_rows(m, traj)
            text = data[0].decode()
            parsed_cols, parsed = parse_csv(text) if fmt == "csv" else parse_json(text)[:2]
            failures += list(parsed_cols) != columns or not np.array_equal(parsed, rows)
    return float(failures)


IO = [Check("determinism-and-roundtrip", 0.5, _determinism_and_roundtrip)]

SUITE_CHECKS = {"pairing": PAIRING, "symplectic": SYMPLECTIC, "stages": STAGES, "oracle": ORACLE}


def run_suite(suite: str, seed: Optional[int] = None, echo: Optional[Callable[[str], None]] = None) -> list[CheckResult]:
    """Run a suite; each check draws from its own generator seeded from ``seed``."""
    if suite not in SUITES:
        raise KeyError(suite)
    names = list(SUITE_CHECKS) if suite == "all" else [suite]
    groups = [(n, SUITE_CHECKS[n]) for n in names]
    if suite == "all":
        groups.append(("io", IO))
    base = resolve_seed(seed)
    results = []
    for name, checks in groups:
        for i, check in enumerate(checks):
            rng = np.random.default_rng([base, len(results), i])
            r = CheckResult(name, check.name, float(check.fn(rng)), check.tol, check.lower_bound)
            if echo is not None:
                echo(r.line())
            results.append(r)
    return results
