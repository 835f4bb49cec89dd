import numpy as np
import pytest

from orbitred import (
    SO3,
    CoalgebraElement,
    InvalidExtensionError,
    InvalidInputError,
    InvalidTangentError,
    LieStructure,
    abelian,
)
from orbitred.bundle import BundlePoint, ConnectionData, curvature_fd
from orbitred.models import ROTOR_GROUP, RigidBodyRotors, rbr_two_stage_connections, rbr_two_stage_model, rbr_two_stage_state
from orbitred.reduced_two import (
    ReducedHamiltonian2,
    ReducedState2,
    ReducedTangent2,
    StagesContext,
    check_connection_compatibility,
    omega_two,
    quotient_velocity,
    rho_shift,
    two_stage_vector_field,
)
from orbitred.verify import curved_curvature, curved_local_form, random_sphere, two_stage_hamiltonian_residual, two_stage_tangent

E = np.eye(3)
N = LieStructure.of(SO3)
H = LieStructure.of(abelian(3))


def ctx_for(mu_coords, stabilizer_is_full=True):
    return StagesContext(ROTOR_GROUP, (0,), CoalgebraElement(ROTOR_GROUP, mu_coords), stabilizer_is_full)


def rotor_setup(I=(1.0, 2.0, 3.0), rho=None):
    m = RigidBodyRotors(I, (0.1, 0.1, 0.1))
    ctx, h2 = rbr_two_stage_model(m, rho=rho)
    connN, connH = rbr_two_stage_connections(ctx)
    return m, ctx, h2, connN, connH


def eta_tangent(ctx, v):
    return ReducedTangent2([], [], CoalgebraElement.zero(ctx.H), CoalgebraElement(ctx.N, v))


# A curved two-stage setting over a 2-d base.
def a_H(x):
    return np.array([[np.cos(x[0]), 0.0], [0.0, x[0]], [x[1], 1.0]])


def b_H(x):
    b = np.zeros((3, 2, 2))
    b[:, 0, 1] = [0.0, 1.0, -1.0]
    b[:, 1, 0] = [0.0, -1.0, 1.0]
    return b


def curved_setting(rng):
    mu = CoalgebraElement(ROTOR_GROUP, np.concatenate([random_sphere(rng), rng.normal(size=3)]))
    ctx = StagesContext(ROTOR_GROUP, (0,), mu)
    connN = ConnectionData(N, 2, curved_local_form, curved_curvature)
    connH = ConnectionData(H, 2, a_H, b_H)
    I = np.array([1.0, 2.0, 3.0])

    def h2(s):
        y, g, tau, eta = s.y, s.gamma, s.tau.coords, s.eta.coords
        return float(
            0.5 * g @ g + 0.5 * np.sum(eta**2 / I) + 0.3 * np.cos(y[0]) * eta[0] + 0.2 * y[1] * g[0] + tau @ [0.1, 0.2, 0.3] * y[0]
        )

    s = ReducedState2(rng.normal(size=2), rng.normal(size=2), rho_shift(ctx, mu, ctx.canonical_extension()), ctx.nu)
    return ctx, connN, connH, ReducedHamiltonian2(h2), s


class TestContext:
    def test_inclusion_projection(self, rng):
        ctx = ctx_for(np.arange(6.0))
        from orbitred.lie import AlgebraElement

        xi = AlgebraElement(N, rng.normal(size=3))
        np.testing.assert_array_equal(ctx.project_n(ctx.include_n(xi)).coords, xi.coords)
        assert ctx.G.dim == ctx.N.dim + ctx.H.dim
        np.testing.assert_array_equal(ctx.nu.coords, [0, 1, 2])

    @pytest.mark.parametrize("idx", [(), (0, 1), (5,)])
    def test_bad_indices(self, idx):
        with pytest.raises(InvalidInputError):
            StagesContext(ROTOR_GROUP, idx, CoalgebraElement.zero(ROTOR_GROUP))

    def test_orbit_preserved(self, rng):
        assert ctx_for(rng.normal(size=6)).orbit_preservation_residual(rng, 32) < 1e-10


class TestRhoShift:
    def test_product_projection(self):
        ctx = ctx_for([1, 2, 3, 4, 5, 6])
        np.testing.assert_array_equal(rho_shift(ctx, ctx.mu, ctx.canonical_extension()).coords, [4, 5, 6])

    def test_zero(self):
        ctx = ctx_for([1, 2, 3, 0, 0, 0])
        np.testing.assert_array_equal(rho_shift(ctx, ctx.mu, ctx.canonical_extension()).coords, 0)

    def test_extension_invariant(self, rng):
        ctx = ctx_for(rng.normal(size=6))
        reference = ctx.restrict_h(ctx.mu).coords
        for _ in range(20):
            ext = ctx.combine(ctx.nu, CoalgebraElement(ctx.H, rng.normal(size=3)))
            rho = rho_shift(ctx, ctx.mu, ext)
            assert np.max(np.abs(rho.coords + ctx.restrict_h(ext).coords - reference)) < 1e-14

    def test_bad_extension(self):
        ctx = ctx_for([1, 2, 3, 4, 5, 6])
        with pytest.raises(InvalidExtensionError):
            rho_shift(ctx, ctx.mu, CoalgebraElement(ROTOR_GROUP, [1, 2, 3.1, 0, 0, 0]))

    def test_linear_in_mu(self, rng):
        ctx = ctx_for(rng.normal(size=6))
        ext = ctx.canonical_extension()
        m1 = ctx.combine(ctx.nu, CoalgebraElement(ctx.H, rng.normal(size=3)))
        m2 = ctx.combine(ctx.nu, CoalgebraElement(ctx.H, rng.normal(size=3)))
        a = rho_shift(ctx, m1 * 0.3 + m2 * 0.7, ext).coords
        b = 0.3 * rho_shift(ctx, m1, ext).coords + 0.7 * rho_shift(ctx, m2, ext).coords
        assert np.max(np.abs(a - b)) < 1e-14

    def test_requires_full_stabilizer(self):
        ctx = ctx_for([1, 0, 0, 0, 0, 0], stabilizer_is_full=False)
        with pytest.raises(InvalidInputError):
            rho_shift(ctx, ctx.mu, ctx.canonical_extension())


class TestOmegaTwo:
    def test_rotor_orbit_form(self, rng):
        _, ctx, _, connN, connH = rotor_setup()
        for _ in range(20):
            n = random_sphere(rng)
            s = rbr_two_stage_state(ctx, n)
            e1, e2 = rng.normal(size=(2, 3))
            t1, t2 = eta_tangent(ctx, np.cross(e1, n)), eta_tangent(ctx, np.cross(e2, n))
            # t_i = -ad*_{e_i} nu = e_i x nu; the form is -<nu, e1' x e2'> with minimal-norm e_i'
            p1 = e1 - (e1 @ n) / (n @ n) * n
            p2 = e2 - (e2 @ n) / (n @ n) * n
            assert omega_two(ctx, connN, connH, s, t1, t2) == pytest.approx(-n @ np.cross(p1, p2), abs=1e-13)

    def test_hand_value(self):
        _, ctx, _, connN, connH = rotor_setup()
        s = rbr_two_stage_state(ctx, E[2])
        assert omega_two(ctx, connN, connH, s, eta_tangent(ctx, E[0]), eta_tangent(ctx, E[1])) == pytest.approx(-1.0)

    def test_same_tangent_zero(self, rng):
        ctx, connN, connH, _, s = curved_setting(rng)
        t = two_stage_tangent(ctx, s, rng)
        assert abs(omega_two(ctx, connN, connH, s, t, t)) < 1e-15

    def test_bilinear_antisymmetric_curved(self, rng):
        for _ in range(20):
            ctx, connN, connH, _, s = curved_setting(rng)
            t1, t1b, t2 = (two_stage_tangent(ctx, s, rng) for _ in range(3))
            a, b = rng.normal(size=2)
            comb = ReducedTangent2(a * t1.ydot + b * t1b.ydot, a * t1.gammadot + b * t1b.gammadot, CoalgebraElement.zero(ctx.H), t1.etadot * a + t1b.etadot * b)
            w = lambda u, v: omega_two(ctx, connN, connH, s, u, v)  # noqa: E731
            assert abs(w(comb, t2) - a * w(t1, t2) - b * w(t1b, t2)) < 1e-12
            assert abs(w(t1, t2) + w(t2, t1)) < 1e-12

    def test_tau_tangent_rejected(self):
        _, ctx, _, connN, connH = rotor_setup()
        s = rbr_two_stage_state(ctx, E[2])
        bad = ReducedTangent2([], [], CoalgebraElement(ctx.H, [1.0, 0, 0]), CoalgebraElement(ctx.N, E[0]))
        with pytest.raises(InvalidTangentError):
            omega_two(ctx, connN, connH, s, bad, eta_tangent(ctx, E[1]))


class TestTwoStageField:
    def test_principal_axis(self):
        _, ctx, h2, connN, connH = rotor_setup()
        X = two_stage_vector_field(ctx, connN, connH, h2, rbr_two_stage_state(ctx, E[0]))
        np.testing.assert_array_equal(X.etadot.coords, 0)

    def test_hand_value(self):
        _, ctx, h2, connN, connH = rotor_setup()
        X = two_stage_vector_field(ctx, connN, connH, h2, rbr_two_stage_state(ctx, [1.0, 1.0, 0.0]))
        np.testing.assert_allclose(X.etadot.coords, [0, 0, -0.5], atol=1e-15)
        np.testing.assert_array_equal(X.taudot.coords, 0)

    def test_isotropic_body(self, rng):
        _, ctx, h2, connN, connH = rotor_setup(I=(1.0, 1.0, 1.0))
        for _ in range(10):
            X = two_stage_vector_field(ctx, connN, connH, h2, rbr_two_stage_state(ctx, rng.normal(size=3)))
            assert np.max(np.abs(X.etadot.coords)) < 1e-15

    def test_constant_h2(self, rng):
        ctx, connN, connH, _, s = curved_setting(rng)
        X = two_stage_vector_field(ctx, connN, connH, ReducedHamiltonian2(lambda s: 1.0), s)
        assert np.max(np.abs(X.to_vector())) == 0.0

    def test_interior_product_rotor(self, rng):
        m = RigidBodyRotors((1.0, 2.0, 3.0), (0.1, 0.1, 0.1))
        for _ in range(100):
            rho = rng.normal(scale=0.3, size=3)
            ctx, h2 = rbr_two_stage_model(m, rho=rho)
            connN, connH = rbr_two_stage_connections(ctx)
            s = rbr_two_stage_state(ctx, random_sphere(rng), rho=rho)
            assert two_stage_hamiltonian_residual(ctx, connN, connH, h2, s) < 1e-8

    def test_interior_product_curved(self, rng):
        for _ in range(50):
            ctx, connN, connH, h2, s = curved_setting(rng)
            assert two_stage_hamiltonian_residual(ctx, connN, connH, h2, s) < 1e-8

    def test_h_curvature_matches_fd(self, rng):
        connH = ConnectionData(H, 2, a_H, b_H)
        for _ in range(10):
            q = BundlePoint.at_identity(H, rng.normal(size=2))
            u, v = rng.normal(size=(2, 2))
            np.testing.assert_allclose(curvature_fd(connH, q, u, v).coords, connH.B(q, u, v).coords, atol=1e-8)

    def test_pointwise_conservation(self, rng):
        m, ctx, h2, connN, connH = rotor_setup(rho=np.array([0.1, -0.2, 0.05]))
        for _ in range(100):
            s = rbr_two_stage_state(ctx, random_sphere(rng), rho=np.array([0.1, -0.2, 0.05]))
            X = two_stage_vector_field(ctx, connN, connH, h2, s)
            assert abs(2 * s.eta.coords @ X.etadot.coords) < 1e-12
            _, _, _, de = h2.partials(s)
            assert abs(de.coords @ X.etadot.coords) < 1e-12

    def test_phase_rate_is_rotor_rate(self, rng):
        rho = np.array([0.1, -0.05, 0.08])
        m, ctx, h2, connN, connH = rotor_setup(rho=rho)
        n = random_sphere(rng)
        s = rbr_two_stage_state(ctx, n, rho=rho, phase=np.zeros(3))
        X = two_stage_vector_field(ctx, connN, connH, h2, s)
        np.testing.assert_allclose(X.phasedot, m.rotor_rates(rho, n), atol=1e-15)
        np.testing.assert_allclose(quotient_velocity(ctx, connH, h2, s), m.rotor_rates(rho, n), atol=1e-15)

    def test_non_abelian_quotient_rejected(self):
        G = LieStructure.of(abelian(3), SO3)
        ctx = StagesContext(G, (0,), CoalgebraElement(G, [0, 0, 0, 1, 0, 0]))
        s = ReducedState2([], [], CoalgebraElement(ctx.H, E[0]), CoalgebraElement(ctx.N, [0, 0, 0]))
        with pytest.raises(InvalidInputError):
            two_stage_vector_field(ctx, ConnectionData.flat(ctx.N, 0), ConnectionData.flat(ctx.H, 0), ReducedHamiltonian2(lambda s: 0.0), s)


class TestCompatibility:
    def test_block_connection_compatible(self, rng):
        ctx = ctx_for(rng.normal(size=6))
        connN = ConnectionData(N, 2, curved_local_form, curved_curvature)
        connH = ConnectionData(H, 2, a_H, b_H)
        connG = ConnectionData(
            ROTOR_GROUP, 2, lambda x: np.vstack([curved_local_form(x), a_H(x)]), lambda x: np.concatenate([curved_curvature(x), b_H(x)])
        )
        assert check_connection_compatibility(ctx, connG, connN, connH, rng) < 1e-12

    def test_incompatible_detected(self, rng):
        ctx = ctx_for(rng.normal(size=6))
        connN = ConnectionData(N, 2, curved_local_form, curved_curvature)
        connG = ConnectionData.flat(ROTOR_GROUP, 2)
        assert check_connection_compatibility(ctx, connG, connN, ConnectionData.flat(H, 2), rng) > 1e-3


class TestStateRecord:
    def test_projection_keeps_tau(self, rng):
        _, ctx, _, _, _ = rotor_setup(rho=np.ones(3))
        s = rbr_two_stage_state(ctx, E[0], rho=np.ones(3))
        moved = s.with_vector(1.1 * s.to_vector())
        p = moved.project_orbit(s)
        np.testing.assert_array_equal(p.tau.coords, s.tau.coords)
        assert np.linalg.norm(p.eta.coords) == pytest.approx(1.0, abs=1e-15)

    def test_bad_phase(self):
        with pytest.raises(InvalidInputError):
            ReducedState2([], [], CoalgebraElement.zero(H), CoalgebraElement(N, E[0]), [1.0])
