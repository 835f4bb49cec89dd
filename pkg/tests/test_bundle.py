import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbitred import SO3, AlgebraElement, GroupElement, InvalidInputError, LieStructure, abelian
from orbitred.bundle import BundlePoint, BundleTangent, ConnectionData, curvature_fd, horizontal_lift
from orbitred.lie import rodrigues
from orbitred.verify import curved_connection

S = LieStructure.of(SO3)
A1 = LieStructure.of(abelian(1))


def x2_dx1():
    """Abelian connection ``A = x2 dx1`` on a 2-d shape space."""

    def b(x):
        out = np.zeros((1, 2, 2))
        out[0, 0, 1], out[0, 1, 0] = -1.0, 1.0
        return out

    return ConnectionData(A1, 2, lambda x: np.array([[x[1], 0.0]]), b)


def random_point(st_, dim, rng):
    parts = [rodrigues(rng.normal(size=3)) if f.kind == "so3" else rng.uniform(0, 6, f.dim) for f in st_.factors]
    return BundlePoint(rng.normal(size=dim), GroupElement(st_, parts))


class TestHorizontalLift:
    def test_trivial(self):
        conn = ConnectionData.flat(S, 2)
        q = BundlePoint.at_identity(S, [0.1, 0.2])
        h = horizontal_lift(conn, q, [1.0, 2.0])
        np.testing.assert_array_equal(h.shape, [1.0, 2.0])
        np.testing.assert_array_equal(h.group.coords, np.zeros(3))

    def test_zero(self, rng):
        conn = curved_connection()
        h = horizontal_lift(conn, random_point(S, 2, rng), np.zeros(2))
        np.testing.assert_array_equal(h.shape, 0)
        np.testing.assert_array_equal(h.group.coords, 0)

    @pytest.mark.parametrize("make", [x2_dx1, curved_connection])
    def test_annihilated(self, make, rng):
        conn = make()
        for _ in range(50):
            q = random_point(conn.structure, 2, rng)
            xdot = rng.normal(size=2)
            h = horizontal_lift(conn, q, xdot)
            np.testing.assert_array_equal(h.shape, xdot)
            assert np.max(np.abs(conn.A(q, h).coords)) < 1e-12

    def test_linear(self, rng):
        conn = curved_connection()
        q = random_point(S, 2, rng)
        u, v = rng.normal(size=(2, 2))
        a, b = 0.3, -1.7
        lhs = horizontal_lift(conn, q, a * u + b * v).group.coords
        rhs = a * horizontal_lift(conn, q, u).group.coords + b * horizontal_lift(conn, q, v).group.coords
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            horizontal_lift(ConnectionData.flat(S, 2), BundlePoint.at_identity(S, [0, 0]), [1.0])


class TestConnectionAxiom:
    @pytest.mark.parametrize("make", [x2_dx1, curved_connection])
    def test_vertical_reproduces_generator(self, make, rng):
        conn = make()
        for _ in range(20):
            q = random_point(conn.structure, 2, rng)
            xi = AlgebraElement(conn.structure, rng.normal(size=conn.structure.dim))
            out = conn.A(q, BundleTangent(np.zeros(2), xi))
            np.testing.assert_allclose(out.coords, xi.coords, atol=1e-15)

    def test_local_form_and_curvature_paired(self):
        with pytest.raises(InvalidInputError):
            ConnectionData(S, 2, local_form=lambda x: np.zeros((3, 2)))


class TestCurvature:
    def test_trivial_zero(self, rng):
        conn = ConnectionData.flat(S, 2)
        q = random_point(S, 2, rng)
        assert np.max(np.abs(curvature_fd(conn, q, [1, 0], [0, 1]).coords)) < 1e-9
        np.testing.assert_array_equal(conn.B(q, [1, 0], [0, 1]).coords, 0)

    def test_constant_abelian_zero(self, rng):
        conn = ConnectionData(A1, 2, lambda x: np.array([[0.4, -1.3]]), lambda x: np.zeros((1, 2, 2)))
        q = random_point(A1, 2, rng)
        assert np.max(np.abs(curvature_fd(conn, q, [1, 0], [0, 1]).coords)) < 1e-9

    def test_x2_dx1_hand_value(self, rng):
        conn = x2_dx1()
        q = random_point(A1, 2, rng)
        assert curvature_fd(conn, q, [1, 0], [0, 1]).coords[0] == pytest.approx(-1.0, abs=1e-9)
        assert conn.B(q, [1, 0], [0, 1]).coords[0] == -1.0

    def test_nonabelian_formula_matches_fd(self, rng):
        # Supplied curvature is da - [a u, a v]; finite differences are independent of it.
        conn = curved_connection()
        for _ in range(50):
            q = random_point(S, 2, rng)
            u, v = rng.normal(size=(2, 2))
            u /= np.linalg.norm(u)
            v /= np.linalg.norm(v)
            B = conn.B(q, u, v).coords
            err = np.max(np.abs(B - curvature_fd(conn, q, u, v).coords))
            assert err < 1e-8 * max(1.0, np.linalg.norm(B))

    def test_fd_antisymmetric(self, rng):
        conn = curved_connection()
        h = 1e-5
        q = random_point(S, 2, rng)
        u, v = rng.normal(size=(2, 2))
        s = curvature_fd(conn, q, u, v, h) + curvature_fd(conn, q, v, u, h)
        assert np.max(np.abs(s.coords)) < 2 * h**2 * 100

    def test_equivariance(self, rng):
        conn = curved_connection()
        x = rng.normal(size=2)
        g = GroupElement(S, [rodrigues(rng.normal(size=3))])
        u, v = rng.normal(size=(2, 2))
        at_e = conn.B(BundlePoint.at_identity(S, x), u, v).coords
        at_g = conn.B(BundlePoint(x, g), u, v).coords
        np.testing.assert_allclose(at_g, g.rotation() @ at_e, atol=1e-14)

    @given(st.floats(-2, 2), st.floats(-2, 2))
    def test_curvature_bilinear_antisymmetric(self, a, b):
        conn = curved_connection()
        q = BundlePoint.at_identity(S, [0.3, -0.4])
        u, v, w = np.array([1.0, 0.2]), np.array([-0.5, 1.0]), np.array([0.7, 0.7])
        lhs = conn.B(q, a * u + b * w, v).coords
        rhs = a * conn.B(q, u, v).coords + b * conn.B(q, w, v).coords
        assert np.max(np.abs(lhs - rhs)) < 1e-12
        np.testing.assert_array_equal(conn.B(q, u, v).coords, -conn.B(q, v, u).coords)
