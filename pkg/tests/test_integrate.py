import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbitred import InvalidInputError, NumericalFailureError
from orbitred.full import ChartState, chart_hamiltonian, full_field_chart
from orbitred.integrate import Trajectory, diagnose, integrate, rk4_step, sup_deviation
from orbitred.models import FreeRigidBody, RigidBodyRotors
from orbitred.reduced_one import reduced_vector_field
from orbitred.verify import reduced_rotor_trajectory


class TestRK4Step:
    def test_zero_field(self):
        s = np.array([1.0, -2.0, 3.0])
        np.testing.assert_array_equal(rk4_step(lambda v: np.zeros_like(v), s, 0.1), s)

    def test_linear_taylor(self):
        # RK4 on s' = s reproduces the degree-4 Taylor polynomial of exp(dt).
        expected = sum(0.1**k / math.factorial(k) for k in range(5))
        assert rk4_step(lambda v: v, np.array([1.0]), 0.1)[0] == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(1.10517083333, abs=1e-11)

    @given(st.floats(1e-3, 0.2), st.floats(0, 2 * np.pi))
    def test_harmonic_oscillator(self, dt, phase):
        s = np.array([np.cos(phase), np.sin(phase)])
        out = rk4_step(lambda v: np.array([-v[1], v[0]]), s, dt)
        exact = np.array([np.cos(phase + dt), np.sin(phase + dt)])
        assert np.max(np.abs(out - exact)) < dt**5

    def test_nonfinite(self):
        with np.errstate(divide="ignore"), pytest.raises(NumericalFailureError) as info:
            rk4_step(lambda v: v / 0.0, np.array([1.0]), 0.1, step=7)
        assert info.value.step == 7
        assert "step 7" in str(info.value)

    def test_chart_singularity_becomes_numerical_failure(self):
        H = chart_hamiltonian(FreeRigidBody().energy)
        c = ChartState([0.0, 1e-9, 0.0], [1.0, 0.0, 1.0])
        with pytest.raises(NumericalFailureError):
            rk4_step(lambda s: full_field_chart(H, s), c, 0.1, step=3)

    def test_dt_positive(self):
        with pytest.raises(InvalidInputError):
            rk4_step(lambda v: v, np.array([1.0]), 0.0)


class TestIntegrate:
    def test_one_step(self, rng):
        m = RigidBodyRotors()
        conn, h = m.connection(), m.hamiltonian()
        s0 = m.state(rng.normal(size=3), rng.normal(size=3), rng.normal(size=3))
        field = lambda s: reduced_vector_field(conn, h, s)  # noqa: E731
        traj = integrate(field, s0, 1e-2, 1)
        np.testing.assert_array_equal(traj.states[1].to_vector(), rk4_step(field, s0, 1e-2).to_vector())

    def test_needs_steps(self):
        with pytest.raises(InvalidInputError):
            integrate(lambda v: v, np.array([1.0]), 0.1, 0)

    def test_failure_carries_step(self):
        def field(v):
            return v if v[0] < 1.5 else v * np.inf

        with pytest.raises(NumericalFailureError) as info:
            integrate(field, np.array([1.0]), 0.1, 100)
        assert info.value.step == 5

    def test_uniform_times(self):
        traj = integrate(lambda v: -v, np.array([1.0]), 0.01, 100)
        assert len(traj) == 101
        assert np.max(np.abs(np.diff(traj.times) - 0.01)) < 1e-12

    def test_trajectory_lengths(self):
        with pytest.raises(InvalidInputError):
            Trajectory(np.arange(3.0), (1, 2), 1.0)

    def test_projection(self):
        m, traj = reduced_rotor_trajectory(2.0, project=True)
        d = diagnose(traj, m)
        assert np.max(d.casimir_drift) < 1e-14
        assert traj.projected

    def test_projection_energy_not_worse(self):
        m, free = reduced_rotor_trajectory(2.0)
        _, proj = reduced_rotor_trajectory(2.0, project=True)
        e_free = diagnose(free, m).energy_drift
        e_proj = diagnose(proj, m).energy_drift
        assert e_proj <= 10 * max(e_free, 1e-16)


class TestDiagnostics:
    def test_constant(self):
        m = FreeRigidBody((2.0, 2.0, 2.0))
        s = m.state([1.0, 0.0, 0.0])
        traj = Trajectory(np.arange(3.0), (s, s, s), 1.0)
        d = diagnose(traj, m)
        assert d.energy_drift == 0.0 and np.max(d.casimir_drift) == 0.0
        assert d.momentum_drift is None

    def test_relative_equilibrium(self):
        m = FreeRigidBody((1.0, 2.0, 3.0))
        conn, h = m.connection(), m.hamiltonian()
        traj = integrate(lambda s: reduced_vector_field(conn, h, s), m.state([0.0, 1.0, 0.0]), 1e-2, 100)
        d = diagnose(traj, m)
        assert d.energy_drift < 1e-12 and np.max(d.casimir_drift) < 1e-12

    def test_recomputed(self):
        m, traj = reduced_rotor_trajectory(1.0)
        d = diagnose(traj, m)
        e = np.array([m.energy(s.alpha, s.nu.coords) for s in traj.states])
        r = np.array([np.linalg.norm(s.nu.coords) for s in traj.states])
        assert d.energy_drift == np.max(np.abs(e - e[0])) / abs(e[0])
        assert d.casimir_drift[0] == np.max(np.abs(r - r[0]))
        assert set(d.summary()) == {"energy_drift", "casimir_drift"}

    def test_sup_deviation(self):
        assert sup_deviation([[1.0, 2.0]], [[1.5, 2.0]]) == 0.5
        with pytest.raises(InvalidInputError):
            sup_deviation([[1.0]], [[1.0, 2.0]])
