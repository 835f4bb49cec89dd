import numpy as np
import pytest

from orbitred import verify as V


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv("ORBITRED_SEED", raising=False)
    assert V.resolve_seed() == V.DEFAULT_SEED
    monkeypatch.setenv("ORBITRED_SEED", "17")
    assert V.resolve_seed() == 17
    assert V.resolve_seed(5) == 5


def test_unknown_suite():
    with pytest.raises(KeyError):
        V.run_suite("nope")


def test_pairing_routing():
    lines = []
    results = V.run_suite("pairing", seed=1, echo=lines.append)
    assert {r.suite for r in results} == {"pairing"}
    assert len(results) == len(V.PAIRING) == len(lines)
    assert all(r.passed for r in results)


def test_pairing_reproducible():
    a = [r.residual for r in V.run_suite("pairing", seed=4)]
    b = [r.residual for r in V.run_suite("pairing", seed=4)]
    assert a == b


def test_check_result_bounds():
    assert V.CheckResult("s", "n", 0.5, 1.0).passed
    assert not V.CheckResult("s", "n", 1.0, 1.0).passed
    assert V.CheckResult("s", "n", 2.0, 1.0, lower_bound=True).passed
    assert not V.CheckResult("s", "n", 0.5, 1.0, lower_bound=True).passed
    assert not V.CheckResult("s", "n", np.nan, 1.0).passed
    line = V.CheckResult("pairing", "jacobi", 1e-16, 1e-12).line()
    assert line.startswith("PASS pairing/jacobi") and "< 1.0e-12" in line


def test_curved_connection_is_curved(rng):
    from orbitred.bundle import BundlePoint

    conn = V.curved_connection()
    q = BundlePoint(rng.normal(size=2), V.random_group(V.SO3_ONLY, rng))
    assert np.linalg.norm(conn.B(q, np.array([1.0, 0.0]), np.array([0.0, 1.0])).coords) > 0.1


def test_random_sphere_radius(rng):
    assert np.linalg.norm(V.random_sphere(rng, 2.5)) == pytest.approx(2.5)


def test_suite_names():
    assert set(V.SUITE_CHECKS) | {"all"} == set(V.SUITES)
