"""First-stage orbit-reduced space ``T*(Q/G) x_{Q/G} O~`` on trivial bundles.

Points are triples ``(x, alpha, nu)``; the bundle representative used for
every evaluation is ``q = (x, e)``. The reduced two-form is::

    w((x1, a1, n1), (x2, a2, n2)) = <a2, x1> - <a1, x2>
                                    - <nu, B(q)(x1^h, x2^h)>
                                    - <nu, [e1 + A(q1), e2 + A(q2)]>

with ``-ad*_{e_i} nu = n_i`` and ``q_i = (x_i, 0)``. Solving
``i_X w = dh`` gives ``e + A(qdot) = -dh/dnu`` on the orbit, hence
``nudot = ad*_{dh/dnu + A(xdot)} nu`` (the Euler form ``nu x Omega`` for the
rigid body).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bundle import BundlePoint, ConnectionData
from .errors import InvalidInputError
from .lie import (
    AlgebraElement,
    CoalgebraElement,
    ad_star,
    bracket,
    orbit_tangent,
    solve_coadjoint_tangent,
)

FD_STEP = 1e-6


def _vec(a) -> np.ndarray:
    return np.asarray(a, dtype=float).reshape(-1)


def orbit_radii(nu: CoalgebraElement) -> np.ndarray:
    """``|nu|`` on every so(3) factor."""
    return np.array([np.linalg.norm(nu.coords[sl]) for sl in nu.structure.so3_slices()])


def rescale_to_radii(nu: CoalgebraElement, radii: np.ndarray) -> CoalgebraElement:
    c = nu.coords.copy()
    for sl, r in zip(nu.structure.so3_slices(), radii):
        n = np.linalg.norm(c[sl])
        if n > 0.0:
            c[sl] *= r / n
    return CoalgebraElement(nu.structure, c)


@dataclass(frozen=True)
class ReducedState1:
    """Point ``(x, alpha, nu)`` of the first orbit-reduced space."""

    x: np.ndarray
    alpha: np.ndarray
    nu: CoalgebraElement

    def __post_init__(self):
        object.__setattr__(self, "x", _vec(self.x))
        object.__setattr__(self, "alpha", _vec(self.alpha))
        if self.x.shape != self.alpha.shape:
            raise InvalidInputError("x and alpha must have the same dimension")

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.alpha, self.nu.coords])

    def with_vector(self, v: np.ndarray) -> "ReducedState1":
        n = self.x.shape[0]
        return ReducedState1(v[:n], v[n : 2 * n], CoalgebraElement(self.nu.structure, v[2 * n :]))

    def project_orbit(self, reference: "ReducedState1") -> "ReducedState1":
        return ReducedState1(self.x, self.alpha, rescale_to_radii(self.nu, orbit_radii(reference.nu)))

    def finalize(self) -> "ReducedState1":
        return self

    def on_orbit(self, radii, tol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(orbit_radii(self.nu) - np.asarray(radii)) < tol))


@dataclass(frozen=True)
class ReducedTangent1:
    xdot: np.ndarray
    alphadot: np.ndarray
    nudot: CoalgebraElement

    def __post_init__(self):
        object.__setattr__(self, "xdot", _vec(self.xdot))
        object.__setattr__(self, "alphadot", _vec(self.alphadot))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.xdot, self.alphadot, self.nudot.coords])

    def is_orbit_tangent(self, nu: CoalgebraElement, tol: float = 1e-10) -> bool:
        for sl in nu.structure.so3_slices():
            if abs(float(nu.coords[sl] @ self.nudot.coords[sl])) > tol * max(
                1.0, np.linalg.norm(nu.coords[sl]) * np.linalg.norm(self.nudot.coords[sl])
            ):
                return False
        return True


StateFn = Callable[[ReducedState1], float]
PartialFn = Callable[[ReducedState1], np.ndarray]


def _central_gradient(f: Callable[[np.ndarray], float], v: np.ndarray) -> np.ndarray:
    g = np.empty_like(v)
    for i in range(v.shape[0]):
        h = FD_STEP * max(1.0, abs(v[i]))
        vp = v.copy()
        vm = v.copy()
        vp[i] += h
        vm[i] -= h
        g[i] = (f(vp) - f(vm)) / (2.0 * h)
    return g


@dataclass(frozen=True)
class ReducedHamiltonian1:
    """Reduced Hamiltonian with optional analytic partials.

    Missing partials fall back to central finite differences with step
    ``1e-6 * max(1, |value|)``. ``dh_dnu`` returns algebra coordinates through
    the dot-product identification; only its orbit-tangential part matters.
    """

    h: StateFn
    dh_dx: Optional[PartialFn] = None
    dh_dalpha: Optional[PartialFn] = None
    dh_dnu: Optional[PartialFn] = None

    @property
    def analytic(self) -> bool:
        return None not in (self.dh_dx, self.dh_dalpha, self.dh_dnu)

    def __call__(self, s: ReducedState1) -> float:
        return float(self.h(s))

    def fd_partials(self, s: ReducedState1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        grad = _central_gradient(lambda v: self.h(s.with_vector(v)), s.to_vector())
        n = s.x.shape[0]
        return grad[:n], grad[n : 2 * n], grad[2 * n :]

    def partials(self, s: ReducedState1) -> tuple[np.ndarray, np.ndarray, AlgebraElement]:
        if self.analytic:
            dx, da, dn = (_vec(self.dh_dx(s)), _vec(self.dh_dalpha(s)), _vec(self.dh_dnu(s)))
        else:
            fx, fa, fn = self.fd_partials(s)
            dx = fx if self.dh_dx is None else _vec(self.dh_dx(s))
            da = fa if self.dh_dalpha is None else _vec(self.dh_dalpha(s))
            dn = fn if self.dh_dnu is None else _vec(self.dh_dnu(s))
        return dx, da, AlgebraElement(s.nu.structure, dn)

    def check_partials(self, s: ReducedState1, rtol: float = 1e-6) -> float:
        """Worst relative mismatch between analytic and finite-difference partials.

        The nu-partial is compared on the orbit-tangential part only.
        """
        dx, da, dn = self.partials(s)
        fx, fa, fn = self.fd_partials(s)
        dn, fn = dn.coords.copy(), fn.copy()
        nu = s.nu.coords
        for sl in s.nu.structure.so3_slices():
            n2 = float(nu[sl] @ nu[sl])
            if n2 > 0:
                dn[sl] -= (dn[sl] @ nu[sl]) / n2 * nu[sl]
                fn[sl] -= (fn[sl] @ nu[sl]) / n2 * nu[sl]
        a = np.concatenate([dx, da, dn])
        b = np.concatenate([fx, fa, fn])
        return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))


def representative(conn: ConnectionData, s: ReducedState1) -> BundlePoint:
    if s.x.shape[0] != conn.shape_dim:
        raise InvalidInputError(
            f"state has {s.x.shape[0]} shape coordinates, connection expects {conn.shape_dim}"
        )
    if s.nu.structure != conn.structure:
        raise InvalidInputError("state and connection use different Lie structures")
    return BundlePoint.at_identity(conn.structure, s.x)


def omega_red(
    conn: ConnectionData, s: ReducedState1, t1: ReducedTangent1, t2: ReducedTangent1
) -> float:
    """Reduced symplectic form evaluated on two tangent vectors at ``s``."""
    q = representative(conn, s)
    canonical = float(t2.alphadot @ t1.xdot) - float(t1.alphadot @ t2.xdot)
    e1 = solve_coadjoint_tangent(s.nu, t1.nudot)
    e2 = solve_coadjoint_tangent(s.nu, t2.nudot)
    if conn.trivial:
        curv = 0.0
        orbit = s.nu.pair(bracket(e1, e2))
    else:
        curv = s.nu.pair(conn.B(q, t1.xdot, t2.xdot))
        xi1 = e1 + conn.shape_part(q, t1.xdot)
        xi2 = e2 + conn.shape_part(q, t2.xdot)
        orbit = s.nu.pair(bracket(xi1, xi2))
    return canonical - curv - orbit


def _connection_covector(conn: ConnectionData, q: BundlePoint, m: CoalgebraElement) -> np.ndarray:
    """Shape covector ``<m, A(q)(e_j, 0)>``."""
    return conn.local(q.shape).T @ m.coords


def reduced_vector_field(
    conn: ConnectionData, h: ReducedHamiltonian1, s: ReducedState1
) -> ReducedTangent1:
    """Hamiltonian vector field of ``h`` for the reduced form ``omega_red``.

    At ``nu = 0`` on an so(3) factor the orbit is a point and that slot stays
    frozen; only the cotangent part evolves there.
    """
    q = representative(conn, s)
    dx, da, dn = h.partials(s)
    xdot = da
    # Orbit equation: e + A(qdot) = -dh/dnu modulo the stabilizer of nu.
    total = -dn
    if conn.trivial:
        eps = total
        alphadot = -dx
    else:
        eps = total - conn.shape_part(q, xdot)
        alphadot = (
            -dx
            - conn.B_covector(q, s.nu.coords, xdot)
            + _connection_covector(conn, q, ad_star(dn, s.nu))
        )
    return ReducedTangent1(xdot, alphadot, orbit_tangent(s.nu, eps))


def hamilton_poincare_field(
    conn: ConnectionData, h: ReducedHamiltonian1, s: ReducedState1
) -> ReducedTangent1:
    """Hamilton-Poincare equations with a flat connection.

    Covariant derivatives are ordinary derivatives here, so
    ``xdot = dh/dy``, ``ydot = -dh/dx`` and ``mudot = ad*_{dh/dmu} mu`` with the
    orbit coordinate ``nu`` playing the role of ``mu``.
    """
    if not conn.trivial:
        raise InvalidInputError("Hamilton-Poincare comparison requires a flat connection")
    representative(conn, s)
    dx, da, velocity = h.partials(s)
    ydot = -dx - conn.B_covector(BundlePoint.at_identity(conn.structure, s.x), s.nu.coords, da)
    return ReducedTangent1(da, ydot, ad_star(velocity, s.nu))


def orbit_tangent_basis(nu: CoalgebraElement) -> list[CoalgebraElement]:
    """Orthonormal basis of the tangent space of the orbit through ``nu``."""
    basis = []
    for sl in nu.structure.so3_slices():
        n = nu.coords[sl]
        if np.linalg.norm(n) == 0.0:
            continue
        u = n / np.linalg.norm(n)
        a = np.eye(3)[int(np.argmin(np.abs(u)))]
        e1 = np.cross(u, a)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(u, e1)
        for e in (e1, e2):
            c = np.zeros(nu.structure.dim)
            c[sl] = e
            basis.append(CoalgebraElement(nu.structure, c))
    return basis


def tangent_basis(s: ReducedState1) -> list[ReducedTangent1]:
    """Basis of ``T_s`` (shape, cotangent, then orbit directions)."""
    n = s.x.shape[0]
    zero_nu = CoalgebraElement.zero(s.nu.structure)
    out = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        out.append(ReducedTangent1(e, np.zeros(n), zero_nu))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        out.append(ReducedTangent1(np.zeros(n), e, zero_nu))
    for v in orbit_tangent_basis(s.nu):
        out.append(ReducedTangent1(np.zeros(n), np.zeros(n), v))
    return out


def gram_matrix(conn: ConnectionData, s: ReducedState1, basis: list[ReducedTangent1]) -> np.ndarray:
    m = len(basis)
    G = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            G[i, j] = omega_red(conn, s, basis[i], basis[j])
            G[j, i] = -G[i, j]
    return G


def differential_fd(h: StateFn, s: ReducedState1, t: ReducedTangent1, step: float = FD_STEP) -> float:
    """``Dh(s)[t]`` by central differences along ``s + tau t``."""
    v = s.to_vector()
    d = t.to_vector()
    scale = step / max(1.0, float(np.linalg.norm(d)))
    return (h(s.with_vector(v + scale * d)) - h(s.with_vector(v - scale * d))) / (2.0 * scale)
