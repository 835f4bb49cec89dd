"""Trivial principal bundles ``Q = X x G`` with principal connections.

Tangent vectors at ``q = (x, g)`` are stored as ``(xdot, w)`` where
``w = gdot g^-1`` is the right-trivialized group velocity. With this choice
the infinitesimal generator of ``xi`` is ``(0, xi)`` for the left action, and
an equivariant connection reads::

    A(x, g)(xdot, w) = w + Ad_g(a(x) xdot)

where ``a(x)`` is the local form (a ``dim g x dim X`` matrix) supplied by the
model. Curvature is ``B(u^h, v^h) = dA(u^h, v^h)`` on horizontal lifts; at the
identity this equals ``da(u, v) - [a(x)u, a(x)v]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError
from .lie import (
    Ad,
    AlgebraElement,
    GroupElement,
    LieStructure,
    bracket,
    exp_so3,
    left_jacobian,
)

LocalForm = Callable[[np.ndarray], np.ndarray]
LocalCurvature = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BundlePoint:
    shape: np.ndarray
    group: GroupElement

    @classmethod
    def at_identity(cls, structure: LieStructure, shape) -> "BundlePoint":
        return cls(np.asarray(shape, dtype=float).reshape(-1), GroupElement.identity(structure))


@dataclass(frozen=True)
class BundleTangent:
    """Tangent vector ``(xdot, w)``; ``w`` is right-trivialized."""

    shape: np.ndarray
    group: AlgebraElement


class ConnectionData:
    """Principal connection on ``X x G`` given by its local form.

    Args:
        structure: Lie structure of the structure group G.
        shape_dim: dimension of the shape space X.
        local_form: ``x -> a(x)``, shape ``(dim g, shape_dim)``. ``None`` means
            the flat product connection.
        curvature: ``x -> b(x)``, shape ``(dim g, shape_dim, shape_dim)``,
            antisymmetric in the last two axes; the curvature at the identity.
    """

    def __init__(
        self,
        structure: LieStructure,
        shape_dim: int,
        local_form: Optional[LocalForm] = None,
        curvature: Optional[LocalCurvature] = None,
    ):
        if shape_dim < 0:
            raise InvalidInputError("shape_dim must be nonnegative")
        if (local_form is None) != (curvature is None):
            raise InvalidInputError("local_form and curvature must be given together")
        self.structure = structure
        self.shape_dim = int(shape_dim)
        self._form = local_form
        self._curv = curvature

    @classmethod
    def flat(cls, structure: LieStructure, shape_dim: int) -> "ConnectionData":
        return cls(structure, shape_dim)

    @property
    def trivial(self) -> bool:
        return self._form is None

    def local(self, x: np.ndarray) -> np.ndarray:
        if self._form is None:
            return np.zeros((self.structure.dim, self.shape_dim))
        return np.asarray(self._form(np.asarray(x, dtype=float)), dtype=float)

    def _check_shape_vec(self, v, name: str) -> np.ndarray:
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape[0] != self.shape_dim:
            raise InvalidInputError(
                f"{name} has dimension {v.shape[0]}, shape space has {self.shape_dim}"
            )
        return v

    def A(self, q: BundlePoint, v: BundleTangent) -> AlgebraElement:
        xdot = self._check_shape_vec(v.shape, "xdot")
        if v.group.structure != self.structure:
            raise InvalidInputError("group velocity has the wrong structure")
        if self.trivial:
            return v.group
        return v.group + Ad(q.group, AlgebraElement(self.structure, self.local(q.shape) @ xdot))

    def shape_part(self, q: BundlePoint, xdot) -> AlgebraElement:
        """``A(q)(xdot, 0)``: the connection on the section's velocity."""
        return self.A(q, BundleTangent(np.asarray(xdot, dtype=float), AlgebraElement.zero(self.structure)))

    def B(self, q: BundlePoint, u, v) -> AlgebraElement:
        """Curvature on the horizontal lifts of shape vectors ``u`` and ``v``."""
        u = self._check_shape_vec(u, "u")
        v = self._check_shape_vec(v, "v")
        if self.trivial:
            return AlgebraElement.zero(self.structure)
        b = np.asarray(self._curv(np.asarray(q.shape, dtype=float)), dtype=float)
        return Ad(q.group, AlgebraElement(self.structure, np.einsum("kij,i,j->k", b, u, v)))

    def B_covector(self, q: BundlePoint, nu_coords: np.ndarray, u) -> np.ndarray:
        """Shape covector ``<nu, B(q)(u, .)>``."""
        if self.trivial:
            return np.zeros(self.shape_dim)
        u = self._check_shape_vec(u, "u")
        out = np.empty(self.shape_dim)
        for j in range(self.shape_dim):
            e = np.zeros(self.shape_dim)
            e[j] = 1.0
            out[j] = float(nu_coords @ self.B(q, u, e).coords)
        return out


def horizontal_lift(conn: ConnectionData, q: BundlePoint, xdot) -> BundleTangent:
    """Unique tangent at ``q`` over ``xdot`` annihilated by the connection."""
    xdot = conn._check_shape_vec(xdot, "xdot")
    w = -conn.shape_part(q, xdot) if not conn.trivial else AlgebraElement.zero(conn.structure)
    return BundleTangent(xdot.copy(), w)


def _coordinate_form(conn: ConnectionData, q: BundlePoint):
    """Connection as a one-form in the chart ``(x, z) -> (x, exp(z) g0)``."""
    st = conn.structure
    n = conn.shape_dim

    def form(p: np.ndarray, vec: np.ndarray) -> np.ndarray:
        x, z = p[:n], p[n:]
        xdot, zdot = vec[:n], vec[n:]
        g = exp_so3(AlgebraElement(st, z)) @ q.group
        w = zdot.copy()
        for sl in st.so3_slices():
            w[sl] = left_jacobian(z[sl]) @ zdot[sl]
        return conn.A(BundlePoint(x, g), BundleTangent(xdot, AlgebraElement(st, w))).coords

    return form


def curvature_fd(
    conn: ConnectionData, q: BundlePoint, u, v, h: float = 1e-5
) -> AlgebraElement:
    """Curvature on horizontal lifts by central finite differences.

    Works in exponential coordinates around ``q`` where the horizontal lifts
    extend to constant (hence commuting) coordinate fields, so
    ``B = U(A(V)) - V(A(U)) + [A(U), A(V)]``. Independent of ``conn.B``.
    """
    u = conn._check_shape_vec(u, "u")
    v = conn._check_shape_vec(v, "v")
    st = conn.structure
    form = _coordinate_form(conn, q)
    hu = horizontal_lift(conn, q, u)
    hv = horizontal_lift(conn, q, v)
    p0 = np.concatenate([q.shape, np.zeros(st.dim)])
    U = np.concatenate([hu.shape, hu.group.coords])
    V = np.concatenate([hv.shape, hv.group.coords])

    def deriv(direction, vec):
        return (form(p0 + h * direction, vec) - form(p0 - h * direction, vec)) / (2.0 * h)

    dA = deriv(U, V) - deriv(V, U)
    AU = AlgebraElement(st, form(p0, U))
    AV = AlgebraElement(st, form(p0, V))
    return AlgebraElement(st, dA) + bracket(AU, AV)
