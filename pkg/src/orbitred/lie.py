"""Lie algebra and group kernels for products of so(3) and abelian factors.

Conventions (used by every other module):

* so(3) is identified with R^3 through the hat map, so ``[a, b] = a x b``.
* g and g* share coordinates; the pairing is the Euclidean dot product.
* ``ad*_xi nu`` is defined by ``<ad*_xi nu, eta> = <nu, [xi, eta]>``, which on
  so(3) coordinates gives ``nu x xi``. Abelian factors have trivial bracket
  and trivial coadjoint action.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DegenerateOrbitError, InvalidInputError, InvalidTangentError

TANGENT_RTOL = 1e-10
ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class Factor:
    """One direct factor of a product Lie algebra: ``so3`` or ``abelian(n)``."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind == "so3":
            if self.dim != 3:
                raise InvalidInputError("so3 factor must have dimension 3")
        elif self.kind == "abelian":
            if self.dim < 1:
                raise InvalidInputError("abelian factor needs a positive dimension")
        else:
            raise InvalidInputError(f"unknown factor kind {self.kind!r}")

    def __str__(self) -> str:
        return "so3" if self.kind == "so3" else f"abelian({self.dim})"


SO3 = Factor("so3", 3)


def abelian(n: int) -> Factor:
    return Factor("abelian", int(n))


_FACTOR_RE = re.compile(r"^\s*(so3|abelian\((\d+)\))\s*$")


@dataclass(frozen=True)
class LieStructure:
    """An ordered direct product of so(3) and abelian factors."""

    factors: tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise InvalidInputError("a Lie structure needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))

    @classmethod
    def of(cls, *factors: Factor) -> "LieStructure":
        return cls(tuple(factors))

    @classmethod
    def parse(cls, text: str) -> "LieStructure":
        """Parse strings such as ``"so3 x abelian(3)"``."""
        parts = []
        for chunk in text.split("x"):
            m = _FACTOR_RE.match(chunk)
            if m is None:
                raise InvalidInputError(f"cannot parse factor {chunk!r}")
            parts.append(SO3 if m.group(1) == "so3" else abelian(int(m.group(2))))
        return cls(tuple(parts))

    def __str__(self) -> str:
        return " x ".join(str(f) for f in self.factors)

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def blocks(self) -> Iterator[tuple[Factor, slice]]:
        """Yield each factor together with its coordinate slice."""
        start = 0
        for f in self.factors:
            yield f, slice(start, start + f.dim)
            start += f.dim

    def so3_slices(self) -> list[slice]:
        return [sl for f, sl in self.blocks() if f.kind == "so3"]

    def abelian_slices(self) -> list[slice]:
        return [sl for f, sl in self.blocks() if f.kind == "abelian"]


class _Element:
    __slots__ = ("structure", "coords")

    def __init__(self, structure: LieStructure, coords):
        c = np.array(coords, dtype=float).reshape(-1)
        if c.shape[0] != structure.dim:
            raise InvalidInputError(
                f"expected {structure.dim} coordinates for {structure}, got {c.shape[0]}"
            )
        c.flags.writeable = False
        self.structure = structure
        self.coords = c

    @classmethod
    def zero(cls, structure: LieStructure):
        return cls(structure, np.zeros(structure.dim))

    def _check(self, other) -> None:
        if type(other) is not type(self):
            raise InvalidInputError(
                f"cannot combine {type(self).__name__} with {type(other).__name__}"
            )
        if other.structure != self.structure:
            raise InvalidInputError(
                f"structure mismatch: {self.structure} vs {other.structure}"
            )

    def __add__(self, other):
        self._check(other)
        return type(self)(self.structure, self.coords + other.coords)

    def __sub__(self, other):
        self._check(other)
        return type(self)(self.structure, self.coords - other.coords)

    def __neg__(self):
        return type(self)(self.structure, -self.coords)

    def __mul__(self, scalar: float):
        return type(self)(self.structure, float(scalar) * self.coords)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.structure}, {self.coords.tolist()})"

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def blocks(self) -> Iterator[tuple[Factor, np.ndarray]]:
        for f, sl in self.structure.blocks():
            yield f, self.coords[sl]


class AlgebraElement(_Element):
    """Element of a product Lie algebra in hat-map coordinates."""

    __slots__ = ()


class CoalgebraElement(_Element):
    """Element of the dual algebra; pairs with algebra elements by dot product."""

    __slots__ = ()

    def pair(self, xi: AlgebraElement) -> float:
        _same_structure(self, xi)
        return float(self.coords @ xi.coords)


def _same_structure(a: _Element, b: _Element) -> None:
    if a.structure != b.structure:
        raise InvalidInputError(f"structure mismatch: {a.structure} vs {b.structure}")


def hat(v) -> np.ndarray:
    """3-vector to skew-symmetric matrix, ``hat(a) @ b == a x b``."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m: np.ndarray) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def bracket(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Lie bracket, factor by factor: cross product on so(3), zero on abelian."""
    _same_structure(a, b)
    out = np.zeros(a.structure.dim)
    for sl in a.structure.so3_slices():
        out[sl] = np.cross(a.coords[sl], b.coords[sl])
    return AlgebraElement(a.structure, out)


def ad_star(xi: AlgebraElement, nu: CoalgebraElement) -> CoalgebraElement:
    """Infinitesimal coadjoint action ``ad*_xi nu`` (``nu x xi`` on so(3))."""
    _same_structure(xi, nu)
    out = np.zeros(nu.structure.dim)
    for sl in nu.structure.so3_slices():
        out[sl] = np.cross(nu.coords[sl], xi.coords[sl])
    return CoalgebraElement(nu.structure, out)


def solve_coadjoint_tangent(nu: CoalgebraElement, nudot: CoalgebraElement) -> AlgebraElement:
    """Minimal-norm ``eps`` with ``-ad*_eps nu == nudot``.

    On each so(3) factor this is ``(nu x nudot) / |nu|^2``; abelian factors
    get zero. Raises if ``nudot`` is not tangent to the orbit through ``nu``.
    """
    _same_structure(nu, nudot)
    out = np.zeros(nu.structure.dim)
    for f, sl in nu.structure.blocks():
        n, v = nu.coords[sl], nudot.coords[sl]
        vn = float(np.linalg.norm(v))
        if f.kind == "abelian":
            if vn > TANGENT_RTOL * max(1.0, float(np.linalg.norm(n))):
                raise InvalidTangentError("orbit tangent must vanish on abelian factors")
            continue
        nn2 = float(n @ n)
        if vn == 0.0:
            continue
        if nn2 == 0.0:
            raise DegenerateOrbitError("nonzero tangent requested at a point orbit (nu = 0)")
        if abs(float(n @ v)) > TANGENT_RTOL * np.sqrt(nn2) * vn:
            raise InvalidTangentError(
                f"vector is not tangent to the orbit: nu.nudot = {float(n @ v):.3e}"
            )
        out[sl] = np.cross(n, v) / nn2
    return AlgebraElement(nu.structure, out)


def orbit_tangent(nu: CoalgebraElement, eps: AlgebraElement) -> CoalgebraElement:
    """Tangent vector ``-ad*_eps nu`` generated by ``eps``."""
    return -ad_star(eps, nu)


def kks_form(nu: CoalgebraElement, v1: CoalgebraElement, v2: CoalgebraElement) -> float:
    """Orbit symplectic form ``<nu, [eps1, eps2]>`` with ``v_i = -ad*_{eps_i} nu``."""
    e1 = solve_coadjoint_tangent(nu, v1)
    e2 = solve_coadjoint_tangent(nu, v2)
    return nu.pair(bracket(e1, e2))


class GroupElement:
    """Element of a product of SO(3) and torus factors.

    ``parts`` holds a 3x3 rotation matrix for each so3 factor and an angle
    vector in [0, 2pi) for each abelian factor.
    """

    __slots__ = ("structure", "parts")

    def __init__(self, structure: LieStructure, parts, check: bool = True):
        parts = tuple(np.array(p, dtype=float) for p in parts)
        if len(parts) != len(structure.factors):
            raise InvalidInputError("one part per factor is required")
        fixed = []
        for f, p in zip(structure.factors, parts):
            if f.kind == "so3":
                if p.shape != (3, 3):
                    raise InvalidInputError("so3 parts must be 3x3 matrices")
                if check:
                    if np.max(np.abs(p.T @ p - np.eye(3))) > ORTHO_TOL or abs(
                        np.linalg.det(p) - 1.0
                    ) > ORTHO_TOL:
                        raise InvalidInputError("so3 part is not a rotation matrix")
            else:
                p = np.mod(p.reshape(-1), 2.0 * np.pi)
                if p.shape != (f.dim,):
                    raise InvalidInputError(f"abelian part needs {f.dim} angles")
            p.flags.writeable = False
            fixed.append(p)
        self.structure = structure
        self.parts = tuple(fixed)

    @classmethod
    def identity(cls, structure: LieStructure) -> "GroupElement":
        return cls(
            structure,
            [np.eye(3) if f.kind == "so3" else np.zeros(f.dim) for f in structure.factors],
        )

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if other.structure != self.structure:
            raise InvalidInputError("structure mismatch")
        parts = [
            a @ b if f.kind == "so3" else a + b
            for f, a, b in zip(self.structure.factors, self.parts, other.parts)
        ]
        return GroupElement(self.structure, parts, check=False)

    def inverse(self) -> "GroupElement":
        parts = [
            p.T if f.kind == "so3" else -p for f, p in zip(self.structure.factors, self.parts)
        ]
        return GroupElement(self.structure, parts, check=False)

    def rotation(self, index: int = 0) -> np.ndarray:
        """The ``index``-th SO(3) part."""
        rots = [p for f, p in zip(self.structure.factors, self.parts) if f.kind == "so3"]
        return rots[index]

    def __repr__(self) -> str:
        return f"GroupElement({self.structure})"


def Ad(g: GroupElement, xi: AlgebraElement) -> AlgebraElement:
    """Adjoint action; ``R xi`` on so(3), identity on abelian factors."""
    _same_structure(g, xi)
    out = xi.coords.copy()
    for (f, sl), p in zip(g.structure.blocks(), g.parts):
        if f.kind == "so3":
            out[sl] = p @ xi.coords[sl]
    return AlgebraElement(xi.structure, out)


def Ad_star_inv(g: GroupElement, nu: CoalgebraElement) -> CoalgebraElement:
    """Coadjoint action ``Ad*_{g^-1} nu``; ``R nu`` on so(3) coordinates."""
    _same_structure(g, nu)
    out = nu.coords.copy()
    for (f, sl), p in zip(g.structure.blocks(), g.parts):
        if f.kind == "so3":
            out[sl] = p @ nu.coords[sl]
    return CoalgebraElement(nu.structure, out)


def rodrigues(w) -> np.ndarray:
    """Rotation matrix ``exp(hat(w))``."""
    w = np.asarray(w, dtype=float)
    theta = float(np.linalg.norm(w))
    K = hat(w)
    if theta < 1e-8:
        # Taylor terms keep the small-angle branch accurate to machine precision.
        a = 1.0 - theta**2 / 6.0
        b = 0.5 - theta**2 / 24.0
    else:
        a = np.sin(theta) / theta
        # Half-angle form avoids cancellation in 1 - cos(theta).
        b = 2.0 * np.sin(0.5 * theta) ** 2 / theta**2
    return np.eye(3) + a * K + b * (K @ K)


def exp_so3(xi: AlgebraElement) -> GroupElement:
    """Group exponential: Rodrigues on so(3) factors, angles mod 2pi on tori."""
    parts = [rodrigues(c) if f.kind == "so3" else c for f, c in xi.blocks()]
    return GroupElement(xi.structure, parts, check=False)


def left_jacobian(w) -> np.ndarray:
    """``J`` with ``(d/ds exp(w + s v)) exp(w)^-1 = hat(J v)`` at s = 0."""
    w = np.asarray(w, dtype=float)
    theta = float(np.linalg.norm(w))
    K = hat(w)
    t2 = theta**2
    a = 2.0 * np.sin(0.5 * theta) ** 2 / t2 if theta > 0 else 0.5
    if theta < 1e-2:
        # theta - sin(theta) cancels badly here; the series is exact to roundoff.
        b = 1.0 / 6.0 - t2 / 120.0 + t2**2 / 5040.0 - t2**3 / 362880.0
    else:
        b = (theta - np.sin(theta)) / theta**3
    return np.eye(3) + a * K + b * (K @ K)


def orthonormalize(R: np.ndarray) -> np.ndarray:
    """Closest rotation matrix (polar factor) to ``R``."""
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0:
        U[:, -1] = -U[:, -1]
        Q = U @ Vt
    return Q
