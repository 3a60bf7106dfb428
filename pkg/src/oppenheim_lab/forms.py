"""Determinant-normalized indefinite ternary quadratic forms and the SL(3,R) action.

A form is the map v -> v S v^T on row 3-vectors, S symmetric.  The base form

    Q0(x, y, z) = x^2 + y^2 - z^2

has matrix diag(1, 1, -1); every determinant-one indefinite ternary form arises
as Q0 transported by some g in SL(3,R) via Q^g(v) = Q0(v g), whose matrix is
g S g^T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WrongSignature, ZeroDeterminant

DET_TOL = 1e-9          # tolerance chosen so ~100 chained products stay valid
_EIG_DEGENERATE = 1e-10  # eigenvalues below this count as degenerate


def q0_eval(v) -> float | np.ndarray:
    """x^2 + y^2 - z^2 at a 3-vector, or at each row of an (m,3) array."""
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        return float(v[0] * v[0] + v[1] * v[1] - v[2] * v[2])
    return v[:, 0] ** 2 + v[:, 1] ** 2 - v[:, 2] ** 2


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A real 3x3 matrix of determinant one.

    Rows double as a lattice basis: the lattice is {n @ m : n in Z^3}.
    """

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
        d = np.linalg.det(m)
        if abs(d - 1.0) > DET_TOL:
            raise ValueError(f"determinant {d!r} is not 1 within {DET_TOL}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(np.eye(3))

    def hs_norm(self) -> float:
        """Hilbert-Schmidt norm  sqrt(tr(m^T m))."""
        return float(np.sqrt((self.m * self.m).sum()))

    def inv(self) -> "GroupElement":
        return GroupElement(np.linalg.inv(self.m))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.m @ other.m)


@dataclass(frozen=True)
class TernaryForm:
    """Symmetric coefficient matrix stored as its 6 upper-triangle entries.

    Storage order is (s11, s12, s13, s22, s23, s33), so symmetry is exact by
    construction.  Valid instances are indefinite of signature (2,1) with
    |det S| = 1; `normalize` is the checked constructor.
    """

    upper: tuple

    @classmethod
    def from_matrix(cls, s: np.ndarray) -> "TernaryForm":
        s = np.asarray(s, dtype=float)
        # average the off-diagonal pairs so mild float asymmetry cannot leak in
        return cls((s[0, 0], (s[0, 1] + s[1, 0]) / 2, (s[0, 2] + s[2, 0]) / 2,
                    s[1, 1], (s[1, 2] + s[2, 1]) / 2, s[2, 2]))

    @property
    def matrix(self) -> np.ndarray:
        s11, s12, s13, s22, s23, s33 = self.upper
        return np.array([[s11, s12, s13], [s12, s22, s23], [s13, s23, s33]])

    def value(self, n) -> float | np.ndarray:
        """The form value v S v^T at a 3-vector (or rows of an (m,3) array)."""
        v = np.asarray(n, dtype=float)
        if v.ndim == 1:
            return float(v @ self.matrix @ v)
        return np.einsum("ij,jk,ik->i", v, self.matrix, v)

    def to_json(self) -> list:
        return [float(x) for x in self.upper]

    @classmethod
    def from_json(cls, entries) -> "TernaryForm":
        if len(entries) != 6:
            raise ValueError("expected 6 upper-triangle entries")
        return cls(tuple(float(x) for x in entries))


Q0 = TernaryForm((1.0, 0.0, 0.0, 1.0, 0.0, -1.0))


def signature(s: np.ndarray) -> tuple[int, int]:
    """(positive, negative) eigenvalue counts of a symmetric 3x3 matrix.

    Raises WrongSignature when an eigenvalue is too close to zero to call.
    """
    eig = np.linalg.eigvalsh(np.asarray(s, dtype=float))
    if np.any(np.abs(eig) < _EIG_DEGENERATE):
        raise WrongSignature(f"degenerate eigenvalue in {eig}")
    return int((eig > 0).sum()), int((eig < 0).sum())


def normalize(s: np.ndarray) -> TernaryForm:
    """Scale a symmetric matrix to |det| = 1 and validate signature (2,1)."""
    s = np.asarray(s, dtype=float)
    d = np.linalg.det(s)
    if abs(d) < 1e-12:
        raise ZeroDeterminant(f"|det| = {abs(d)!r} below 1e-12")
    pos, neg = signature(s)
    if (pos, neg) != (2, 1):
        raise WrongSignature(f"signature ({pos},{neg}), need (2,1)")
    return TernaryForm.from_matrix(s / np.cbrt(abs(d)))


def act(q: TernaryForm, g: GroupElement) -> TernaryForm:
    """Transport a form: the result has matrix g S g^T, so value(n) = q(n @ g)."""
    return TernaryForm.from_matrix(g.m @ q.matrix @ g.m.T)
