"""Integer search for form values and lattice points in boxes.

Core problem: minimize |Q(n) - xi| over integer 3-vectors with ||n|| <= k.
`brute_min` is the O(k^3) oracle; `fiber_min` gets the identical answer in
O(k^2) by treating each (n1, n2) fiber as a quadratic in n3 and inspecting
only the integers adjacent to its roots, its vertex, and the range ends.

Both paths evaluate the fiber polynomial with the same Horner expression, so
their results agree bit for bit, including the deterministic tie-break
(lexicographically smallest vector).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import EmptySearch, IllConditioned
from .forms import GroupElement, TernaryForm

COND_LIMIT = 1e8
_SCAN_LIMIT = 20_000_000  # candidate grid cap for points_in_box


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box [lo1,hi1] x [lo2,hi2] x [lo3,hi3]."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lo)
        hi = tuple(float(x) for x in self.hi)
        if len(lo) != 3 or len(hi) != 3:
            raise ValueError("need 3 bounds per side")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"empty box: lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def corners(self) -> np.ndarray:
        return np.array([[p[0], p[1], p[2]]
                         for p in product(*zip(self.lo, self.hi))], dtype=float)

    def volume(self) -> float:
        return float(np.prod([b - a for a, b in zip(self.lo, self.hi)]))

    def contains(self, pts) -> np.ndarray | bool:
        pts = np.asarray(pts, dtype=float)
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        if pts.ndim == 1:
            return bool(((pts >= lo) & (pts <= hi)).all())
        return ((pts >= lo) & (pts <= hi)).all(axis=1)


@dataclass(frozen=True)
class ApproxRecord:
    """Best approximation found: ||best_n|| <= k and best_err = |Q(best_n) - xi|."""

    k: float
    xi: float
    best_n: tuple
    best_err: float
    evaluated: int

    def csv_row(self) -> str:
        n1, n2, n3 = self.best_n
        return (f"{self.k:.17g},{self.xi:.17g},{n1},{n2},{n3},"
                f"{self.best_err:.17g},{self.evaluated}")


def _fiber_coeffs(upper, n1, n2):
    """Coefficients of z -> Q(n1, n2, z) = A z^2 + B z + C.

    One shared expression so every caller produces identical floats.
    """
    s11, s12, s13, s22, s23, s33 = upper
    b = 2.0 * (s13 * n1 + s23 * n2)
    c = s11 * (n1 * n1) + 2.0 * s12 * n1 * n2 + s22 * (n2 * n2)
    return s33, b, c


def _fiber_eval(a, b, c, z):
    """Horner evaluation (a*z + b)*z + c; z may be an array."""
    return (a * z + b) * z + c


def _axis_bound(k: float) -> int:
    """Largest integer K with K <= k."""
    return int(math.floor(k))


def _z_limit(limit: float, m) -> int:
    """Largest z >= 0 with m + z^2 <= limit, or -1 when none exists."""
    rem = limit - m
    if rem < 0:
        return -1
    z = int(math.sqrt(rem))
    while (z + 1) * (z + 1) <= rem:
        z += 1
    while z * z > rem:
        z -= 1
    return z


def _z_limit_vec(limit: float, m: np.ndarray) -> np.ndarray:
    rem = limit - m
    z = np.floor(np.sqrt(np.maximum(rem, 0.0))).astype(np.int64)
    z = np.where((z + 1) * (z + 1) <= rem, z + 1, z)
    z = np.where(z * z > rem, z - 1, z)  # also sends rem < 0 rows to -1
    return z


def brute_min(q: TernaryForm, xi: float, k: float, exclude_zero: bool = False,
              norm: str = "euclidean") -> ApproxRecord:
    """Exact minimum of |Q(n) - xi| over ||n|| <= k by full scan.

    Ties resolve to the lexicographically smallest vector.  The zero vector is
    skipped when exclude_zero is set; EmptySearch when nothing remains.
    """
    if norm not in ("euclidean", "sup"):
        raise ValueError(f"unknown norm {norm!r}")
    kk = _axis_bound(k)
    limit = k * k
    best = None
    evaluated = 0
    for n1 in range(-kk, kk + 1):
        m1 = n1 * n1
        n2_hi = kk if norm == "sup" else _z_limit(limit, m1)
        for n2 in range(-n2_hi, n2_hi + 1):
            z_hi = kk if norm == "sup" else _z_limit(limit, m1 + n2 * n2)
            if z_hi < 0:
                continue
            a, b, c = _fiber_coeffs(q.upper, n1, n2)
            z = np.arange(-z_hi, z_hi + 1)
            err = np.abs(_fiber_eval(a, b, c, z.astype(float)) - xi)
            if exclude_zero and n1 == 0 and n2 == 0:
                err[z_hi] = np.inf  # index of z = 0
                evaluated += err.size - 1
            else:
                evaluated += err.size
            i = int(np.argmin(err))
            cand = (float(err[i]), n1, n2, int(z[i]))
            if math.isinf(cand[0]):
                continue
            if best is None or cand[0] < best[0]:
                best = cand
    if best is None:
        raise EmptySearch(f"no integer vector with norm <= {k}"
                          + (" excluding zero" if exclude_zero else ""))
    return ApproxRecord(k, xi, (best[1], best[2], best[3]), best[0], evaluated)


def fiber_min(q: TernaryForm, xi: float, k: float, exclude_zero: bool = False,
              norm: str = "euclidean") -> ApproxRecord:
    """Same contract as brute_min in O(k^2) candidate evaluations.

    Per fiber the inspected integers are the floors/ceilings of the real roots
    of Q(n1,n2,z) = xi, the integers beside the parabola vertex, and the range
    endpoints; every integer local minimum of |Q - xi| is among them.
    """
    if norm not in ("euclidean", "sup"):
        raise ValueError(f"unknown norm {norm!r}")
    kk = _axis_bound(k)
    limit = k * k
    s33 = q.upper[5]
    best = None
    evaluated = 0
    for n1 in range(-kk, kk + 1):
        m1 = n1 * n1
        n2_hi = kk if norm == "sup" else _z_limit(limit, m1)
        if n2_hi < 0:
            continue
        n2 = np.arange(-n2_hi, n2_hi + 1)
        if norm == "sup":
            zmax = np.full(n2.shape, kk, dtype=np.int64)
        else:
            zmax = _z_limit_vec(limit, m1 + n2 * n2)
            keep = zmax >= 0
            n2, zmax = n2[keep], zmax[keep]
        if n2.size == 0:
            continue
        a, b, c = _fiber_coeffs(q.upper, n1, n2)
        with np.errstate(all="ignore"):
            if s33 != 0.0:
                disc = b * b - 4.0 * a * (c - xi)
                sq = np.sqrt(np.maximum(disc, 0.0))
                r1 = (-b - sq) / (2.0 * a)
                r2 = (-b + sq) / (2.0 * a)
                zv = -b / (2.0 * a)
                cols = [np.floor(r1), np.ceil(r1), np.floor(r2), np.ceil(r2),
                        np.floor(zv), np.ceil(zv)]
            else:
                r = np.where(b != 0.0, (xi - c) / np.where(b != 0.0, b, 1.0), 0.0)
                cols = [np.floor(r), np.ceil(r)]
        cand = np.stack(cols + [-zmax.astype(float), zmax.astype(float)], axis=1)
        cand = np.where(np.isfinite(cand), cand, 0.0)
        cand = np.clip(cand, -zmax[:, None], zmax[:, None])
        z = cand.astype(np.int64)
        zf = z.astype(float)
        err = np.abs(_fiber_eval(a, b[:, None], c[:, None], zf) - xi)
        masked = 0
        if exclude_zero and n1 == 0:
            zero_rows = n2 == 0
            zero_mask = zero_rows[:, None] & (z == 0)
            masked = int(zero_mask.sum())
            err[zero_mask] = np.inf
        evaluated += err.size - masked
        emin = float(err.min())
        if math.isinf(emin):
            continue
        if best is None or emin <= best[0]:
            ii, jj = np.nonzero(err == emin)
            key = min(zip(n2[ii].tolist(), z[ii, jj].tolist()))
            cand_best = (emin, n1, key[0], key[1])
            if best is None or cand_best[0] < best[0]:
                best = cand_best
    if best is None:
        raise EmptySearch(f"no integer vector with norm <= {k}"
                          + (" excluding zero" if exclude_zero else ""))
    return ApproxRecord(k, xi, (best[1], best[2], best[3]), best[0], evaluated)


# ---------------------------------------------------------------------------
# lattice points in boxes
# ---------------------------------------------------------------------------

def _lll_reduce(mat: np.ndarray, delta: float = 0.75) -> np.ndarray:
    """Unimodular U (int64) such that U @ mat is LLL-reduced.

    Standard Lovasz condition on the rows; 3x3 only, so the Gram-Schmidt data
    is recomputed from scratch at each step.
    """
    b = np.array(mat, dtype=float)
    u = np.eye(3, dtype=np.int64)

    def gram():
        bstar = b.copy()
        mu = np.zeros((3, 3))
        for i in range(3):
            for j in range(i):
                nj = bstar[j] @ bstar[j]
                mu[i, j] = (b[i] @ bstar[j]) / nj if nj > 0 else 0.0
                bstar[i] = bstar[i] - mu[i, j] * bstar[j]
        norms = (bstar * bstar).sum(axis=1)
        return mu, norms

    k = 1
    for _ in range(10_000):  # bound is generous; 3x3 terminates in a handful
        if k >= 3:
            break
        mu, norms = gram()
        for j in range(k - 1, -1, -1):
            r = round(mu[k, j])
            if r != 0:
                b[k] -= r * b[j]
                u[k] -= r * u[j]
                mu, norms = gram()
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[[k - 1, k]] = b[[k, k - 1]]
            u[[k - 1, k]] = u[[k, k - 1]]
            k = max(k - 1, 1)
    return u


def points_in_box(basis: GroupElement | np.ndarray, box: Box) -> np.ndarray:
    """All n in Z^3 with n @ basis inside the closed box, lexicographically sorted.

    The basis rows are first reduced by a unimodular transform (pure change of
    enumeration variable; the returned set is unchanged).  Candidates come
    from mapping the box corners through the reduced inverse and scanning the
    integer bounding box; membership is then tested against the original
    basis.
    """
    bmat = basis.m if isinstance(basis, GroupElement) else np.asarray(basis, dtype=float)
    cond = np.linalg.cond(bmat)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditioned(f"condition number {cond:.3g} exceeds {COND_LIMIT:.0e}")
    u = _lll_reduce(bmat)
    red = u.astype(float) @ bmat
    pre = box.corners() @ np.linalg.inv(red)
    lo = np.floor(pre.min(axis=0)).astype(np.int64) - 1
    hi = np.ceil(pre.max(axis=0)).astype(np.int64) + 1
    total = int(np.prod(hi - lo + 1))
    if total > _SCAN_LIMIT:
        raise IllConditioned(f"candidate scan of {total} points; basis too skew")
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    g0, g1, g2 = np.meshgrid(*axes, indexing="ij")
    m = np.column_stack([g0.ravel(), g1.ravel(), g2.ravel()])
    n = m @ u
    pts = n @ bmat
    blo = np.array(box.lo)
    bhi = np.array(box.hi)
    inside = ((pts >= blo) & (pts <= bhi)).all(axis=1)
    n = n[inside]
    order = np.lexsort((n[:, 2], n[:, 1], n[:, 0]))
    return n[order]


# ---------------------------------------------------------------------------
# all form values in a window (backs schedule experiments)
# ---------------------------------------------------------------------------

def _expand_ranges(starts: np.ndarray, stops: np.ndarray, row: np.ndarray):
    """Expand inclusive integer ranges [starts, stops] into flat z and row indices."""
    lens = stops - starts + 1
    keep = lens > 0
    if not keep.any():
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    s, l, r = starts[keep], lens[keep], row[keep]
    ends = np.cumsum(l)
    z = np.arange(ends[-1]) - np.repeat(ends - l, l) + np.repeat(s, l)
    return z, np.repeat(r, l)


def values_in_window(q: TernaryForm, radius: float, lo: float, hi: float,
                     norm: str = "euclidean") -> np.ndarray:
    """Sorted array of form values Q(n) in [lo, hi] over ||n|| <= radius.

    The set of evaluated lattice points is a superset of those whose value
    lies in the window (interval bounds are padded by one integer), and every
    value is computed with the same Horner expression as fiber_min, so nearest-
    value distances taken from this array match fiber_min results exactly.
    """
    if norm not in ("euclidean", "sup"):
        raise ValueError(f"unknown norm {norm!r}")
    if lo > hi:
        raise ValueError("window is empty")
    kk = _axis_bound(radius)
    limit = radius * radius
    s33 = q.upper[5]
    chunks = []
    for n1 in range(-kk, kk + 1):
        m1 = n1 * n1
        n2_hi = kk if norm == "sup" else _z_limit(limit, m1)
        if n2_hi < 0:
            continue
        n2 = np.arange(-n2_hi, n2_hi + 1)
        if norm == "sup":
            zmax = np.full(n2.shape, kk, dtype=np.int64)
        else:
            zmax = _z_limit_vec(limit, m1 + n2 * n2)
            keep = zmax >= 0
            n2, zmax = n2[keep], zmax[keep]
        if n2.size == 0:
            continue
        a, b, c = _fiber_coeffs(q.upper, n1, n2)
        row = np.arange(n2.size)
        if s33 != 0.0:
            aa, bb, cc, wlo, whi = (a, b, c, lo, hi) if s33 > 0 else (-a, -b, -c, -hi, -lo)
            disc_hi = bb * bb - 4.0 * aa * (cc - whi)
            have = disc_hi >= 0
            if not have.any():
                continue
            sq_hi = np.sqrt(np.maximum(disc_hi, 0.0))
            h1 = (-bb - sq_hi) / (2.0 * aa)
            h2 = (-bb + sq_hi) / (2.0 * aa)
            disc_lo = bb * bb - 4.0 * aa * (cc - wlo)
            carve = disc_lo >= 0
            sq_lo = np.sqrt(np.maximum(disc_lo, 0.0))
            l1 = (-bb - sq_lo) / (2.0 * aa)
            l2 = (-bb + sq_lo) / (2.0 * aa)
            # pieces [h1, l1] and [l2, h2]; without lo-roots, just [h1, h2]
            p1s, p1e = h1, np.where(carve, l1, h2)
            p2s, p2e = np.where(carve, l2, 1.0), np.where(carve, h2, 0.0)
            zs, zr = [], []
            for ps, pe in ((p1s, p1e), (p2s, p2e)):
                starts = np.ceil(ps).astype(np.int64) - 1
                stops = np.floor(pe).astype(np.int64) + 1
                starts = np.where(have, np.maximum(starts, -zmax), 1)
                stops = np.where(have, np.minimum(stops, zmax), 0)
                z, r = _expand_ranges(starts, stops, row)
                zs.append(z)
                zr.append(r)
            z = np.concatenate(zs)
            r = np.concatenate(zr)
        else:
            bz = b != 0.0
            bsafe = np.where(bz, b, 1.0)
            e1 = (lo - c) / bsafe
            e2 = (hi - c) / bsafe
            ps, pe = np.minimum(e1, e2), np.maximum(e1, e2)
            starts = np.maximum(np.ceil(ps).astype(np.int64) - 1, -zmax)
            stops = np.minimum(np.floor(pe).astype(np.int64) + 1, zmax)
            # constant fibers contribute their single value once
            const_in = (~bz) & (c >= lo) & (c <= hi)
            starts = np.where(bz, starts, np.where(const_in, 0, 1))
            stops = np.where(bz, stops, np.where(const_in, 0, 0))
            z, r = _expand_ranges(starts, stops, row)
        if z.size:
            chunks.append(_fiber_eval(a, b[r], c[r], z.astype(float)))
    if not chunks:
        return np.empty(0)
    return np.sort(np.concatenate(chunks))
