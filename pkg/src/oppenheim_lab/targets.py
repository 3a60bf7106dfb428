"""Shrinking target regions around the level set Q0 = xi.

For thickness delta in (0,1) and target value xi, with L = max(1, sqrt|xi|),
the region is

    Omega = { (x,y,z) : |x| <= L, |y| <= L, |sqrt(|x^2+y^2-xi|) - z| <= delta/(2L) }

applied literally, inner absolute value included, with closed inequalities.
The z-slab has constant thickness delta/L over the full (x,y) square, so the
volume is exactly 4 delta L.

Caveat kept deliberately visible: on the part of the square where
x^2 + y^2 < xi the inner absolute value places the slab around a sheet that
is NOT the level set, and members there have |Q0(v) - xi| as large as about
2|xi|.  Where x^2 + y^2 >= xi, membership does imply
|Q0(v) - xi| <= sqrt(3) delta + delta^2/4 < 2 delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .enumeration import Box, points_in_box
from .errors import BadDelta
from .forms import GroupElement, q0_eval


@dataclass(frozen=True)
class TargetRegion:
    """The region above; L is derived, never stored."""

    xi: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise BadDelta(f"delta = {self.delta!r} outside (0,1)")

    @property
    def width(self) -> float:
        """L = max(1, sqrt|xi|)."""
        return max(1.0, math.sqrt(abs(self.xi)))

    def volume(self) -> float:
        return 4.0 * self.delta * self.width

    def contains(self, v) -> bool | np.ndarray:
        """Literal evaluation of the three defining inequalities."""
        v = np.asarray(v, dtype=float)
        single = v.ndim == 1
        pts = v.reshape(1, 3) if single else v
        el = self.width
        half = self.delta / (2.0 * el)
        s = np.sqrt(np.abs(pts[:, 0] ** 2 + pts[:, 1] ** 2 - self.xi))
        ok = ((np.abs(pts[:, 0]) <= el) & (np.abs(pts[:, 1]) <= el)
              & (np.abs(s - pts[:, 2]) <= half))
        return bool(ok[0]) if single else ok

    def bounding_box(self) -> Box:
        """Tightest axis box: z runs over [-delta/2L, sqrt(2L^2+|xi|) + delta/2L]."""
        el = self.width
        half = self.delta / (2.0 * el)
        z_top = math.sqrt(2.0 * el * el + abs(self.xi)) + half
        return Box((-el, -el, -half), (el, el, z_top))

    def to_json(self) -> dict:
        return {"xi": self.xi, "delta": self.delta}


def make_region(xi: float, delta: float) -> TargetRegion:
    return TargetRegion(float(xi), float(delta))


def lattice_hits(basis: GroupElement | np.ndarray, region: TargetRegion):
    """Lexicographically smallest n with n @ basis in the region, else None."""
    pts = points_in_box(basis, region.bounding_box())
    if pts.size == 0:
        return None
    bmat = basis.m if isinstance(basis, GroupElement) else np.asarray(basis, dtype=float)
    mask = region.contains(pts @ bmat)
    if not mask.any():
        return None
    return pts[mask][0]  # points_in_box output is lex sorted


def sample_region(region: TargetRegion, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples from the region itself (x, y uniform; z offset uniform in the slab)."""
    el = region.width
    half = region.delta / (2.0 * el)
    x = rng.uniform(-el, el, size=count)
    y = rng.uniform(-el, el, size=count)
    s = np.sqrt(np.abs(x * x + y * y - region.xi))
    z = s + rng.uniform(-half, half, size=count)
    return np.column_stack([x, y, z])


def mc_volume(region: TargetRegion, samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Rejection estimate of the volume from the bounding box, with standard error."""
    box = region.bounding_box()
    lo = np.array(box.lo)
    hi = np.array(box.hi)
    pts = lo + rng.random((samples, 3)) * (hi - lo)
    hit = region.contains(pts).astype(float)
    bv = box.volume()
    return bv * float(hit.mean()), bv * float(hit.std(ddof=1) / math.sqrt(samples))


def value_bound_report(region: TargetRegion, samples: int, rng: np.random.Generator) -> dict:
    """Worst |Q0(v) - xi| over sampled members, split by which sheet they sit on.

    The outer sheet (x^2 + y^2 >= xi) obeys the 2*delta bound; the inner sheet,
    when present, does not, and its worst case grows like 2|xi|.
    """
    pts = sample_region(region, samples, rng)
    err = np.abs(q0_eval(pts) - region.xi)
    outer = pts[:, 0] ** 2 + pts[:, 1] ** 2 >= region.xi
    return {
        "xi": region.xi,
        "delta": region.delta,
        "samples": samples,
        "worst": float(err.max()),
        "worst_outer_sheet": float(err[outer].max()) if outer.any() else 0.0,
        "worst_inner_sheet": float(err[~outer].max()) if (~outer).any() else 0.0,
        "inner_sheet_fraction": float((~outer).mean()),
    }
