"""Random forms, orbit averages over expanding balls, and lattice second moments.

Integrals over the space of unimodular lattices are estimated by the averaging
operator itself: pick base points, push them around by Haar-ball samples from
the SL(2,R) action, and average the integrand over the translated lattices.
Base-point diversity stands in for Haar sampling of the quotient; the order of
magnitude of the ball radius controls how well the averages have equidistributed.

The second moment of the lattice point count admits a closed form:

    integral of fhat^2  =  (integral of f)^2  +  sum over coprime pairs (p,q)
                           of  integral f(p x) f(q x) dx

with fhat the count of nonzero lattice points in supp(f).  The exact index set
of the coprime-pair sum is treated as an experimental unknown; see
`second_moment_experiment`, which reports the convention matching the orbit
estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import gcd
from typing import Callable

import numpy as np
from scipy.special import zeta

from .enumeration import Box, points_in_box
from .errors import BadBox, BallEmpty
from .forms import Q0, GroupElement, TernaryForm, act
from .parallel import chunked_map, rng_for, stream_rng, uniform_block
from .spin import SQRT3, _ball_transform, _iota_matrix
from .targets import TargetRegion, lattice_hits

_BASE_STREAM = 10_000  # stream ids: base points live here, orbit samples at (j, i)

CONVENTIONS = ("include_11", "exclude_11", "all_sign_pairs")


@dataclass(frozen=True)
class OrbitAverageEstimate:
    """Monte Carlo ball average of an observable from one base point."""

    value: float
    std_err: float
    samples: int
    t: float

    def to_json(self) -> dict:
        return {"value": self.value, "std_err": self.std_err,
                "samples": self.samples, "t": self.t}


@dataclass(frozen=True)
class Indicator:
    """Indicator of a bounded region: a bounding box plus a vectorized membership test."""

    box: Box
    member: Callable[[np.ndarray], np.ndarray]


def box_indicator(box: Box) -> Indicator:
    return Indicator(box, box.contains)


def ball_indicator(radius: float) -> Indicator:
    box = Box((-radius,) * 3, (radius,) * 3)
    return Indicator(box, lambda pts: (np.asarray(pts) ** 2).sum(axis=1) <= radius * radius)


def random_form(rng: np.random.Generator) -> tuple[GroupElement, TernaryForm]:
    """An absolutely continuous random (transporter, form) pair.

    Gaussian 3x3 entries, redrawn until det > 0.1, then scaled to determinant
    one.  The law is absolutely continuous on SL(3,R), enough to realize
    "almost every form"; it is NOT the Haar probability on the lattice space.
    """
    while True:
        m = rng.normal(size=(3, 3))
        d = np.linalg.det(m)
        if d > 0.1:
            g = GroupElement(m / np.cbrt(d))
            return g, act(Q0, g)


def orbit_values(x: GroupElement | np.ndarray, f: Callable[[np.ndarray], float],
                 t: float, samples: int, seed: int, stream: int = 0,
                 threads: int = 1) -> np.ndarray:
    """Per-sample values f(x * iota(h)) for Haar-ball h; deterministic in (seed, stream)."""
    if t <= SQRT3:
        raise BallEmpty(f"ball radius {t} <= sqrt(3)")
    base = x.m if isinstance(x, GroupElement) else np.asarray(x, dtype=float)

    def block(lo: int, hi: int) -> np.ndarray:
        u = uniform_block(seed, stream, lo, hi, 3)
        hs = _ball_transform(t, u)
        out = np.empty(hi - lo)
        for i in range(hi - lo):
            out[i] = f(base @ _iota_matrix(hs[i]))
        return out

    return chunked_map(block, samples, threads)


def orbit_average(x: GroupElement | np.ndarray, f: Callable[[np.ndarray], float],
                  t: float, samples: int, seed: int, stream: int = 0,
                  threads: int = 1) -> OrbitAverageEstimate:
    """Ball average of f along the orbit of x; std_err is sample std / sqrt(n)."""
    if samples < 2:
        raise ValueError("need at least 2 samples for a standard error")
    vals = orbit_values(x, f, t, samples, seed, stream, threads)
    return OrbitAverageEstimate(float(vals.mean()),
                                float(vals.std(ddof=1) / math.sqrt(samples)),
                                samples, t)


def siegel_transform(indicator: Indicator, basis: GroupElement | np.ndarray) -> int:
    """Number of nonzero lattice points n @ basis inside the indicator's region."""
    pts = points_in_box(basis, indicator.box)
    if pts.size == 0:
        return 0
    bmat = basis.m if isinstance(basis, GroupElement) else np.asarray(basis, dtype=float)
    inside = indicator.member(pts @ bmat)
    nonzero = (pts != 0).any(axis=1)
    return int((inside & nonzero).sum())


# ---------------------------------------------------------------------------
# coprime-pair second moment
# ---------------------------------------------------------------------------

def _overlap_volume(box: Box, p: int, q: int) -> float:
    """vol((1/p) box intersect (1/q) box) for p, q >= 1 and a positive-octant box."""
    acc = 1.0
    for a, b in zip(box.lo, box.hi):
        length = min(b / p, b / q) - max(a / p, a / q)
        if length <= 0.0:
            return 0.0
        acc *= length
    return acc


def rogers_rhs(box: Box, p_max: int = 64, convention: str = "include_11") -> tuple[float, float]:
    """(partial sum, tail bound) of the second-moment identity's right side.

    partial = vol(box)^2 + sum over coprime pairs with max(p,q) <= p_max of the
    rescaled-box overlap volume.  Opposite-sign pairs contribute nothing for a
    positive-octant box; `all_sign_pairs` counts each (p,q) together with
    (-p,-q) and so doubles the same-sign sum.  The tail bound is the crude
    chain estimate 4 vol(box) * sum_{p > p_max} p^-2.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    if p_max < 2:
        raise ValueError("p_max must be at least 2")
    if any(a < 0 for a in box.lo):
        raise BadBox(f"box lo {box.lo} leaves the positive octant")
    vol = box.volume()
    if vol <= 0:
        raise BadBox("box has zero volume")
    total = 0.0
    for p in range(1, p_max + 1):
        for q in range(1, p_max + 1):
            if gcd(p, q) != 1:
                continue
            if convention == "exclude_11" and p == 1 and q == 1:
                continue
            total += _overlap_volume(box, p, q)
    if convention == "all_sign_pairs":
        total *= 2.0
    tail = 4.0 * vol * float(zeta(2, p_max + 1))
    if convention == "all_sign_pairs":
        tail *= 2.0
    return vol * vol + total, tail


def _pooled(per_point: list[float]) -> tuple[float, float]:
    arr = np.array(per_point)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr)))


def base_points(seed: int, count: int) -> list[tuple[GroupElement, TernaryForm]]:
    """Deterministic absolutely continuous base points for orbit averaging."""
    return [random_form(stream_rng(seed, _BASE_STREAM + j)) for j in range(count)]


@dataclass(frozen=True)
class SecondMomentReport:
    estimate: float
    std_err: float
    samples: int
    t: float
    base_points: int
    convention: str | None
    rhs: dict
    per_point: tuple
    volume: float

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "std_err": self.std_err,
                "samples": self.samples, "t": self.t,
                "base_points": self.base_points, "convention": self.convention,
                "rhs": self.rhs, "per_point": list(self.per_point),
                "volume": self.volume}


def second_moment_experiment(box: Box, t: float, samples: int, n_base: int,
                             seed: int, p_max: int = 64,
                             threads: int = 1) -> SecondMomentReport:
    """Orbit estimate of the mean squared lattice count against each pair convention.

    The matched convention is the one whose partial sum lies within
    3 * std_err + tail of the estimate (closest first); None when no
    convention qualifies.
    """
    ind = box_indicator(box)

    def f(basis: np.ndarray) -> float:
        c = siegel_transform(ind, basis)
        return float(c * c)

    per = []
    for j, (g, _q) in enumerate(base_points(seed, n_base)):
        per.append(orbit_average(g, f, t, samples, seed, stream=j, threads=threads).value)
    estimate, std_err = _pooled(per)
    rhs = {}
    for name in CONVENTIONS:
        partial, tail = rogers_rhs(box, p_max, name)
        rhs[name] = {"partial": partial, "tail": tail}
    matched = None
    best_gap = np.inf
    for name, item in rhs.items():
        gap = abs(estimate - item["partial"])
        if gap <= 3 * std_err + item["tail"] and gap < best_gap:
            matched, best_gap = name, gap
    return SecondMomentReport(estimate, std_err, samples, t, n_base, matched,
                              rhs, tuple(per), box.volume())


@dataclass(frozen=True)
class MeasureBoundReport:
    estimate: float
    std_err: float
    samples: int
    t: float
    base_points: int
    convention: None
    region: dict
    volume: float
    bound: float
    passed: bool
    per_point: tuple

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "std_err": self.std_err,
                "samples": self.samples, "t": self.t,
                "base_points": self.base_points, "convention": self.convention,
                "region": self.region, "volume": self.volume,
                "bound": self.bound, "passed": self.passed,
                "per_point": list(self.per_point)}


def measure_lower_bound_check(region: TargetRegion, t: float, samples: int,
                              n_base: int, seed: int,
                              threads: int = 1) -> MeasureBoundReport:
    """Orbit estimate of the hitting-set measure against min(1/5, vol/5).

    Passes when estimate + 3 std_err clears the bound.
    """
    def f(basis: np.ndarray) -> float:
        return 1.0 if lattice_hits(basis, region) is not None else 0.0

    per = []
    for j, (g, _q) in enumerate(base_points(seed, n_base)):
        per.append(orbit_average(g, f, t, samples, seed, stream=j, threads=threads).value)
    estimate, std_err = _pooled(per)
    vol = region.volume()
    bound = min(0.2, vol / 5.0)
    return MeasureBoundReport(estimate, std_err, samples, t, n_base, None,
                              region.to_json(), vol, bound,
                              bool(estimate + 3 * std_err >= bound), tuple(per))
