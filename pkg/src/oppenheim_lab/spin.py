"""The double cover SL(2,R) -> SO(2,1), its norm, KAK coordinates and ball sampling.

The cover sends h = (a b; c d) to

            [ (a^2-b^2-c^2+d^2)/2   ab-cd   (a^2+b^2-c^2-d^2)/2 ]
    iota(h) = [       ac-bd          ad+bc         ac+bd        ]
            [ (a^2-b^2+c^2-d^2)/2   ab+cd   (a^2+b^2+c^2+d^2)/2 ]

which satisfies iota(h1 h2) = iota(h1) iota(h2), iota(-h) = iota(h), and
iota(h)^T J iota(h) = J for J = diag(1,1,-1), so the image preserves the base
form x^2 + y^2 - z^2.

The norm on SL(2,R) is |h| := ||iota(h)^{-1}||_HS.  In KAK coordinates
h = k_theta a_t k_theta' the observed closed form is

    |h| = sqrt(3 + 4 sinh(t)^2)

independent of both angles (iota of a rotation is orthogonal, and conjugation
by J preserves the Hilbert-Schmidt norm), with minimum sqrt(3) at t = 0.
Haar measure in these coordinates has density sinh(t) dtheta dtheta' dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BallEmpty
from .forms import GroupElement

SQRT3 = math.sqrt(3.0)
_BISECT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SpinElement:
    """A real 2x2 matrix of determinant one."""

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        d = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(d - 1.0) > 1e-12:
            raise ValueError(f"determinant {d!r} is not 1 within 1e-12")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls) -> "SpinElement":
        return cls(np.eye(2))

    def inv(self) -> "SpinElement":
        a, b, c, d = self.m.ravel()
        return SpinElement(np.array([[d, -b], [-c, a]]))

    def __matmul__(self, other: "SpinElement") -> "SpinElement":
        return SpinElement(self.m @ other.m)

    def __neg__(self) -> "SpinElement":
        return SpinElement(-self.m)


@dataclass(frozen=True)
class KakCoords:
    """Coordinates (theta, t, theta2) with h = k_theta a_t k_theta2, t >= 0."""

    theta: float
    t: float
    theta2: float

    def to_json(self) -> list:
        return [self.theta, self.t, self.theta2]


def rotation(theta: float) -> SpinElement:
    """k_theta = (cos sin; -sin cos)."""
    c, s = math.cos(theta), math.sin(theta)
    return SpinElement(np.array([[c, s], [-s, c]]))


def boost(t: float) -> SpinElement:
    """a_t = diag(e^{t/2}, e^{-t/2})."""
    e = math.exp(t / 2)
    return SpinElement(np.array([[e, 0.0], [0.0, 1.0 / e]]))


def _iota_entries(a, b, c, d):
    """The nine entries of iota(a,b;c,d), vectorized over array inputs."""
    return (
        (a * a - b * b - c * c + d * d) / 2, a * b - c * d, (a * a + b * b - c * c - d * d) / 2,
        a * c - b * d, a * d + b * c, a * c + b * d,
        (a * a - b * b + c * c - d * d) / 2, a * b + c * d, (a * a + b * b + c * c + d * d) / 2,
    )


def _iota_matrix(m: np.ndarray, corrupt: bool = False) -> np.ndarray:
    a, b, c, d = m.ravel()
    e = _iota_entries(a, b, c, d)
    g = np.array([[e[0], e[1], e[2]], [e[3], e[4], e[5]], [e[6], e[7], e[8]]])
    if corrupt:
        # fault injection for the self-test harness: the transposed variant
        # reverses composition order, so only the homomorphism check trips
        return g.T
    return g


def spin_cover(h: SpinElement | np.ndarray) -> GroupElement:
    """iota(h) as a GroupElement; lands in SO(2,1) with determinant one."""
    m = h.m if isinstance(h, SpinElement) else np.asarray(h, dtype=float)
    return GroupElement(_iota_matrix(m))


def h_norm(h: SpinElement | np.ndarray) -> float:
    """|h| = Hilbert-Schmidt norm of iota(h)^{-1}; always >= sqrt(3).

    The inverse is taken through the adjugate of h (exact for det 1), since
    iota(h)^{-1} = iota(h^{-1}).
    """
    m = h.m if isinstance(h, SpinElement) else np.asarray(h, dtype=float)
    a, b, c, d = m.ravel()
    ent = _iota_entries(d, -b, -c, a)
    return math.sqrt(sum(x * x for x in ent))


def random_spin(rng: np.random.Generator) -> SpinElement:
    """Gaussian 2x2 entries rescaled to determinant one (redrawn when |det| < 1e-6).

    Negative determinants cannot be rescaled away, so those draws are redrawn
    as well.
    """
    while True:
        m = rng.normal(size=(2, 2))
        d = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if d > 1e-6:
            return SpinElement(m / math.sqrt(d))


# ---------------------------------------------------------------------------
# KAK decomposition
# ---------------------------------------------------------------------------

def kak_compose(c: KakCoords) -> SpinElement:
    """k_theta a_t k_theta2."""
    return rotation(c.theta) @ boost(c.t) @ rotation(c.theta2)


def kak_decompose(h: SpinElement) -> KakCoords:
    """KAK coordinates via the SVD; t = 2 log(largest singular value) >= 0.

    The round trip kak_compose(kak_decompose(h)) reproduces h up to the
    global sign of the double cover.
    """
    u, s, vh = np.linalg.svd(h.m)
    if np.linalg.det(u) < 0:
        # absorb the pair of reflections (det u = det vh here since det h = 1)
        u = u @ np.diag([1.0, -1.0])
        vh = np.diag([1.0, -1.0]) @ vh
    t = 2.0 * math.log(s[0])
    theta = math.atan2(u[0, 1], u[0, 0]) % (2 * math.pi)
    theta2 = math.atan2(vh[0, 1], vh[0, 0]) % (2 * math.pi)
    return KakCoords(theta, max(t, 0.0), theta2)


# ---------------------------------------------------------------------------
# norm in KAK coordinates, ball radii, Haar sampling
# ---------------------------------------------------------------------------

def _kak_norm(theta, t, theta2):
    """|k_theta a_t k_theta2| for array-valued coordinates."""
    big = np.exp(t / 2)
    sml = np.exp(-t / 2)
    c1, s1 = np.cos(theta), np.sin(theta)
    c2, s2 = np.cos(theta2), np.sin(theta2)
    a = c1 * big * c2 - s1 * sml * s2
    b = c1 * big * s2 + s1 * sml * c2
    c = -s1 * big * c2 - c1 * sml * s2
    d = -s1 * big * s2 + c1 * sml * c2
    ent = _iota_entries(d, -b, -c, a)
    acc = ent[0] * ent[0]
    for x in ent[1:]:
        acc = acc + x * x
    return np.sqrt(acc)


def _t_star(radius: float, theta, theta2):
    """Largest t with |k_theta a_t k_theta2| <= radius, by monotone bisection.

    Vectorized over the angle arrays; tolerance 1e-10 in t.
    """
    theta = np.asarray(theta, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    lo = np.zeros(np.broadcast(theta, theta2).shape)
    hi = np.ones_like(lo)
    # bracket: double until the norm exceeds the radius everywhere
    for _ in range(64):
        inside = _kak_norm(theta, hi, theta2) <= radius
        if not inside.any():
            break
        hi = np.where(inside, hi * 2, hi)
    while (hi - lo).max() > _BISECT_TOL:
        mid = (lo + hi) / 2
        inside = _kak_norm(theta, mid, theta2) <= radius
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return lo


def _ball_transform(radius: float, u: np.ndarray) -> np.ndarray:
    """Map uniform triples u in [0,1)^3 to (n,2,2) Haar-ball samples.

    Angles are uniform; t follows the sinh density truncated at t*(radius),
    sampled by inverting cosh on [1, cosh t*].
    """
    theta = 2 * np.pi * u[:, 0]
    theta2 = 2 * np.pi * u[:, 1]
    tstar = _t_star(radius, theta, theta2)
    t = np.arccosh(1.0 + u[:, 2] * (np.cosh(tstar) - 1.0))
    big = np.exp(t / 2)
    sml = np.exp(-t / 2)
    c1, s1 = np.cos(theta), np.sin(theta)
    c2, s2 = np.cos(theta2), np.sin(theta2)
    out = np.empty((len(t), 2, 2))
    out[:, 0, 0] = c1 * big * c2 - s1 * sml * s2
    out[:, 0, 1] = c1 * big * s2 + s1 * sml * c2
    out[:, 1, 0] = -s1 * big * c2 - c1 * sml * s2
    out[:, 1, 1] = -s1 * big * s2 + c1 * sml * c2
    return out


def sample_ball(radius: float, rng: np.random.Generator) -> SpinElement:
    """One Haar-distributed element of {h : |h| <= radius}."""
    if radius <= SQRT3:
        raise BallEmpty(f"radius {radius} <= sqrt(3); the ball has measure zero")
    u = rng.random(3).reshape(1, 3)
    return SpinElement(_ball_transform(radius, u)[0])


def ball_mass(radius: float, nodes: int = 32) -> float:
    """Haar mass of {|h| <= radius}: the (theta, theta') quadrature of cosh(t*) - 1."""
    if radius <= SQRT3:
        raise BallEmpty(f"radius {radius} <= sqrt(3); the ball has measure zero")
    # midpoint rule on the torus; the integrand is smooth and periodic
    grid = (np.arange(nodes) + 0.5) * (2 * np.pi / nodes)
    th, th2 = np.meshgrid(grid, grid, indexing="ij")
    tstar = _t_star(radius, th.ravel(), th2.ravel())
    return float((np.cosh(tstar) - 1.0).mean() * 4 * np.pi**2)


def ball_mass_rejection(radius: float, samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Independent Monte Carlo estimate of ball_mass, with standard error.

    Samples from the sinh envelope truncated at t*(2 * radius) and counts
    acceptances of |h| <= radius.
    """
    if radius <= SQRT3:
        raise BallEmpty(f"radius {radius} <= sqrt(3); the ball has measure zero")
    t_hi = float(_t_star(2 * radius, 0.0, 0.0))
    envelope = 4 * np.pi**2 * (math.cosh(t_hi) - 1.0)
    u = rng.random((samples, 3))
    theta = 2 * np.pi * u[:, 0]
    theta2 = 2 * np.pi * u[:, 1]
    t = np.arccosh(1.0 + u[:, 2] * (math.cosh(t_hi) - 1.0))
    accept = (_kak_norm(theta, t, theta2) <= radius).astype(float)
    est = envelope * float(accept.mean())
    err = envelope * float(accept.std(ddof=1) / math.sqrt(samples))
    return est, err


# ---------------------------------------------------------------------------
# invariant self-test (backs the `spin-selftest` command)
# ---------------------------------------------------------------------------

def selftest(seed: int = 0, pairs: int = 1000, corrupt: bool = False) -> dict:
    """Run the cover's invariant suite on random pairs; returns residuals and flags.

    Checks: homomorphism (relative), preservation of J = diag(1,1,-1)
    (relative), the kernel identity iota(-h) = iota(h), and the growth rate
    h_norm(a_t) / e^t for t in [5, 20].  Residuals for the quadratic checks
    are normalized by the product of the operand norms, the honest noise
    floor of double precision.
    """
    rng = np.random.default_rng(seed)
    j = np.diag([1.0, 1.0, -1.0])
    hom = orth = ker = 0.0
    for _ in range(pairs):
        h1 = random_spin(rng)
        h2 = random_spin(rng)
        g1 = _iota_matrix(h1.m, corrupt)
        g2 = _iota_matrix(h2.m, corrupt)
        g12 = _iota_matrix((h1 @ h2).m, corrupt)
        n1 = np.sqrt((g1 * g1).sum())
        n2 = np.sqrt((g2 * g2).sum())
        hom = max(hom, float(np.linalg.norm(g12 - g1 @ g2) / (1 + n1 * n2)))
        orth = max(orth, float(np.linalg.norm(g1.T @ j @ g1 - j) / (1 + n1 * n1)))
        ker = max(ker, float(np.abs(_iota_matrix(-h1.m, corrupt) - g1).max()))
    growth_lo, growth_hi = np.inf, -np.inf
    for t in np.linspace(5.0, 20.0, 61):
        r = h_norm(boost(t)) / math.exp(t)
        growth_lo, growth_hi = min(growth_lo, r), max(growth_hi, r)
    checks = {
        "homomorphism": hom <= 1e-9,
        "orthogonality": orth <= 1e-9,
        "kernel": ker <= 1e-12,
        "growth": 0.9 <= growth_lo and growth_hi <= 1.1,
    }
    return {
        "pairs": pairs,
        "seed": seed,
        "residual_homomorphism": hom,
        "residual_orthogonality": orth,
        "residual_kernel": ker,
        "growth_ratio_min": growth_lo,
        "growth_ratio_max": growth_hi,
        "checks": checks,
        "ok": all(checks.values()),
    }
