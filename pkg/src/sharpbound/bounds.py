"""Bound constants for Polya-Szego and Diaz-Metcalf type operator inequalities.

Every constant depends on the spectral enclosures
``m1^2 <= A <= M1^2`` and ``m2^2 <= B <= M2^2`` through the four numbers
of :class:`SpectralBounds`; ``m = m1*m2`` and ``M = M1*M2``.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidBounds, WeightOutOfRange
from .means import MeanSpec, _evaluate

GRID_POINTS = 2048
GOLDEN_RTOL = 1e-12
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SpectralBounds:
    m1: float
    M1: float
    m2: float
    M2: float

    def __post_init__(self):
        vals = (self.m1, self.M1, self.m2, self.M2)
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in vals):
            raise InvalidBounds(f"bounds must be finite reals, got {vals}")
        if not (0 < self.m1 <= self.M1 and 0 < self.m2 <= self.M2):
            raise InvalidBounds(f"need 0 < m1 <= M1 and 0 < m2 <= M2, got {vals}")
        for name in ("m1", "M1", "m2", "M2"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def m(self):
        return self.m1 * self.m2

    @property
    def M(self):
        return self.M1 * self.M2

    def to_json(self):
        return {"m1": self.m1, "M1": self.M1, "m2": self.m2, "M2": self.M2}

    def astuple(self):
        return (self.m1, self.M1, self.m2, self.M2)


@dataclass(frozen=True)
class BoundSet:
    alpha: float
    beta: float
    dm: float
    dm_squared: float
    gruss: float
    kantorovich: float


def alpha_polya_szego(b):
    """``(M + m) / (2 sqrt(Mm))``, at least 1."""
    m, M = b.m, b.M
    # Written as 1 + (sqrt M - sqrt m)^2 / (2 sqrt(Mm)) so roundoff cannot push it below 1.
    return 1.0 + (math.sqrt(M) - math.sqrt(m)) ** 2 / (2.0 * math.sqrt(M * m))


def beta_squared(b):
    """Piecewise constant of the squared Polya-Szego inequality.

    ``alpha^4`` when ``alpha^2 <= sqrt(M/m)``, otherwise
    ``sqrt(M/m) * (2 alpha^2 - sqrt(M/m))``.
    """
    a2 = alpha_polya_szego(b) ** 2
    s = math.sqrt(b.M / b.m)
    if a2 <= s:
        return a2 * a2
    return s * (2.0 * a2 - s)


def dm_constant(b):
    return b.M2 / b.m1 + b.m2 / b.M1


def dm_squared_constant(b):
    """The constant K of the squared Diaz-Metcalf inequality (L <= K^2 R)."""
    m1, M1, m2, M2 = b.astuple()
    num = (M1 * m1 * (M2**2 + m2**2) + M2 * m2 * (M1**2 + m1**2)) ** 2
    den = 8.0 * math.sqrt(M2 * M1 * m1 * m2) * M1**2 * m1**2 * M2 * m2
    return num / den


def gruss_bound(b):
    return (beta_squared(b) - 1.0) * b.M1**2 * b.M2**2


def kantorovich_factor(m, M):
    """``(M + m)^2 / (4 M m)``."""
    if not 0 < m <= M:
        raise InvalidBounds(f"need 0 < m <= M, got m={m}, M={M}")
    return (M + m) ** 2 / (4.0 * M * m)


def bound_set(b):
    return BoundSet(
        alpha=alpha_polya_szego(b),
        beta=beta_squared(b),
        dm=dm_constant(b),
        dm_squared=dm_squared_constant(b),
        gruss=gruss_bound(b),
        kantorovich=kantorovich_factor(b.m, b.M),
    )


def golden_section_max(g, lo, hi, rtol=GOLDEN_RTOL, max_iter=200):
    """Maximize a unimodal ``g`` on ``[lo, hi]``; returns ``(t, g(t))``."""
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    g1, g2 = g(x1), g(x2)
    for _ in range(max_iter):
        if hi - lo <= rtol * max(abs(lo), abs(hi)):
            break
        if g1 < g2:
            lo, x1, g1 = x1, x2, g2
            x2 = lo + _INVPHI * (hi - lo)
            g2 = g(x2)
        else:
            hi, x2, g2 = x2, x1, g1
            x1 = hi - _INVPHI * (hi - lo)
            g1 = g(x1)
    return (x1, g1) if g1 >= g2 else (x2, g2)


def _representing(f):
    if isinstance(f, MeanSpec):
        return f.representing_function, f.label
    return f, getattr(f, "__name__", "f")


def chord_coefficients(f, b):
    """Slope and intercept of the chord of ``f`` over ``[m2^2/M1^2, M2^2/m1^2]``."""
    f, name = _representing(f)
    lo = b.m2**2 / b.M1**2
    hi = b.M2**2 / b.m1**2
    f_lo, f_hi = _evaluate(f, np.array([lo, hi]), name)
    slope = (f_hi - f_lo) / (hi - lo)
    intercept = (hi * f_lo - lo * f_hi) / (hi - lo)
    return slope, intercept


def alpha_general(f, b):
    """Largest ratio of ``f`` to its chord over ``[m2^2/M1^2, M2^2/m1^2]``.

    Dense geometric grid, then golden-section refinement around the best
    grid point.  A degenerate interval gives 1.
    """
    return _alpha_general(f if isinstance(f, MeanSpec) else _Plain(f), b)


class _Plain:
    # Hashable wrapper so bare callables share the cache with MeanSpecs.
    __slots__ = ("f",)

    def __init__(self, f):
        self.f = f

    def __hash__(self):
        return hash(self.f)

    def __eq__(self, other):
        return isinstance(other, _Plain) and other.f is self.f


@lru_cache(maxsize=256)
def _alpha_general(key, b):
    f = key.f if isinstance(key, _Plain) else key
    lo = b.m2**2 / b.M1**2
    hi = b.M2**2 / b.m1**2
    if hi <= lo * (1.0 + 1e-15):
        return 1.0
    func, name = _representing(f)
    slope, intercept = chord_coefficients(f, b)

    def ratio(t):
        t = np.asarray(t, dtype=float)
        return _evaluate(func, t, name) / (slope * t + intercept)

    grid = np.geomspace(lo, hi, GRID_POINTS)
    grid[0], grid[-1] = lo, hi
    vals = ratio(grid)
    i = int(np.argmax(vals))
    best = float(vals[i])
    left = grid[max(i - 1, 0)]
    right = grid[min(i + 1, GRID_POINTS - 1)]
    if right > left:
        _, refined = golden_section_max(lambda t: float(ratio(np.array([t]))[0]), left, right)
        best = max(best, refined)
    return best


def alpha_weighted_geometric_closed(mu, b):
    """Closed-form maximum of ``t^mu`` over its chord, for ``0 <= mu <= 1``.

    With ``h = M2^2/m1^2`` and ``l = m2^2/M1^2``::

        mu^mu (1-mu)^(1-mu) (h - l)
        ------------------------------------------------
        (h l^mu - l h^mu)^(1-mu) (h^mu - l^mu)^mu

    The endpoints ``mu in {0, 1}`` and a degenerate interval give 1.
    """
    if not 0.0 <= mu <= 1.0:
        raise WeightOutOfRange(f"weight must lie in [0, 1], got {mu}")
    h = b.M2**2 / b.m1**2
    l = b.m2**2 / b.M1**2
    if mu in (0.0, 1.0) or h <= l * (1.0 + 1e-15):
        return 1.0
    # Work in logs; both bracketed factors are positive for l < h.
    log_num = mu * math.log(mu) + (1.0 - mu) * math.log1p(-mu) + math.log(h - l)
    cross = h * l**mu - l * h**mu
    log_den = (1.0 - mu) * math.log(cross) + mu * math.log(h**mu - l**mu)
    return math.exp(log_num - log_den)


def beta_general(f, b, alpha=None):
    """Squared-inequality constant for a mean with representing function ``f``.

    Maximizes ``(alpha (Mt + mt) t - mt Mt) / t^2`` over ``[mt, Mt]`` where
    ``mt = m1^2 f(m2^2/m1^2)`` and ``Mt = M1^2 f(M2^2/M1^2)``.  The quotient
    has a single interior maximum at ``2 Mt mt / (alpha (Mt + mt))``.
    """
    func, name = _representing(f)
    if alpha is None:
        alpha = alpha_general(f, b)
    vals = _evaluate(func, np.array([b.m2**2 / b.m1**2, b.M2**2 / b.M1**2]), name)
    mt = b.m1**2 * float(vals[0])
    Mt = b.M1**2 * float(vals[1])

    def q(t):
        return (alpha * (Mt + mt) * t - mt * Mt) / (t * t)

    if Mt <= mt:
        return q(mt)
    t0 = 2.0 * Mt * mt / (alpha * (Mt + mt))
    t0 = min(max(t0, mt), Mt)
    return max(q(t0), q(mt), q(Mt))
