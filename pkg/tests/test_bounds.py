import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sharpbound import bounds as bd
from sharpbound.bounds import SpectralBounds
from sharpbound.errors import InvalidBounds, WeightOutOfRange
from sharpbound.means import MeanSpec

B1212 = SpectralBounds(1, 2, 1, 2)
B1414 = SpectralBounds(1, 4, 1, 4)

positive = st.floats(0.05, 20, allow_nan=False)


@st.composite
def bounds_strategy(draw):
    m1, m2 = draw(positive), draw(positive)
    return SpectralBounds(m1, m1 * draw(st.floats(1, 6)), m2, m2 * draw(st.floats(1, 6)))


def brute_alpha(f, b, points=400001):
    # Dense linear-grid oracle for max f(t) / chord(t).
    lo, hi = b.m2**2 / b.M1**2, b.M2**2 / b.m1**2
    t = np.linspace(lo, hi, points)
    slope = (f(hi) - f(lo)) / (hi - lo)
    chord = f(lo) + slope * (t - lo)
    return float(np.max(f(t) / chord))


def brute_beta(f, b, alpha, points=400001):
    mt = b.m1**2 * f(b.m2**2 / b.m1**2)
    Mt = b.M1**2 * f(b.M2**2 / b.M1**2)
    t = np.linspace(min(mt, Mt), max(mt, Mt), points)
    return float(np.max((alpha * (Mt + mt) * t - mt * Mt) / t**2))


def test_validation():
    for bad in [(0, 1, 1, 1), (2, 1, 1, 1), (1, 1, 1, -1), (1, float("nan"), 1, 1), (1, float("inf"), 1, 1)]:
        with pytest.raises(InvalidBounds):
            SpectralBounds(*bad)


def test_alpha_examples():
    assert bd.alpha_polya_szego(SpectralBounds(3, 3, 2, 2)) == 1
    assert bd.alpha_polya_szego(B1212) == pytest.approx(1.25, abs=1e-15)
    assert bd.alpha_polya_szego(B1414) == pytest.approx(2.125, abs=1e-15)


def test_beta_examples():
    assert bd.beta_squared(SpectralBounds(2, 2, 5, 5)) == pytest.approx(1)
    assert bd.beta_squared(B1212) == pytest.approx(2.44140625, abs=1e-12)
    assert bd.beta_squared(B1414) == pytest.approx(20.125, abs=1e-12)


def test_dm_examples():
    assert bd.dm_constant(SpectralBounds(1, 1, 1, 1)) == 2
    assert bd.dm_constant(B1212) == 2.5
    assert bd.dm_constant(B1414) == 4.25
    # M2/m1 + m2/M1 = 4/1 + 1/1
    assert bd.dm_constant(SpectralBounds(1, 1, 1, 4)) == 5


def test_dm_squared_examples():
    assert bd.dm_squared_constant(SpectralBounds(1, 1, 1, 1)) == pytest.approx(2)
    assert bd.dm_squared_constant(B1212) == pytest.approx(3.125, abs=1e-12)


def test_gruss_and_kantorovich():
    assert bd.gruss_bound(SpectralBounds(2, 2, 3, 3)) == pytest.approx(0, abs=1e-12)
    assert bd.gruss_bound(B1212) == pytest.approx(23.0625, abs=1e-12)
    assert bd.kantorovich_factor(1, 1) == 1
    assert bd.kantorovich_factor(1, 2) == pytest.approx(9 / 8)
    assert bd.kantorovich_factor(1, 4) == pytest.approx(25 / 16)
    with pytest.raises(InvalidBounds):
        bd.kantorovich_factor(2, 1)


def test_bound_set():
    s = bd.bound_set(B1212)
    assert (s.alpha, s.beta, s.dm, s.dm_squared, s.gruss) == pytest.approx((1.25, 2.44140625, 2.5, 3.125, 23.0625))
    assert s.kantorovich == pytest.approx(s.alpha**2)


@settings(max_examples=200, deadline=None)
@given(bounds_strategy())
def test_constant_orderings(b):
    a = bd.alpha_polya_szego(b)
    beta = bd.beta_squared(b)
    assert a >= 1
    assert beta >= a * a * (1 - 1e-14)
    # AM-GM on the two Diaz-Metcalf terms
    assert bd.dm_constant(b) >= 2 * math.sqrt(b.M2 * b.m2 / (b.m1 * b.M1)) * (1 - 1e-14)
    assert bd.gruss_bound(b) >= 0


def test_beta_equals_alpha_sq_only_when_degenerate():
    assert bd.beta_squared(B1212) > bd.alpha_polya_szego(B1212) ** 2


def test_beta_continuous_at_branch_boundary():
    # With r = sqrt(M/m), alpha = (r^2 + 1) / (2r) and the branch switch
    # alpha^2 = r becomes r^4 - 4r^3 + 2r^2 + 1 = 0.
    roots = [z.real for z in np.roots([1, -4, 2, 0, 1]) if abs(z.imag) < 1e-12 and z.real > 1 + 1e-9]
    assert roots
    for r in roots:
        M = r * r  # m = 1, so M/m = r^2; put everything in M1
        for scale in (0.5, 1.0, 3.0):
            b_lo = SpectralBounds(scale, scale * M * (1 - 1e-9), 1, 1)
            b_hi = SpectralBounds(scale, scale * M * (1 + 1e-9), 1, 1)
            assert bd.beta_squared(b_lo) == pytest.approx(bd.beta_squared(b_hi), rel=1e-7)
            assert bd.beta_squared(b_lo) == pytest.approx(r * r, rel=1e-7)


def _enlarge(b, which, k):
    v = dict(zip(("m1", "M1", "m2", "M2"), b.astuple()))
    v[which] = v[which] / k if which.startswith("m") else v[which] * k
    return SpectralBounds(**v)


@settings(max_examples=100, deadline=None)
@given(bounds_strategy(), st.floats(1.0, 3.0))
def test_monotone_in_enclosure(b, k):
    for which in ("m1", "M1", "m2", "M2"):
        wider = _enlarge(b, which, k)
        assert bd.alpha_polya_szego(wider) >= bd.alpha_polya_szego(b) * (1 - 1e-14)
        assert bd.beta_squared(wider) >= bd.beta_squared(b) * (1 - 1e-14)
    # dm grows when m1 shrinks or M2 grows; the m2/M1 term falls under the other two
    for which in ("m1", "M2"):
        assert bd.dm_constant(_enlarge(b, which, k)) >= bd.dm_constant(b)


@settings(max_examples=100, deadline=None)
@given(bounds_strategy())
def test_reductions(b):
    a = bd.alpha_polya_szego(b)
    assert bd.alpha_general(np.sqrt, b) == pytest.approx(a, rel=1e-10)
    assert bd.alpha_general(MeanSpec.geometric(), b) == pytest.approx(a, rel=1e-10)
    assert bd.beta_general(np.sqrt, b, a) == pytest.approx(bd.beta_squared(b), rel=1e-8)
    assert bd.alpha_weighted_geometric_closed(0.5, b) == pytest.approx(a, rel=1e-10)


def test_alpha_general_examples():
    assert bd.alpha_general(MeanSpec.named("arithmetic"), B1414) == pytest.approx(1, abs=1e-12)
    assert bd.alpha_general(np.sqrt, SpectralBounds(1, 1, 2, 2)) == 1
    assert bd.alpha_weighted_geometric_closed(0.5, B1212) == pytest.approx(1.25, rel=1e-12)
    assert bd.alpha_weighted_geometric_closed(0.5, B1414) == pytest.approx(2.125, rel=1e-12)


def test_beta_general_examples():
    assert bd.beta_general(np.sqrt, B1212, 1.25) == pytest.approx(2.44140625, rel=1e-12)
    assert bd.beta_general(np.sqrt, B1414, 2.125) == pytest.approx(20.125, rel=1e-12)
    assert bd.beta_general(np.sqrt, SpectralBounds(2, 2, 3, 3)) == pytest.approx(1, rel=1e-12)


@pytest.mark.parametrize("mu", [0.1, 0.25, 0.5, 0.75, 0.9])
@pytest.mark.parametrize("b", [B1212, B1414, SpectralBounds(1, 3, 0.5, 1), SpectralBounds(0.2, 1, 1, 7)])
def test_weighted_closed_matches_oracles(mu, b):
    closed = bd.alpha_weighted_geometric_closed(mu, b)
    f = lambda t: np.asarray(t, dtype=float) ** mu  # noqa: E731
    assert closed == pytest.approx(bd.alpha_general(MeanSpec.weighted(mu), b), rel=1e-9)
    assert closed == pytest.approx(brute_alpha(f, b), rel=1e-8)


@pytest.mark.parametrize("spec", [MeanSpec.weighted(0.3), MeanSpec.named("harmonic"), MeanSpec.geometric()])
@pytest.mark.parametrize("b", [B1212, B1414, SpectralBounds(1, 3, 0.5, 1)])
def test_general_constants_match_brute_force(spec, b):
    f = spec.representing_function
    a = bd.alpha_general(spec, b)
    assert a == pytest.approx(brute_alpha(f, b), rel=1e-8)
    assert bd.beta_general(spec, b, a) == pytest.approx(brute_beta(f, b, a), rel=1e-8)


def test_weighted_closed_endpoints():
    assert bd.alpha_weighted_geometric_closed(0, B1414) == 1
    assert bd.alpha_weighted_geometric_closed(1, B1414) == 1
    with pytest.raises(WeightOutOfRange):
        bd.alpha_weighted_geometric_closed(1.5, B1414)


def test_golden_section():
    t, v = bd.golden_section_max(lambda x: -(x - 0.3) ** 2, 0, 1)
    assert t == pytest.approx(0.3, abs=1e-6) and v == pytest.approx(0, abs=1e-12)


def test_bounds_json_and_hash():
    assert SpectralBounds(**B1212.to_json()) == B1212
    assert hash(SpectralBounds(1, 2, 1, 2)) == hash(B1212)
