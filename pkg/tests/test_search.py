import csv
import io
import json

import numpy as np
import pytest

from sharpbound import bounds as bd
from sharpbound.bounds import SpectralBounds
from sharpbound.instances import make_rng, random_instance
from sharpbound.search import (
    SWEEP_HEADER,
    falsify,
    rows_to_csv,
    scalar_search,
    sweep,
    target_constants,
    target_ratio,
)

from conftest import validate

B1212 = SpectralBounds(1, 2, 1, 2)
B1414 = SpectralBounds(1, 4, 1, 4)


def test_target_constants():
    assert target_constants("conjecture_ps2", B1212) == pytest.approx((1.5625, 2.44140625))
    assert target_constants("conjecture_dm2", B1212) == pytest.approx((6.25, 3.125**2))
    with pytest.raises(ValueError):
        target_constants("nope", B1212)


@pytest.mark.parametrize("b", [B1212, B1414, SpectralBounds(1, 3, 0.5, 1), SpectralBounds(2, 2.5, 1, 6)])
def test_scalar_search_attains_alpha_sq(b):
    ratio, inst = scalar_search("conjecture_ps2", b)
    assert ratio == pytest.approx(bd.alpha_polya_szego(b) ** 2, rel=1e-10)
    # the returned instance realizes the reported ratio
    assert target_ratio("conjecture_ps2", inst) == pytest.approx(ratio, rel=1e-10)


@pytest.mark.parametrize("b", [B1212, B1414, SpectralBounds(1, 3, 0.5, 1)])
def test_scalar_search_dm(b):
    ratio, inst = scalar_search("conjecture_dm2", b)
    assert ratio == pytest.approx(bd.dm_constant(b) ** 2, rel=1e-10)
    assert ratio <= bd.dm_squared_constant(b) ** 2 * (1 + 1e-12)


def test_scalar_search_brute_force_oracle():
    # Independent oracle: dense grid over two-point vector states on the corners.
    b = SpectralBounds(1, 3, 0.5, 1)
    a = np.array([b.m1**2, b.M1**2])
    c = np.array([b.M2**2, b.m2**2])
    w = np.linspace(0, 1, 200001)
    num = (w * a[0] + (1 - w) * a[1]) * (w * c[0] + (1 - w) * c[1])
    den = (w * np.sqrt(a[0] * c[0]) + (1 - w) * np.sqrt(a[1] * c[1])) ** 2
    ratio, _ = scalar_search("conjecture_ps2", b)
    assert ratio == pytest.approx(np.max(num / den), rel=1e-9)


def test_degenerate_bounds_ratio_one():
    b = SpectralBounds(2, 2, 3, 3)
    rep = falsify("conjecture_ps2", b, 2, 20, seed=1)
    assert rep.best_ratio == pytest.approx(1, rel=1e-12)
    assert rep.conjectured_constant == pytest.approx(1)
    assert rep.backstop_ok and not rep.violated
    assert falsify("conjecture_ps2", b, 1, 1, seed=1).best_ratio == pytest.approx(1, rel=1e-12)


@pytest.mark.parametrize("target", ["conjecture_ps2", "conjecture_dm2"])
def test_budget_one_is_single_evaluation(target):
    rep = falsify(target, B1414, 3, 1, seed=21)
    inst = random_instance(3, B1414, make_rng(21, 0))
    assert rep.budget_used == 1
    assert rep.best_ratio == target_ratio(target, inst)
    assert np.array_equal(rep.best_instance.A.array, inst.A.array)


@pytest.mark.parametrize("target", ["conjecture_ps2", "conjecture_dm2"])
def test_falsify_sound_and_deterministic(target, schema):
    a = falsify(target, B1212, 2, 1500, seed=4)
    b = falsify(target, B1212, 2, 1500, seed=4)
    assert json.dumps(a.to_json()) == json.dumps(b.to_json())
    assert a.budget_used == 1500 and a.backstop_ok
    assert a.best_ratio <= a.proven_constant * (1 + 1e-8)
    assert target_ratio(target, a.best_instance) == pytest.approx(a.best_ratio, rel=1e-12)
    validate(schema, json.loads(json.dumps(a.to_json())), "search_report")


def test_falsify_jobs_invariant():
    a = falsify("conjecture_dm2", B1212, 2, 2100, seed=6, jobs=1)
    b = falsify("conjecture_dm2", B1212, 2, 2100, seed=6, jobs=2)
    assert json.dumps(a.to_json()) == json.dumps(b.to_json())


def test_falsify_rejects_bad_budget():
    with pytest.raises(ValueError):
        falsify("conjecture_ps2", B1212, 2, 0, seed=0)


def test_sweep_shape_and_trivial_cell():
    rows, ok = sweep([1, 4], 2, 30, seed=2)
    assert ok and len(rows) == 4
    first = rows[0]
    assert (first["ratio1"], first["ratio2"]) == (1, 1)
    for key in ("alpha_sq", "beta", "best_ps2"):
        assert first[key] == pytest.approx(1, rel=1e-12)
    # with m = M on both sides, A and B are scalar and the Diaz-Metcalf side is (1 + 1)^2
    for key in ("dm_sq", "K_sq", "best_dm2"):
        assert first[key] == pytest.approx(4, rel=1e-12)
    last = rows[-1]
    assert last["alpha_sq"] == pytest.approx(1.5625) and last["beta"] == pytest.approx(2.44140625)
    text = rows_to_csv(rows)
    parsed = list(csv.reader(io.StringIO(text)))
    assert tuple(parsed[0]) == SWEEP_HEADER and len(parsed) == 5
    assert all(float(x) for row in parsed[1:] for x in row)
