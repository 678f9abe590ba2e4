import json
import warnings

import numpy as np
import pytest

from aerq.averaged import (
    FAIL,
    PASS,
    SKIPPED,
    aerq_via_restimator,
    aerq_via_weights,
    averaged_rq,
    safe_verify,
    shortfall,
    verify_identities,
)
from aerq.core import DegeneracyWarning, validate_dataset
from aerq.rq import fit_extreme_rq, fit_quantile, fit_rq
from helpers import exact_extreme, random_dataset


def test_averaged_rq_fixture(fixture_data):
    assert averaged_rq(fit_extreme_rq(fixture_data), fixture_data) == pytest.approx(17 / 6, abs=1e-14)


def test_averaged_rq_location_is_intercept():
    data = validate_dataset([1.0, 2.0, 9.0])
    fit = fit_rq(data, 0.5)
    assert averaged_rq(fit, data) == fit.beta0


def test_averaged_rq_equivariance(fixture_data):
    gamma = np.array([0.7, -1.3])
    shifted = validate_dataset(fixture_data.y + fixture_data.design @ gamma, fixture_data.x)
    for alpha in (0.3, 1.0):
        base = averaged_rq(fit_quantile(fixture_data, alpha), fixture_data)
        moved = averaged_rq(fit_quantile(shifted, alpha), shifted)
        assert moved == pytest.approx(base + fixture_data.design_mean @ gamma, abs=1e-12)


def test_weights_fixture(fixture_data):
    b, bw = aerq_via_weights(fixture_data, (1, 2))
    assert b == pytest.approx(17 / 6, abs=1e-14)
    np.testing.assert_allclose(bw.weights, [5 / 6, 1 / 6], atol=1e-15)
    assert bw.positive and bw.notes == ()


def test_weights_location():
    b, bw = aerq_via_weights(validate_dataset([1.0, 3.0, 2.0]), (1,))
    assert b == 3.0
    np.testing.assert_array_equal(bw.weights, [1.0])


def test_nonpositive_weights_warn(fixture_data):
    # base {1, 2} (0-based {0, 1}) is not optimal; its weights solve w1 + w2 = 1, w2 = xbar = 4/3
    with pytest.warns(DegeneracyWarning):
        _, bw = aerq_via_weights(fixture_data, (0, 1))
    np.testing.assert_allclose(bw.weights, [-1 / 3, 4 / 3])
    assert not bw.positive and bw.notes


@pytest.mark.parametrize("seed", range(20))
def test_weights_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 5))
    data = random_dataset(rng, int(rng.integers(p + 2, 40)), p)
    base = tuple(sorted(rng.choice(data.n, p + 1, replace=False)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        _, bw = aerq_via_weights(data, base)
    assert abs(bw.weights.sum() - 1) <= 1e-10


def test_restimator_route(fixture_data):
    assert aerq_via_restimator(fixture_data) == pytest.approx(17 / 6, abs=1e-14)
    assert aerq_via_restimator(validate_dataset([1.0, 3.0, 2.0])) == 3.0


def test_shortfall_examples(fixture_data):
    assert shortfall(fixture_data, fit_extreme_rq(fixture_data)) == pytest.approx(-5 / 6, abs=1e-14)
    loc = validate_dataset([1.0, 3.0, 2.0])
    assert shortfall(loc, fit_extreme_rq(loc)) == -1.0
    exact = validate_dataset([0.0, 1.0], [0.0, 1.0], allow_exact=True)
    assert shortfall(exact, fit_extreme_rq(exact)) == pytest.approx(0.0, abs=1e-15)


def test_verify_fixture(fixture_data):
    r = verify_identities(fixture_data)
    assert r.verdict == PASS, r.notes
    for b in (r.b_primal, r.b_weights, r.b_restimator):
        assert b == pytest.approx(17 / 6, abs=1e-10)
    assert r.base_indices == (1, 2)
    assert r.to_dict()["base_indices"] == [2, 3]
    assert r.shortfall == pytest.approx(-5 / 6)
    assert max(r.discrepancies.values()) <= 1e-12


def test_verify_location():
    r = verify_identities(validate_dataset([1.0, 3.0, 2.0]))
    assert r.verdict == PASS
    assert r.b_primal == r.b_weights == r.b_restimator == 3.0


def test_verify_duplicates_skipped():
    r = verify_identities(validate_dataset([1, 3, 2, 3, 2], [0, 1, 3, 1, 3]))
    assert r.verdict == SKIPPED
    assert r.weights is None and any("active" in n for n in r.notes)
    # the scalar B is still unique on a degenerate face
    # xbar = 8/5 here, so B = 3.5 - 0.8
    assert r.b_primal == pytest.approx(2.7) and r.b_restimator == pytest.approx(2.7)


def test_verify_exact_fit_skipped():
    r = verify_identities(validate_dataset([0.0, 1.0], [0.0, 1.0], allow_exact=True))
    assert r.verdict == SKIPPED
    assert any("exact" in n for n in r.notes)


def test_report_json_keys(fixture_data):
    d = verify_identities(fixture_data).to_dict()
    assert list(d) == [
        "b_primal", "b_weights", "b_restimator", "weights", "base_indices", "shortfall",
        "mean_y", "max_y", "discrepancies", "verdict", "notes",
    ]
    assert json.loads(json.dumps(d)) == d


def test_safe_verify_reports_failure(monkeypatch, fixture_data):
    from aerq import averaged
    from aerq.core import NumericalError

    def boom(*_):
        raise NumericalError("solver broke")

    monkeypatch.setattr(averaged, "fit_extreme_rq", boom)
    r = safe_verify(fixture_data)
    assert r.verdict == FAIL and "solver broke" in r.notes[0]


@pytest.mark.parametrize("seed", range(30))
def test_routes_agree_with_exact_arithmetic(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 3))
    n = int(rng.integers(p + 2, 9))
    # short dyadic inputs so the rational oracle sees the same numbers
    y = np.round(rng.normal(size=n) * 64) / 64
    x = np.round(rng.uniform(-1, 1, size=(n, p)) * 64) / 64
    data = validate_dataset(y, x)
    obj, _, _ = exact_extreme(y, x)
    b_exact = float(obj / n)
    r = safe_verify(data)
    assert r.verdict != FAIL, r.notes
    assert r.b_primal == pytest.approx(b_exact, abs=1e-12)
    assert r.b_restimator == pytest.approx(b_exact, abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_monotone_in_alpha(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 4))
    data = random_dataset(rng, int(rng.integers(10, 40)), p, "t3")
    grid = [*np.round(np.arange(0.05, 0.951, 0.05), 2), 1.0]
    values = [averaged_rq(fit_quantile(data, a), data) for a in grid]
    assert np.all(np.diff(values) >= -1e-10)
