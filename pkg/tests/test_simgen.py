import json
import math

import numpy as np
import pytest
from scipy import stats

import relicomp as rc
from relicomp import SimSpec, ValidationError, generate

V0, B, T = 142.0, 3.48e-5, 91208.0


def spec(seed, **overrides):
    params = dict(v0=V0, b=B, end_of_test=T, seed=seed)
    params.update(overrides)
    return SimSpec(**params)


class TestDeterminism:
    def test_same_seed_same_data(self):
        a = generate(spec(42))
        b = generate(spec(42))
        assert a == b

    def test_different_seeds_differ(self):
        assert generate(spec(1)).times != generate(spec(2)).times

    def test_component_id_carried(self):
        ds = generate(spec(7, component_id="api"))
        assert ds.component_id == "api"


class TestSampleValidity:
    @pytest.mark.parametrize("seed", range(5))
    def test_times_strictly_increasing_in_window(self, seed):
        ds = generate(spec(seed))
        t = np.array(ds.times)
        assert np.all(t > 0.0)
        assert np.all(t <= T)
        assert np.all(np.diff(t) > 0.0)

    def test_large_rate_concentrates_early(self):
        ds = generate(SimSpec(50.0, 1e-2, 91208.0, seed=3))
        t = np.array(ds.times)
        # mean of the truncated exponential is ~1/b when b*T is huge
        assert t.mean() < 5.0 / 1e-2


class TestDistribution:
    def test_count_mean_within_three_se(self):
        runs = 1000
        expect = V0 * -math.expm1(-B * T)
        counts = np.array([len(generate(spec(s)).times) for s in range(runs)])
        se = math.sqrt(expect / runs)  # Poisson variance equals the mean
        assert abs(counts.mean() - expect) < 3.0 * se

    def test_times_follow_truncated_exponential(self):
        c = -math.expm1(-B * T)

        def cdf(t):
            return -np.expm1(-B * np.asarray(t)) / c

        pooled = np.concatenate(
            [np.array(generate(spec(1000 + s)).times) for s in range(40)]
        )
        p = stats.kstest(pooled, cdf).pvalue
        assert p > 0.01


class TestSpec:
    def test_json_round_trip(self):
        s = spec(9, component_id="db")
        back = SimSpec.from_json(json.dumps(s.__dict__))
        assert back == s

    def test_from_json_obj_rejects_extras(self):
        with pytest.raises(ValidationError):
            SimSpec.from_json_obj(
                {"v0": 1.0, "b": 1.0, "end_of_test": 1.0, "seed": 0, "bogus": 1}
            )

    @pytest.mark.parametrize(
        "kw",
        [
            {"v0": 0.0},
            {"v0": -1.0},
            {"b": 0.0},
            {"end_of_test": 0.0},
            {"seed": -1},
            {"seed": 1.5},
        ],
    )
    def test_invalid_parameters(self, kw):
        params = dict(v0=V0, b=B, end_of_test=T, seed=0)
        params.update(kw)
        with pytest.raises(ValidationError):
            generate(SimSpec(**params))
