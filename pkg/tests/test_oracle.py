import math

import pytest

from conftest import brute_optimal, brute_threshold_value, random_instance
from lastsuccess.core import extend_game, solve, suffix_stats, validate_instance
from lastsuccess.exceptions import Mismatch, TooLarge
from lastsuccess.oracle import cross_validate, dp_optimal, enumerate_value, threshold_sweep


class TestEnumerate:
    @pytest.mark.parametrize("probs, k, expected", [([0.5, 0.5], 2, 0.5), ([0.5, 0.5], 1, 0.5), ([1.0], 1, 1.0)])
    def test_examples(self, probs, k, expected):
        assert enumerate_value(validate_instance(probs), k) == pytest.approx(expected, abs=1e-15)

    def test_against_brute(self, rng):
        for _ in range(40):
            probs = random_instance(rng, n_max=9)
            inst = validate_instance(probs)
            for k in range(1, inst.n + 1):
                assert enumerate_value(inst, k) == pytest.approx(brute_threshold_value(probs, k), abs=1e-13)

    def test_closed_form(self, rng):
        for _ in range(100):
            inst = validate_instance(random_instance(rng, allow_one=False))
            st_ = suffix_stats(inst)
            for k in range(1, inst.n + 1):
                closed = st_.Q(k) * st_.R(k)
                assert abs(enumerate_value(inst, k) - closed) <= 1e-12 * max(1.0, closed)

    def test_chunked_path(self):
        # 2^17 outcomes spans two enumeration chunks
        probs = [0.05] * 17
        st_ = suffix_stats(validate_instance(probs))
        assert enumerate_value(validate_instance(probs), 1) == pytest.approx(st_.Q(1) * st_.R(1), rel=1e-12)

    def test_too_large(self):
        with pytest.raises(TooLarge):
            enumerate_value(validate_instance([0.5] * 25), 1)


class TestDP:
    def test_half_half(self):
        dp = dp_optimal(validate_instance([0.5, 0.5]))
        assert dp.value == 0.5
        assert dp.stop_set == (1, 2) and dp.ties == (1,)
        assert dp.min_strict_stop == 2

    def test_secretary(self):
        dp = dp_optimal(validate_instance([1 / i for i in range(1, 11)]))
        assert dp.value == pytest.approx(0.398690, abs=1e-6)
        assert dp.min_strict_stop == 4

    def test_certain(self):
        assert dp_optimal(validate_instance([1.0, 0.3])).value == pytest.approx(0.7, abs=1e-15)

    def test_equals_best_threshold(self, rng):
        for _ in range(300):
            inst = validate_instance(random_instance(rng))
            dp = dp_optimal(inst)
            sweep = threshold_sweep(inst)
            assert abs(dp.value - sweep.best_value) <= 1e-12 * max(1.0, dp.value)
            # stop set is an up-set {a, ..., n}
            assert dp.stop_set == tuple(range(dp.stop_set[0], inst.n + 1))
            if not dp.ties:
                assert dp.stop_set[0] == solve(inst).threshold

    def test_extension_never_helps(self, rng):
        checked = 0
        for _ in range(300):
            inst = validate_instance(random_instance(rng))
            sol = solve(inst)
            if inst.probs[sol.threshold - 1] == 1.0 or sol.r1 < 1.0:
                continue
            ext = extend_game(inst, sol.threshold)
            assert dp_optimal(ext).value <= dp_optimal(inst).value + 1e-12
            checked += 1
        assert checked > 50


class TestSweep:
    def test_mal_counterexample(self):
        sweep = threshold_sweep(validate_instance([0.33] * 10))
        assert 8 in sweep.argmax_set and 9 not in sweep.argmax_set
        assert sweep.values[7] == pytest.approx(0.444411, abs=1e-12)
        assert sweep.values[8] == pytest.approx(brute_threshold_value([0.33] * 10, 9), abs=1e-12)
        assert sweep.values[7] - sweep.values[8] == pytest.approx(2.211e-3, abs=1e-9)

    def test_interior_tie(self):
        sweep = threshold_sweep(validate_instance([0.5, 0.5]))
        assert sweep.values == (0.5, 0.5)
        assert sweep.argmax_set == (1, 2)

    def test_below_one(self):
        assert threshold_sweep(validate_instance([0.1, 0.1])).argmax_set == (1,)

    def test_certain_tail_uses_enumeration(self):
        probs = [0.4, 1.0, 0.2]
        sweep = threshold_sweep(validate_instance(probs))
        _, brute = brute_optimal(probs)
        assert sweep.values == pytest.approx(brute, abs=1e-15)


class TestCrossValidate:
    @pytest.mark.parametrize("probs, value", [([1 / 3, 1 / 3], 4 / 9), ([1.0], 1.0)])
    def test_examples(self, probs, value):
        v = cross_validate(validate_instance(probs))
        assert v.ok
        assert v.value == pytest.approx(value, abs=1e-15)
        assert v.dp_value == pytest.approx(value, abs=1e-15)
        assert v.enumeration_value == pytest.approx(value, abs=1e-15)

    def test_seeded_random(self, rng):
        for _ in range(200):
            assert cross_validate(validate_instance(random_instance(rng))).ok

    def test_skips_enumeration_above_cap(self):
        v = cross_validate(validate_instance([0.2] * 30), max_n_enumerate=24)
        assert v.ok and v.enumeration_value is None

    def test_mismatch_payload(self, monkeypatch):
        import lastsuccess.oracle as oracle

        real = oracle.dp_optimal

        def skewed(inst):
            r = real(inst)
            return type(r)(r.value + 1e-6, r.stop_set, r.ties, r.continuation)

        monkeypatch.setattr(oracle, "dp_optimal", skewed)
        with pytest.raises(Mismatch) as exc:
            cross_validate(validate_instance([0.5, 0.5]))
        assert exc.value.payload["p"] == [0.5, 0.5]
        assert not cross_validate(validate_instance([0.5, 0.5]), raise_on_mismatch=False).ok
