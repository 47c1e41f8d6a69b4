import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_instance
from lastsuccess.bounds import (
    BoundCase,
    LemmaDomain,
    bound_report,
    classify_and_bound,
    eme_instance,
    lemma_menor1_holds,
    lemma_menor2_holds,
    menor2_x_max,
    menos1_finite_bound,
    minimizer_instance,
    variant1_bound,
)
from lastsuccess.core import solve, suffix_stats, validate_instance
from lastsuccess.exceptions import BoundViolation, DomainViolation

E = math.e


def report_for(probs, check=True):
    inst = validate_instance(probs)
    sol, stats = solve(inst), suffix_stats(inst)
    rep = classify_and_bound(sol, stats, check=check)
    return variant1_bound(sol, stats, rep, check=check)


class TestClassify:
    def test_below_one(self):
        rep = report_for([0.1, 0.1])
        assert rep.case_label is BoundCase.R1_BELOW_ONE
        assert rep.standard_bounds["menos1_finite"] == pytest.approx(0.18, abs=1e-15)
        assert rep.gaps["menos1_finite"] == pytest.approx(0.0, abs=1e-12)
        assert rep.standard_bounds["menos1_exp"] == pytest.approx((2 / 9) * math.exp(-2 / 9), abs=1e-15)
        assert rep.standard_bounds["menos1_exp"] == pytest.approx(0.17794, abs=1e-5)

    def test_at_least_one(self):
        rep = report_for([0.5, 0.5])
        assert rep.case_label is BoundCase.RS_AT_LEAST_ONE_FINITE
        assert rep.standard_bounds["mas1"] == 0.5 and rep.gaps["mas1"] == 0.0
        assert rep.standard_bounds["one_over_e"] == pytest.approx(0.36788, abs=1e-5)
        assert rep.standard_bounds["bruss_exp"] == pytest.approx(1 / E, abs=1e-15)

    def test_infinite(self):
        rep = report_for([1.0, 0.3])
        assert rep.case_label is BoundCase.RS_INFINITE
        assert rep.standard_bounds["inf_case"] == pytest.approx(0.7, abs=1e-15)
        assert rep.gaps["inf_case"] == pytest.approx(0.0, abs=1e-12)
        assert rep.variant1_bounds == {}

    def test_last_trial_certain(self):
        rep = report_for([0.3, 1.0])
        assert rep.standard_bounds["inf_case"] == 1.0 and rep.value == 1.0

    def test_as_dict(self):
        d = report_for([0.1, 0.1]).as_dict()
        assert d["case"] == "R1_BelowOne"
        assert set(d["bounds"]) == {"menos1_finite", "menos1_exp", "v1_low_finite", "v1_low_exp", "v1_floor"}


class TestVariant1:
    def test_below_one(self):
        rep = report_for([0.1, 0.1])
        assert rep.variant1_bounds["v1_low_finite"] == pytest.approx(0.18 / 0.19, abs=1e-12)
        assert rep.variant1_value == pytest.approx(0.18 / 0.19, abs=1e-12)
        assert rep.variant1_bounds["v1_low_exp"] == pytest.approx(0.893001, abs=1e-6)
        assert rep.variant1_bounds["v1_floor"] == pytest.approx(0.58198, abs=1e-5)

    def test_rs_at_least_one(self):
        rep = report_for([0.5, 0.5])
        assert rep.variant1_bounds["v1_high"] == pytest.approx(1 / (E - 1), abs=1e-15)
        assert rep.variant1_value > rep.variant1_bounds["v1_high"]

    def test_two_thirds(self):
        rep = report_for([1 / 3, 1 / 3])
        assert rep.variant1_value == pytest.approx(0.8, abs=1e-14)

    def test_claimed_bound_fails_on_three_halves(self):
        # V* = 4/7 while the R_s >= 1 Variant I bound claims 1/(e(1-1/e)) = 0.58198
        with pytest.raises(BoundViolation) as exc:
            report_for([0.5, 0.5, 0.5])
        assert exc.value.name == "v1_high"
        rep = report_for([0.5, 0.5, 0.5], check=False)
        assert rep.variant1_value == pytest.approx(4 / 7, abs=1e-15)
        assert rep.violations() == {"v1_high": pytest.approx(4 / 7 - 1 / (E - 1), abs=1e-15)}


class TestMinimizer:
    @pytest.mark.parametrize("R, n, x", [(2 / 9, 2, 0.1), (1.0, 1, 0.5), (1.0, 2, 1 / 3)])
    def test_examples(self, R, n, x):
        assert minimizer_instance(R, n).probs == pytest.approx((x,) * n, abs=1e-15)

    def test_certain_prefix(self):
        inst = minimizer_instance(0.5, 3, s_offset=1)
        assert inst.probs[0] == 1.0 and len(inst) == 4
        rep = report_for(inst)
        assert rep.case_label is BoundCase.RS_INFINITE
        assert rep.gaps["inf_case"] == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("R", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("n", [1, 2, 5, 10])
    def test_sharp(self, R, n):
        rep = report_for(minimizer_instance(R, n))
        assert abs(rep.gaps["menos1_finite"]) <= 1e-12
        assert abs(rep.gaps["v1_low_finite"]) <= 1e-12

    def test_rejects(self):
        with pytest.raises(DomainViolation):
            minimizer_instance(0.0, 2)


class TestEme:
    @pytest.mark.parametrize("m", range(2, 51))
    def test_mas1_sharp_with_prefix(self, m):
        inst = eme_instance(m, prefix=(0.9,))
        rep = classify_and_bound(solve(inst), suffix_stats(inst))
        assert rep.case_label is BoundCase.RS_AT_LEAST_ONE_FINITE
        assert abs(rep.gaps["mas1"]) <= 1e-12


class TestBoundOrdering:
    @given(st.floats(min_value=1e-6, max_value=1 - 1e-9), st.integers(min_value=1, max_value=2000))
    def test_finite_above_exp(self, R, n):
        assert menos1_finite_bound(R, n) > R * math.exp(-R)

    @pytest.mark.parametrize("R", [0.05, 0.3, 0.7, 0.99])
    def test_monotone_in_n(self, R):
        seq = [menos1_finite_bound(R, n) for n in (1, 10, 100, 1000)]
        assert all(a >= b for a, b in zip(seq, seq[1:]))
        assert seq[-1] - R * math.exp(-R) < 1e-3


class TestLemmas:
    @pytest.mark.parametrize("p, X", [(0.5, 1.0), (0.9, 1.0), (0.5, 2.0)])
    def test_menor1_examples(self, p, X):
        assert lemma_menor1_holds(LemmaDomain(p, X))

    @pytest.mark.parametrize("p, P, X", [(0.3, 0.5, 2.0), (0.3, 0.5, 1.0), (0.49, 0.5, 1.5)])
    def test_menor2_examples(self, p, P, X):
        assert lemma_menor2_holds(LemmaDomain(p, X, P))

    def test_x_max(self):
        for P in (0.5, 0.9770624455893798, 0.999999):
            X = menor2_x_max(P)
            assert X * (1 - P) <= 1 + 1e-15
            assert math.nextafter(X, math.inf) * (1 - P) > 1 - 1e-15

    def test_menor2_boundary_near_one(self):
        # float LHS overshoots 1 here; the exact re-evaluation settles it
        P = 0.999999
        assert lemma_menor2_holds(LemmaDomain(0.5, menor2_x_max(P), P))

    def test_domain_violations(self):
        with pytest.raises(DomainViolation):
            lemma_menor2_holds(LemmaDomain(0.6, 1.5, 0.5))
        with pytest.raises(DomainViolation):
            lemma_menor2_holds(LemmaDomain(0.3, 2.5, 0.5))
        with pytest.raises(DomainViolation):
            lemma_menor1_holds(LemmaDomain(0.3, 0.5))

    @given(st.floats(min_value=1e-9, max_value=1 - 1e-9), st.floats(min_value=1.0, max_value=1e9))
    @settings(max_examples=500)
    def test_menor1_property(self, p, X):
        assert lemma_menor1_holds(LemmaDomain(p, X))

    @given(st.data())
    @settings(max_examples=500)
    def test_menor2_property(self, data):
        P = data.draw(st.floats(min_value=1e-6, max_value=1 - 1e-9))
        p = data.draw(st.floats(min_value=1e-9, max_value=P).filter(lambda v: v < P))
        X = data.draw(st.floats(min_value=1.0, max_value=menor2_x_max(P)))
        assert lemma_menor2_holds(LemmaDomain(p, X, P))


def test_random_bounds_hold_except_v1_high(rng):
    for _ in range(2000):
        rep = bound_report(validate_instance(random_instance(rng)), check=False)
        assert set(rep.violations()) <= {"v1_high"}
