import random
from datetime import datetime, timedelta, timezone

import pytest

from clintext import errors
from clintext.cohort import (ClinicalEvent, EligibilityRule, EligibilityResult,
                             evaluate_cohort, evaluate_eligibility,
                             load_events_csv, screening_concordance,
                             wilson_interval, write_results_csv)

from oracles import eligibility_minute_scan


def ts(h, m=0, day=1):
    return datetime(2021, 6, day, h, m, tzinfo=timezone.utc)


def ev(cui, when, pid="p1"):
    return ClinicalEvent(pid, cui, when)


RULE_AB = EligibilityRule(inclusion=frozenset({"A", "B"}),
                          window=timedelta(hours=1))


class TestEvaluateEligibility:
    def test_both_within_window(self):
        res = evaluate_eligibility([ev("A", ts(10, 0)), ev("B", ts(10, 30))],
                                   RULE_AB)
        assert res.eligible
        assert res.index_date == ts(10, 30)

    def test_window_exceeded(self):
        res = evaluate_eligibility([ev("A", ts(10, 0)), ev("B", ts(11, 30))],
                                   RULE_AB)
        assert res == EligibilityResult(False, None)

    def test_boundary_exactly_window_apart(self):
        res = evaluate_eligibility([ev("A", ts(10, 0)), ev("B", ts(11, 0))],
                                   RULE_AB)
        assert res.eligible
        assert res.index_date == ts(11, 0)

    def test_exclusion_full_history_dominates(self):
        rule = EligibilityRule(inclusion=frozenset({"A"}),
                               exclusion=frozenset({"X"}),
                               window=timedelta(hours=1))
        events = [ev("X", ts(8, 0)), ev("A", ts(10, 0))]
        assert not evaluate_eligibility(events, rule).eligible

    def test_exclusion_window_only_mode(self):
        rule = EligibilityRule(inclusion=frozenset({"A"}),
                               exclusion=frozenset({"X"}),
                               window=timedelta(hours=1),
                               exclusion_window_only=True)
        events = [ev("X", ts(8, 0)), ev("A", ts(10, 0))]
        res = evaluate_eligibility(events, rule)
        assert res.eligible and res.index_date == ts(10, 0)

    def test_future_exclusion_does_not_block(self):
        rule = EligibilityRule(inclusion=frozenset({"A"}),
                               exclusion=frozenset({"X"}))
        events = [ev("A", ts(10, 0)), ev("X", ts(12, 0))]
        res = evaluate_eligibility(events, rule)
        assert res.eligible and res.index_date == ts(10, 0)

    def test_no_events_not_eligible(self):
        assert not evaluate_eligibility([], RULE_AB).eligible

    def test_earliest_index_date(self):
        events = [ev("A", ts(9, 0)), ev("B", ts(9, 20)),
                  ev("A", ts(14, 0)), ev("B", ts(14, 5))]
        assert evaluate_eligibility(events, RULE_AB).index_date == ts(9, 20)

    def test_mixed_patients_rejected(self):
        with pytest.raises(errors.MixedPatients):
            evaluate_eligibility([ev("A", ts(10)), ev("B", ts(10), pid="p2")],
                                 RULE_AB)

    def test_rule_validation(self):
        with pytest.raises(ValueError):
            EligibilityRule(inclusion=frozenset())
        with pytest.raises(ValueError):
            EligibilityRule(inclusion=frozenset({"A"}), exclusion=frozenset({"A"}))
        with pytest.raises(ValueError):
            EligibilityRule(inclusion=frozenset({"A"}), window=timedelta(0))

    def test_from_dict(self):
        rule = EligibilityRule.from_dict(
            {"inclusion": ["A"], "exclusion": ["X"], "window_minutes": 30})
        assert rule.window == timedelta(minutes=30)
        assert rule.exclusion == frozenset({"X"})


def random_patient_events(rng, pid):
    cuis = ["A", "B", "X"]
    base = datetime(2021, 1, 1, tzinfo=timezone.utc)
    return [ClinicalEvent(pid, rng.choice(cuis),
                          base + timedelta(minutes=rng.randrange(0, 60 * 48)))
            for _ in range(rng.randrange(0, 9))]


class TestMinuteScanOracle:
    @pytest.mark.parametrize("window_only", [False, True])
    def test_random_patients_match_oracle(self, window_only):
        rng = random.Random(11)
        rule = EligibilityRule(inclusion=frozenset({"A", "B"}),
                               exclusion=frozenset({"X"}),
                               window=timedelta(hours=2),
                               exclusion_window_only=window_only)
        for i in range(200):
            events = random_patient_events(rng, f"p{i}")
            res = evaluate_eligibility(events, rule)
            oracle = eligibility_minute_scan(
                [(e.cui, e.timestamp) for e in events],
                rule.inclusion, rule.exclusion, rule.window,
                exclusion_window_only=window_only)
            assert res.eligible == (oracle is not None)
            if res.eligible:
                assert res.index_date == oracle

    def test_translation_invariance(self):
        rng = random.Random(3)
        rule = RULE_AB
        shift = timedelta(days=40, minutes=17)
        for i in range(50):
            events = random_patient_events(rng, f"p{i}")
            moved = [ClinicalEvent(e.patient_id, e.cui, e.timestamp + shift)
                     for e in events]
            a = evaluate_eligibility(events, rule)
            b = evaluate_eligibility(moved, rule)
            assert a.eligible == b.eligible
            if a.eligible:
                assert b.index_date == a.index_date + shift

    def test_window_monotonicity(self):
        rng = random.Random(4)
        small = EligibilityRule(inclusion=frozenset({"A", "B"}),
                                window=timedelta(minutes=45))
        large = EligibilityRule(inclusion=frozenset({"A", "B"}),
                                window=timedelta(hours=6))
        for i in range(50):
            events = random_patient_events(rng, f"p{i}")
            if evaluate_eligibility(events, small).eligible:
                assert evaluate_eligibility(events, large).eligible


class TestCohort:
    def test_partition_by_patient(self):
        events = [ev("A", ts(10, 0)), ev("B", ts(10, 30)),
                  ev("A", ts(10, 0), pid="p2")]
        results = evaluate_cohort(events, RULE_AB)
        assert results["p1"].eligible
        assert not results["p2"].eligible

    def test_csv_roundtrip(self, tmp_path):
        src = tmp_path / "events.csv"
        src.write_text("patient_id,cui,timestamp,doc_id\n"
                       "p1,A,2021-06-01T10:00:00Z,d1\n"
                       "p1,B,2021-06-01T10:30:00Z,d2\n")
        events = load_events_csv(src)
        assert len(events) == 2
        results = evaluate_cohort(events, RULE_AB)
        out = tmp_path / "results.csv"
        write_results_csv(results, out)
        assert out.read_text().splitlines() == [
            "patient_id,eligible,index_date",
            "p1,true,2021-06-01T10:30:00Z",
        ]


class TestWilson:
    def test_nine_of_ten(self):
        lo, hi = wilson_interval(9, 10)
        assert lo == pytest.approx(0.596, abs=0.001)
        assert hi == pytest.approx(0.982, abs=0.001)

    def test_zero_n(self):
        assert wilson_interval(0, 0) == (0.0, 0.0)

    def test_bounds_within_unit_interval(self):
        for s in range(0, 21):
            lo, hi = wilson_interval(s, 20)
            assert 0.0 <= lo <= hi <= 1.0

    def test_contains_point_estimate(self):
        for s, n in ((1, 7), (5, 9), (14, 30)):
            lo, hi = wilson_interval(s, n)
            assert lo < s / n < hi

    def test_quadratic_root_oracle(self):
        # interval endpoints solve (p - x)^2 = z^2 x (1 - x) / n
        z = 1.959963984540054
        for s, n in ((3, 11), (9, 10), (17, 40)):
            p = s / n
            for x in wilson_interval(s, n):
                assert (p - x) ** 2 == pytest.approx(z * z * x * (1 - x) / n,
                                                     abs=1e-12)


class TestScreeningConcordance:
    def test_counts_and_sensitivity(self):
        auto = {"p1": ts(9, day=2), "p2": ts(9, day=5), "p3": ts(9, day=9),
                "p5": ts(9, day=1)}
        manual = {"p1": ts(15, day=3), "p2": ts(8, day=5), "p3": ts(9, day=7),
                  "p4": ts(9, day=2)}
        r = screening_concordance(auto, manual)
        assert r["sensitivity"] == pytest.approx(3 / 4)
        assert (r["n_auto_earlier"], r["n_equal"], r["n_manual_earlier"]) == (1, 1, 1)
        assert r["n_both"] == 3
        assert r["wilson_95_ci"] == wilson_interval(3, 4)

    def test_empty_manual_rejected(self):
        with pytest.raises(errors.EmptyManualSet):
            screening_concordance({"p1": ts(9)}, {})

    def test_day_resolution(self):
        r = screening_concordance({"p1": ts(23, 59)}, {"p1": ts(0, 0)})
        assert r["n_equal"] == 1
