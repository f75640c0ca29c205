"""De-identify clinical text and evaluate trial eligibility over extracted
events, ending with screening-concordance statistics.

Run with: python3 demos/03_deid_and_cohort.py
"""

from datetime import datetime, timedelta, timezone

from clintext.cohort import (ClinicalEvent, EligibilityRule, evaluate_cohort,
                             screening_concordance)
from clintext.deid import DeidConfig, deid_text, detect_phi


def main():
    # --- de-identification -------------------------------------------------
    config = DeidConfig(name_dictionary={"john", "smith", "parkinson"},
                        safe_list={"parkinson"})
    note = ("Seen by Dr John Smith on 03/04/2019. NHS 123 456 7890, "
            "contact 020 7946 0000, j.smith@hospital.nhs.uk, NW1 2BU. "
            "Parkinson's disease stable in this 92 year old.")
    print("original:\n ", note)
    for span in detect_phi(note, config):
        print(f"  [{span.category:>12}] {span.start}-{span.end} {span.matched!r}")
    print("redacted:\n ", deid_text(note, config))
    # note: the safe list keeps the eponym "Parkinson's disease" intact

    # --- eligibility -------------------------------------------------------
    def at(day, hour, minute=0):
        return datetime(2021, 6, day, hour, minute, tzinfo=timezone.utc)

    events = [
        # p1: infection marker and hypotension within an hour -> eligible
        ClinicalEvent("p1", "INFECTION", at(1, 10)),
        ClinicalEvent("p1", "HYPOTENSION", at(1, 10, 30)),
        # p2: markers 3 hours apart -> never co-occur in the window
        ClinicalEvent("p2", "INFECTION", at(1, 8)),
        ClinicalEvent("p2", "HYPOTENSION", at(1, 11)),
        # p3: would qualify, but has a prior exclusion event
        ClinicalEvent("p3", "DNR", at(1, 6)),
        ClinicalEvent("p3", "INFECTION", at(1, 9)),
        ClinicalEvent("p3", "HYPOTENSION", at(1, 9, 15)),
    ]
    rule = EligibilityRule(inclusion=frozenset({"INFECTION", "HYPOTENSION"}),
                           exclusion=frozenset({"DNR"}),
                           window=timedelta(hours=1))
    print("\neligibility (inclusion within 1h window, exclusion any time before):")
    results = evaluate_cohort(events, rule)
    for pid, res in results.items():
        when = res.index_date.isoformat() if res.index_date else "-"
        print(f"  {pid}: eligible={res.eligible}  index_date={when}")

    # --- screening concordance --------------------------------------------
    auto = {pid: res.index_date for pid, res in results.items() if res.eligible}
    manual = {"p1": at(1, 10, 30), "p3": at(1, 9, 15)}
    stats = screening_concordance(auto, manual)
    lo, hi = stats["wilson_95_ci"]
    print(f"\nvs manual screening: sensitivity={stats['sensitivity']:.2f} "
          f"(95% CI {lo:.3f}-{hi:.3f}), "
          f"earlier/equal/later = {stats['n_auto_earlier']}/"
          f"{stats['n_equal']}/{stats['n_manual_earlier']}")


if __name__ == "__main__":
    main()
