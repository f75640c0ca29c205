"""Rule-based trial eligibility over extracted clinical events, plus
screening-concordance statistics.

A patient is eligible at time t when every inclusion concept has an
event inside the moving window [t - D, t] and no exclusion concept has
any event at or before t (full-history lookback by default). The index
date is the earliest eligible t; it can only first hold at an inclusion
event time, so those are the candidate instants.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Dict, List, Optional, Set

from . import errors
from .documents import format_instant, parse_instant

# two-sided 95% normal quantile
Z_95 = 1.959963984540054


@dataclass(frozen=True)
class ClinicalEvent:
    patient_id: str
    cui: str
    timestamp: datetime
    doc_id: str = ""

    def __post_init__(self):
        if not self.cui:
            raise ValueError("cui must be non-empty")


@dataclass(frozen=True)
class EligibilityRule:
    inclusion: frozenset
    exclusion: frozenset = frozenset()
    window: timedelta = timedelta(hours=1)
    exclusion_window_only: bool = False  # default: lookback over all prior history

    def __post_init__(self):
        if not self.inclusion:
            raise ValueError("inclusion set must be non-empty")
        if self.inclusion & self.exclusion:
            raise ValueError("inclusion and exclusion sets overlap")
        if self.window <= timedelta(0):
            raise ValueError("window must be positive")

    @classmethod
    def from_dict(cls, spec: dict) -> "EligibilityRule":
        return cls(
            inclusion=frozenset(spec["inclusion"]),
            exclusion=frozenset(spec.get("exclusion", [])),
            window=timedelta(minutes=spec.get("window_minutes", 60)),
            exclusion_window_only=spec.get("exclusion_window_only", False),
        )


@dataclass(frozen=True)
class EligibilityResult:
    eligible: bool
    index_date: Optional[datetime] = None

    def __post_init__(self):
        if self.eligible != (self.index_date is not None):
            raise ValueError("eligible iff index_date present")


def _eligible_at(t: datetime, events: List[ClinicalEvent], rule: EligibilityRule) -> bool:
    lo = t - rule.window
    for cui in rule.inclusion:
        if not any(e.cui == cui and lo <= e.timestamp <= t for e in events):
            return False
    for e in events:
        if e.cui in rule.exclusion:
            if rule.exclusion_window_only:
                if lo <= e.timestamp <= t:
                    return False
            elif e.timestamp <= t:
                return False
    return True


def evaluate_eligibility(events: List[ClinicalEvent], rule: EligibilityRule) -> EligibilityResult:
    patients = {e.patient_id for e in events}
    if len(patients) > 1:
        raise errors.MixedPatients(f"events span patients {sorted(patients)}")
    candidates = sorted(e.timestamp for e in events if e.cui in rule.inclusion)
    for t in candidates:
        if _eligible_at(t, events, rule):
            return EligibilityResult(True, t)
    return EligibilityResult(False, None)


def evaluate_cohort(events: List[ClinicalEvent], rule: EligibilityRule) -> Dict[str, EligibilityResult]:
    by_patient: Dict[str, List[ClinicalEvent]] = {}
    for e in events:
        by_patient.setdefault(e.patient_id, []).append(e)
    return {pid: evaluate_eligibility(evs, rule) for pid, evs in sorted(by_patient.items())}


def wilson_interval(successes: int, n: int, z: float = Z_95) -> tuple:
    if n == 0:
        return (0.0, 0.0)
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def screening_concordance(auto: Dict[str, datetime], manual: Dict[str, datetime]) -> dict:
    """Sensitivity of the automatic screen against the manual one, with a
    Wilson 95% CI, and earlier/equal/later index-date counts over the
    intersection at day resolution."""
    if not manual:
        raise errors.EmptyManualSet("manual screening set is empty")
    both = set(auto) & set(manual)
    sensitivity = len(both) / len(manual)
    n_auto_earlier = n_equal = n_manual_earlier = 0
    for pid in both:
        auto_day = auto[pid].date()
        manual_day = manual[pid].date()
        if auto_day < manual_day:
            n_auto_earlier += 1
        elif auto_day == manual_day:
            n_equal += 1
        else:
            n_manual_earlier += 1
    lo, hi = wilson_interval(len(both), len(manual))
    return {
        "sensitivity": sensitivity,
        "wilson_95_ci": (lo, hi),
        "n_both": len(both),
        "n_auto_earlier": n_auto_earlier,
        "n_equal": n_equal,
        "n_manual_earlier": n_manual_earlier,
    }


# --- file interfaces -------------------------------------------------------

def load_events_csv(path: Path) -> List[ClinicalEvent]:
    """Read `patient_id,cui,timestamp,doc_id` rows (header optional)."""
    events = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0] == "patient_id":
                continue
            events.append(ClinicalEvent(row[0], row[1], parse_instant(row[2]),
                                        row[3] if len(row) > 3 else ""))
    return events


def write_results_csv(results: Dict[str, EligibilityResult], path: Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["patient_id", "eligible", "index_date"])
        for pid in sorted(results):
            res = results[pid]
            writer.writerow([pid, str(res.eligible).lower(),
                             format_instant(res.index_date) if res.index_date else ""])
