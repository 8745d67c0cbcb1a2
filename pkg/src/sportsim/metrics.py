"""Evaluation accumulators: success rate, distances, hits, and timings.

Accumulators are mergeable values, so trials can be accumulated per worker
shard and combined at the end; metrics with no defined trials report as
undefined rather than zero. The reference record-book constants give the
human world-record context for the measurable sports.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .envs.base import EpisodeSummary
from .errors import ConfigError

# Human world records used as reference baselines.
WORLD_RECORDS = {
    "long_jump": ("Avg Dis", 8.95, "m"),
    "high_jump": ("Avg Dis", 2.45, "m"),
    "hurdling": ("Time", 12.8, "s"),
    "javelin": ("Avg Dis", 104.8, "m"),
}


@dataclass(frozen=True)
class RecordBook:
    """Immutable per-sport world-record reference constants."""

    long_jump_m: float = 8.95
    high_jump_m: float = 2.45
    hurdling_s: float = 12.8
    javelin_m: float = 104.8

    def reference(self, sport: str):
        return {
            "long_jump": self.long_jump_m, "high_jump": self.high_jump_m,
            "hurdling": self.hurdling_s, "javelin": self.javelin_m,
        }.get(sport)


@dataclass
class MetricsAccumulator:
    """Running sums for one sport's evaluation metrics."""

    sport: str
    trials: int = 0
    success_count: int = 0
    distance_sum: float = 0.0
    distance_count: int = 0
    hits_sum: float = 0.0
    hits_count: int = 0
    error_sum: float = 0.0
    error_count: int = 0
    hit_success_count: int = 0
    hit_trials: int = 0
    time_sum: float = 0.0
    time_count: int = 0

    def record_trial(self, summary: EpisodeSummary) -> None:
        if summary.sport != self.sport:
            raise ConfigError(
                f"summary for {summary.sport!r} fed to {self.sport!r} accumulator")
        self.trials += 1
        self.success_count += int(summary.success)
        if summary.distance is not None:
            self.distance_sum += summary.distance
            self.distance_count += 1
        if summary.hits is not None:
            self.hits_sum += summary.hits
            self.hits_count += 1
            self.hit_trials += 1
            self.hit_success_count += int(summary.hits > 0)
        if summary.error_distance is not None:
            self.error_sum += summary.error_distance
            self.error_count += 1
        event_t = summary.event_time
        if summary.success and event_t is not None:
            self.time_sum += event_t
            self.time_count += 1

    def merge(self, other: "MetricsAccumulator") -> "MetricsAccumulator":
        if other.sport != self.sport:
            raise ConfigError("cannot merge accumulators for different sports")
        out = MetricsAccumulator(self.sport)
        for name in ("trials", "success_count", "distance_sum", "distance_count",
                     "hits_sum", "hits_count", "error_sum", "error_count",
                     "hit_success_count", "hit_trials", "time_sum", "time_count"):
            setattr(out, name, getattr(self, name) + getattr(other, name))
        return out

    # ------------------------------------------------------------- reporting

    def values(self) -> dict:
        """Metric values; None marks metrics with zero defined trials."""
        def ratio(num, den):
            return None if den == 0 else num / den

        return {
            "trials": self.trials,
            "suc_rate_pct": ratio(100.0 * self.success_count, self.trials),
            "avg_dis": ratio(self.distance_sum, self.distance_count),
            "avg_hits": ratio(self.hits_sum, self.hits_count),
            "error_dis": ratio(self.error_sum, self.error_count),
            "hit_rate_pct": ratio(100.0 * self.hit_success_count, self.hit_trials),
            "time_s": ratio(self.time_sum, self.time_count),
        }


METRIC_COLUMNS = (
    ("suc_rate_pct", "Suc Rate", "{:.1f}%"),
    ("avg_dis", "Avg Dis", "{:.2f}"),
    ("avg_hits", "Avg Hits", "{:.2f}"),
    ("error_dis", "Error Dis", "{:.2f}"),
    ("hit_rate_pct", "Hit Rate", "{:.1f}%"),
    ("time_s", "Time", "{:.2f}"),
)

TABLE_SCHEMA_VERSION = 1


def format_value(key: str, value) -> str:
    if value is None:
        return "-"
    for k, _, fmt in METRIC_COLUMNS:
        if k == key:
            return fmt.format(value)
    return str(value)


def report_text(accs: list[MetricsAccumulator]) -> str:
    """Aligned text table, one row per sport."""
    headers = ["Sport", "Trials"] + [h for _, h, _ in METRIC_COLUMNS]
    rows = []
    for acc in accs:
        v = acc.values()
        rows.append([acc.sport, str(v["trials"])]
                    + [format_value(k, v[k]) for k, _, _ in METRIC_COLUMNS])
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines) + "\n"


def report_csv(accs: list[MetricsAccumulator]) -> str:
    """Machine-readable table; schema version in the header row."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([f"schema_v{TABLE_SCHEMA_VERSION}", "sport", "trials"]
                    + [k for k, _, _ in METRIC_COLUMNS])
    for acc in accs:
        v = acc.values()
        writer.writerow(["", acc.sport, v["trials"]]
                        + ["" if v[k] is None else repr(v[k]) for k, _, _ in METRIC_COLUMNS])
    return buf.getvalue()
