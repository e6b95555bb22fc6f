"""Per-round metrics records and deterministic CSV/summary serialization.

Output is byte-stable for a given record sequence: fixed column order,
fixed float formatting, LF line endings, versioned header comment.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

CSV_HEADER_COMMENT = "# spchain-metrics v1"


@dataclass(frozen=True)
class MetricsRecord:
    round: int
    keyblock_pinned: int
    registers_pinned: int
    micro_txs_pinned: int
    keyblock_tps: float
    microblock_tps: float
    pinned_conflicts: int
    rejected_blocks: int
    adversary_in_group: int
    adversary_reward_share: float
    max_pin_latency: int
    stalled_txs: int


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def metrics_csv_text(records: list[MetricsRecord]) -> str:
    names = [f.name for f in fields(MetricsRecord)]
    lines = [CSV_HEADER_COMMENT, ",".join(names)]
    for rec in records:
        lines.append(",".join(_fmt(getattr(rec, name)) for name in names))
    return "\n".join(lines) + "\n"


def reputation_csv_text(rows: list[tuple[int, str, float, float, float]]) -> str:
    """rows: (round, miner_id, r1, r2, combined)."""
    lines = [CSV_HEADER_COMMENT, "round,miner_id,r1,r2,reputation"]
    for rnd, miner, r1, r2, combined in rows:
        lines.append(f"{rnd},{miner},{r1:.6f},{r2:.6f},{combined:.6f}")
    return "\n".join(lines) + "\n"


def summary_text(summary: dict) -> str:
    lines = [f"{key} = {_fmt(summary[key])}" for key in sorted(summary)]
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
