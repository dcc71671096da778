"""Results persistence and the comparison table.

Each invocation writes a fresh timestamped pair (JSONL records plus a
rendered text table), so reruns accumulate instead of overwriting.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

from rlser.experiments.evaluate import UARReport


def _fmt(mean: float, std: float | None) -> str:
    if std is None:
        return f"{mean:.2f}"
    return f"{mean:.2f} +/- {std:.2f}"


def render_table(reports: list[UARReport], subset: str = "target") -> str:
    """Rows of scenario comparisons: SL-DA vs RL-DA on one test subset, with
    the RL-DA minus SL-DA delta column."""
    by_scenario: dict[str, dict[str, UARReport]] = {}
    for r in reports:
        by_scenario.setdefault(r.scenario, {})[r.method] = r

    header = f"{'Scenario':<24} {'Scheme':<16} {'Subset':<9} {'SL-DA':>16} {'RL-DA':>16} {'Delta':>8}"
    lines = [header, "-" * len(header)]
    for scenario, methods in by_scenario.items():
        sl = methods.get("sl_da")
        rl = methods.get("rl_da")
        scheme = (rl or sl).scheme
        sl_txt = rl_txt = "-"
        delta_txt = "-"
        if sl is not None:
            sl_txt = _fmt(*sl.subset_stats(subset))
        if rl is not None:
            rl_txt = _fmt(*rl.subset_stats(subset))
        if sl is not None and rl is not None:
            delta = rl.subset_stats(subset)[0] - sl.subset_stats(subset)[0]
            delta_txt = f"{delta:.2f}"
        lines.append(f"{scenario:<24} {scheme:<16} {subset:<9} {sl_txt:>16} {rl_txt:>16} {delta_txt:>8}")
    return "\n".join(lines) + "\n"


def emit_report(reports: list[UARReport], out_dir: str | Path) -> tuple[Path, Path]:
    """Write machine-readable records and the rendered table; returns the
    two paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    records_path = out_dir / f"results-{stamp}.jsonl"
    table_path = out_dir / f"table-{stamp}.txt"
    suffix = 0
    while records_path.exists():  # same-second reruns still never overwrite
        suffix += 1
        records_path = out_dir / f"results-{stamp}-{suffix}.jsonl"
        table_path = out_dir / f"table-{stamp}-{suffix}.txt"

    with open(records_path, "w", encoding="utf-8") as fh:
        for report in reports:
            fh.write(json.dumps(report.to_record()) + "\n")

    subsets = set()
    for report in reports:
        for run in report.runs:
            subsets.update(run.subsets)
    tables = []
    for subset in sorted(subsets):
        covered = [r for r in reports if all(subset in run.subsets for run in r.runs)]
        if covered:
            tables.append(render_table(covered, subset))
    table_path.write_text("\n".join(tables), encoding="utf-8")
    return records_path, table_path


def load_reports(dir_path: str | Path) -> list[dict]:
    """Read every results-*.jsonl under a directory (for `exp report`)."""
    out = []
    for path in sorted(Path(dir_path).glob("results-*.jsonl")):
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
    return out
