"""Run the Hardy-inequality grid and print the summary plus the tightest rows.

    python3 scripts/run_acceptance_grid.py [--jobs N] [--out DIR]
"""

import argparse
import time
from pathlib import Path

from orlicz_hardy.cli import parse_config, rows_to_csv, run_campaign, summarize

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(ROOT / "configs" / "acceptance_grid.json"))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default=str(ROOT / "out" / "acceptance_grid"))
    ap.add_argument("--top", type=int, default=10)
    args = ap.parse_args()

    cfg = parse_config(Path(args.config).read_text())
    t0 = time.perf_counter()
    rows, _ = run_campaign(cfg, jobs=args.jobs)
    elapsed = time.perf_counter() - t0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(rows_to_csv(rows))
    print(summarize(rows), end="")
    print(f"elapsed: {elapsed:.1f}s")
    ok = sorted((r for r in rows if r["status"] == "ok"), key=lambda r: -float(r["ratio"]))
    print(f"\ntightest {args.top} rows:")
    for r in ok[: args.top]:
        print(f"  {r['ratio']:>14}  {r['name']:<22} {r['g_kind']:<32} s={r['s']:<8} {r['item']}")


if __name__ == "__main__":
    main()
