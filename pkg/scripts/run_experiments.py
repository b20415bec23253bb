"""Run the shipped reference configurations and ablation tables for every dataset found.

Writes ``<out>/summary.md`` with one row per dataset and the ablation table
(no-log / log error per variant). Datasets whose files are missing are listed
as skipped.

    python scripts/run_experiments.py --out runs/experiments [--desk] [--no-ablation]
"""

import argparse
import json
import time
from pathlib import Path

from mdscat import config, pipeline
from mdscat.errors import DataError


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/experiments"))
    ap.add_argument("--data-root", type=Path)
    ap.add_argument("--desk", action="store_true", help="use the reduced configs where they exist")
    ap.add_argument("--no-ablation", action="store_true")
    ap.add_argument("--datasets", nargs="*", default=list(config.DATASETS))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    rows = ["| dataset | config | error % | seconds |", "|---|---|---|---|"]
    ablation_rows = ["| dataset | " + " | ".join(config.VARIANTS) + " |",
                     "|---|" + "---|" * len(config.VARIANTS)]
    results = {}
    for name in args.datasets:
        cfg_name = f"{name}_desk" if args.desk and f"{name}_desk" in config.shipped_configs() else name
        cfg = config.reference_config(cfg_name)
        try:
            parts = pipeline.load_data(cfg, args.data_root)
        except DataError as exc:
            rows.append(f"| {name} | {cfg_name} | skipped: {exc} | |")
            continue
        start = time.perf_counter()
        report = pipeline.run(cfg, parts=parts)
        report.write(args.out / f"{cfg_name}-{cfg.config_hash()}")
        rows.append(f"| {name} | {cfg_name} | {report.data['error_pct']:.2f} | {time.perf_counter() - start:.1f} |")
        results[cfg_name] = report.data
        if not args.no_ablation:
            table = pipeline.ablation(cfg, parts=parts)
            results[cfg_name + "-ablation"] = table
            cells = " | ".join(f"{table[v]['nolog']:.2f} / {table[v]['log']:.2f}" for v in config.VARIANTS)
            ablation_rows.append(f"| {name} | {cells} |")
        print(rows[-1], flush=True)

    text = "# Reference runs\n\n" + "\n".join(rows) + "\n"
    if not args.no_ablation:
        text += "\n# Ablation (error %, no log / log)\n\n" + "\n".join(ablation_rows) + "\n"
    (args.out / "summary.md").write_text(text)
    (args.out / "summary.json").write_text(json.dumps(results, indent=2, sort_keys=True) + "\n")
    print(text)


if __name__ == "__main__":
    main()
