# ---------------------------------------------------------------------------
# cli/02_make_synthetic.py
# ---------------------------------------------------------------------------
# Write a synthetic load-path CSV from the closed-form failure oracle,
# plus a ready-to-run config that points at it.
#
# Concept:
# - Each sampled strain becomes a two-increment radial path.
# - --schema raw emits displacements/forces instead of strains/stresses,
#   which exercises the homogenization route of the label stage.
# ---------------------------------------------------------------------------

"""
python3 cli/02_make_synthetic.py --n 1000 --out output/synthetic
python3 cli/03_run_pipeline.py --config output/synthetic/config.json
"""

import argparse
from pathlib import Path

from utils import banner, footer, row
from ohcsvm.constants_config import FAILED, RED, RESET
from ohcsvm.data_pipeline import export_paths
from ohcsvm.errors import OhcSvmError
from ohcsvm.reports import write_frame, write_json
from ohcsvm.synthetic import synth_load_paths_raw, synth_oracle_dataset


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Generate synthetic open-hole load paths with closed-form labels."
    )
    parser.add_argument("--n", type=int, default=1000, help="Number of paths (default: 1000).")
    parser.add_argument("--seed", type=int, default=0, help="Sampling seed (default: 0).")
    parser.add_argument(
        "--schema",
        choices=("homogenized", "raw"),
        default="homogenized",
        help="CSV schema to write (default: homogenized).",
    )
    parser.add_argument(
        "--out",
        type=Path,
        default=Path("output/synthetic"),
        help="Directory for paths.csv and config.json (default: output/synthetic).",
    )
    return parser.parse_args()


def starter_config(csv_name: str, schema: str, seed: int, out: Path) -> dict:
    return {
        "schema_version": 1,
        "input": {"files": [csv_name], "format": schema},
        "kernels": [
            {"name": "rbf", "kind": "rbf", "gamma": 1.0, "train": True},
            {"name": "he2_W3D1", "kind": "he2", "width": 3, "depth": 1, "train": True},
        ],
        "svm": {"c_grid": [1.0, 10.0, 100.0, 1000.0]},
        "seeds": {
            "split_seed": seed,
            "theta_seed": seed,
            "adam_seed": seed,
            "cv_seed": seed,
            "synth_seed": seed,
        },
        "output_dir": str(out / "run"),
    }


def main() -> int:
    args = parse_args()

    banner("Synthetic failure-oracle load paths")
    row("Paths", args.n)
    row("Seed", args.seed)
    row("Schema", args.schema)

    try:
        ds = synth_oracle_dataset(args.n, seed=args.seed)
    except OhcSvmError as exc:
        print(f"\n{RED}[!] {exc}{RESET}")
        return 2

    csv_file = args.out / "paths.csv"
    if args.schema == "raw":
        write_frame(synth_load_paths_raw(ds.paths), csv_file)
    else:
        export_paths(ds.paths, csv_file)

    # The oracle labels only the terminal increment; baselines are always non-failed
    config_file = write_json(
        starter_config(csv_file.name, args.schema, args.seed, args.out), args.out / "config.json"
    )

    n_failed = int((ds.y == FAILED).sum())
    row("Failed samples", f"{n_failed} of {len(ds)}")
    row("Paths CSV", csv_file)
    row("Config", config_file)
    footer()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
