"""Recompute the throughput table from the pipeline model and compare to the published rows."""
import argparse
from pathlib import Path

from easi_smbgd import output


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results/table1"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    print(output.table1_report(out_dir=args.out))


if __name__ == "__main__":
    main()
