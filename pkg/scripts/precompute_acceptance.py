#!/usr/bin/env python3
"""Fill the acceptance-test result cache ahead of a pytest run.

The acceptance suite reruns every corpus point on a cache miss, which is
correct but slow; this script does the same work up front so the suite
is fast and repeatable.  Safe to interrupt and resume: finished points
are skipped.

    python3 scripts/precompute_acceptance.py             # everything
    python3 scripts/precompute_acceptance.py --only lih  # one molecule
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from _acceptance_lib import cache_path, corpus_rows, get_point  # noqa: E402

# cheapest molecules first so partial runs cover as much as possible
MOLECULE_ORDER = ["h2", "h4_linear", "h4_ring", "lih", "h6", "h2o"]
METHODS = ["plain", "sa", "sa-saf"]
ML_LABELS = {"lih"}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--only", action="append", help="restrict to molecule label(s)")
    args = parser.parse_args(argv)

    rows = corpus_rows()
    rows.sort(key=lambda r: (MOLECULE_ORDER.index(r["label"]), r["index"]))
    if args.only:
        rows = [r for r in rows if r["label"] in set(args.only)]

    t_start = time.time()
    n_done = 0
    for row in rows:
        methods = METHODS + (["ml"] if row["label"] in ML_LABELS else [])
        for method in methods:
            tag = f"{row['label']} {row['index']:02d} d={row['bond_length']:.4f} {method:7s}"
            if cache_path(row, method).exists():
                print(f"[skip] {tag}", flush=True)
                continue
            t0 = time.time()
            record = get_point(row, method)
            n_done += 1
            print(
                f"[done] {tag} E={record['e_vqe']: .8f} "
                f"params {record['n_params_initial']}->{record['n_params_final']} "
                f"iters {record['n_iterations']} ({time.time() - t0:.1f}s)",
                flush=True,
            )
    print(f"computed {n_done} points in {(time.time() - t_start) / 60:.1f} min")
    return 0


if __name__ == "__main__":
    sys.exit(main())
