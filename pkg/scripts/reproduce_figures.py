#!/usr/bin/env python3
"""Write the plot data behind the example phase portraits and displacement curves.

Produces, under OUT (default ``figure_data/``):
  * portrait bundles for ex1 at mu = -1, 0, 1, ex2 at mu = -1, 1 and ex3 at mu = -1, 1
  * ``ex2_displacement.csv``: (q, P(q) - q, via_sliding) for the three-cycle example
  * ``ex3_sliding_mu*.csv``: the sliding vector field sampled on the sliding segment
  * ``beb_summary.json``: focus / sliding / cycle-count panels for all three examples
"""
import argparse
import json
from pathlib import Path

from hopfbeb.cli import _clean, _csv_text, portrait
from hopfbeb.limit_cycles import beb_summary, displacement_table
from hopfbeb.model import builtin
from hopfbeb.sliding import sample_sliding_field

PORTRAITS = [("ex1", -1), ("ex1", 0), ("ex1", 1), ("ex2", -1), ("ex2", 1), ("ex3", -1), ("ex3", 1)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figure_data")
    ap.add_argument("--ring", type=int, default=12, help="initial conditions per portrait")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name, mu in PORTRAITS:
        manifest = portrait(builtin(name, mu=mu), out, args.ring)
        kinds = [f["kind"] for f in manifest["files"]]
        print(f"{name} mu={mu:+d}: {kinds.count('trajectory')} trajectories, "
              f"{kinds.count('closed_orbit')} closed orbits, "
              f"sliding: {[k for k in kinds if k.startswith('sliding')] or 'none'}")

    rows = displacement_table(builtin("ex2", mu=1), n_scan=2048)
    (out / "ex2_displacement.csv").write_text(_csv_text(rows, ["q", "displacement", "via_sliding"]))

    for mu in (-1, 1):
        rows = sample_sliding_field(builtin("ex3", mu=mu), 401)
        (out / f"ex3_sliding_mu{mu}.csv").write_text(_csv_text(rows, ["y", "g_slide", "theta", "h"]))

    summary = {name: beb_summary(builtin(name)) for name in ("ex1", "ex2", "ex3")}
    (out / "beb_summary.json").write_text(json.dumps(_clean(summary), indent=2) + "\n")
    for name, rep in summary.items():
        counts = {mu: p["cycle_count"] for mu, p in rep["panels"].items()}
        print(f"{name}: cycle counts by mu {counts}")
    print(f"wrote {len(list(out.iterdir()))} files to {out}")


if __name__ == "__main__":
    main()
