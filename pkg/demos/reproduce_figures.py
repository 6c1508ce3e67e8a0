"""Write the CSV datasets behind the figures.

Run: python demos/reproduce_figures.py OUTDIR [figure ids...] [--n N]
With no ids every figure is produced, which takes well over an hour at the
default sample size; pass --n 20000 for a quick look.
"""

import argparse

from netoutage.harness import FIGURES, reproduce_figure

ap = argparse.ArgumentParser()
ap.add_argument("outdir")
ap.add_argument("figures", nargs="*", default=list(FIGURES))
ap.add_argument("--n", type=int, default=100_000)
ap.add_argument("--seed", type=int, default=1)
args = ap.parse_args()

for fig in args.figures:
    out = reproduce_figure(fig, args.outdir, seed=args.seed, n=args.n)
    print(f"figure {fig}: {len(out.files)} files in {out.directory}")
    for line in out.summary:
        print("  " + line)
