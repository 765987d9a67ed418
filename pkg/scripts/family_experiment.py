"""Growth series r_n over a grid of (s, t) for the reducible family.

Writes ``family_experiment.csv`` (one row per (s, t, n)), a summary table and
an SVG of r_n / n for each parameter pair.

    python scripts/family_experiment.py --out-dir results --n-max 40
"""
import argparse
import time
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from anosovlab.exponents import nonattainment_series
from anosovlab.families import FamilyParams, family_st, fuchsian_octagon
from anosovlab.serialization import csv_text, save_svg, write_text


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--n-max", type=int, default=40)
    ap.add_argument("--s", type=float, nargs="+", default=[-2.0, -1.0, 1.0, 2.0])
    ap.add_argument("--t", type=float, nargs="+", default=[-0.2, -0.1, 0.1, 0.2])
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rho1, model = fuchsian_octagon()
    rows, summary = [], []
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for s in args.s:
        for t in args.t:
            t0 = time.perf_counter()
            series = nonattainment_series(family_st(rho1, FamilyParams(s, t)), model, n_max=args.n_max)
            elapsed = time.perf_counter() - t0
            rows.extend((s, t, n, r, q) for n, r, q in series.rows())
            r = series.r
            growth = r[-1] / r[len(r) // 4] if r[len(r) // 4] > 0 else float("nan")
            summary.append((s, t, series.verdict.value, r[-1], growth, elapsed))
            ax.plot(series.n[1:], [q for _, _, q in series.rows()[1:]], label=f"s={s:g}, t={t:g}", lw=1)
            print(f"s={s:+g} t={t:+g}  {series.verdict.value:8s}  r_max={r[-1]:.4g}  ({elapsed:.2f}s)")

    write_text(out / "family_experiment.csv", csv_text(["s", "t", "n", "r_n", "r_n_over_n"], rows))
    write_text(
        out / "family_experiment_summary.csv",
        csv_text(["s", "t", "verdict", "r_last", "r_last_over_r_quarter", "seconds"], summary),
    )
    ax.set_xlabel("n")
    ax.set_ylabel("r_n / n")
    ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    save_svg(fig, out / "family_experiment.svg")
    plt.close(fig)


if __name__ == "__main__":
    main()
