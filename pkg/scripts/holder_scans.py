"""Hölder quotient maxima by depth for several exponents and examples.

For each example the scan runs at its eigenvalue-side exponent and slightly
above it; the verdicts separate attained exponents from growth. Writes
``holder_scans.csv`` and ``holder_scans.svg``.

    python scripts/holder_scans.py --depth 6
"""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from anosovlab.exponents import holder_scan
from anosovlab.families import named_family
from anosovlab.limits import build_dictionary
from anosovlab.serialization import csv_text, save_svg, write_text

# the trivial extension has the same limit map as rho1 (Lipschitz), so it stays
# bounded above its eigenvalue-side exponent
SCANS = (
    ("fuchsian", {}, (1.0, 1.05)),
    ("sym3", {}, (1.0, 1.05)),
    ("dsum1", {}, (0.5, 0.55)),
    ("family-st", {"t": 1.0}, (0.5, 0.55)),
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--depth", type=int, default=6)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, params, alphas in SCANS:
        rep, model = named_family(name, **params)
        dictionary = build_dictionary(rep, model, args.depth)
        for alpha in alphas:
            scan = holder_scan(dictionary, alpha)
            for depth, value in scan.constant_curve:
                rows.append((name, alpha, depth, value, scan.verdict.value))
            depths = [d for d, _ in scan.constant_curve]
            ax.semilogy(depths, [v for _, v in scan.constant_curve], marker="o", label=f"{name} alpha={alpha:g}")
            print(f"{name:10s} alpha={alpha:<5g} {scan.verdict.value:12s} {[round(v, 4) for _, v in scan.constant_curve]}")
    write_text(out / "holder_scans.csv", csv_text(["family", "alpha", "depth", "max_quotient", "verdict"], rows))
    ax.set_xlabel("depth")
    ax.set_ylabel("max quotient")
    ax.legend(fontsize=7)
    fig.tight_layout()
    save_svg(fig, out / "holder_scans.svg")
    plt.close(fig)


if __name__ == "__main__":
    main()
