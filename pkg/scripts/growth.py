"""Critical exponent estimates for the surface group and a free group.

The surface group acting on the hyperbolic plane has exponent 1; the free
group of rank two on its Cayley tree has exponent log 3.

    python scripts/growth.py --max-len 7
"""
import argparse
import math
from pathlib import Path

from anosovlab.exponents import growth_entropy
from anosovlab.families import fuchsian_octagon, schottky
from anosovlab.serialization import csv_text, write_text


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--max-len", type=int, default=7)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    models = {"surface/H2": (fuchsian_octagon()[1], 1.0), "free/tree": (schottky()[1], math.log(3.0))}
    rows = []
    for name, (model, expected) in models.items():
        for n in range(3, args.max_len + 1):
            g = growth_entropy(model, n)
            rows.append((name, n, g.slope, expected, g.radius, g.residual, g.conclusive))
            slope = f"{g.slope:.4f}" if g.conclusive else "inconclusive"
            print(f"{name:11s} max_len={n}  slope={slope}  (expected {expected:.4f})  radius={g.radius:.2f}")
    header = ["model", "max_len", "slope", "expected", "radius", "residual", "conclusive"]
    write_text(out / "growth.csv", csv_text(header, rows))


if __name__ == "__main__":
    main()
