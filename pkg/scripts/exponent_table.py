"""Eigenvalue-side Hölder exponents of the standard examples.

Prints and writes ``exponents.csv`` with alpha_rho, beta_rho and the witness
words at each cyclic length up to ``--max-len``.

    python scripts/exponent_table.py --max-len 8
"""
import argparse
import time
from pathlib import Path

from anosovlab.exponents import alpha_rho, beta_rho, inverse_exponent
from anosovlab.families import named_family
from anosovlab.serialization import csv_text, write_text

EXAMPLES = ("fuchsian", "sym3", "dsum1", "dsum2", "family-st", "schottky")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--max-len", type=int, default=8)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for name in EXAMPLES:
        rep, model = named_family(name)
        t0 = time.perf_counter()
        a = alpha_rho(rep, model, args.max_len)
        b = beta_rho(rep, model, args.max_len)
        elapsed = time.perf_counter() - t0
        rows.append((name, rep.degree, a.estimate, str(a.witness), b.estimate, inverse_exponent(b), elapsed))
        print(f"{name:10s} d={rep.degree}  alpha={a.estimate:.12f}  beta={b.estimate:.12f}  ({elapsed:.1f}s)")
    header = ["family", "degree", "alpha", "alpha_witness", "beta", "inverse_exponent", "seconds"]
    write_text(out / "exponents.csv", csv_text(header, rows))


if __name__ == "__main__":
    main()
