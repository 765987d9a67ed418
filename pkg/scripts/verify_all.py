"""Run every verification suite on its standard example and tabulate.

Exits with status 1 when any suite reports a violation.

    python scripts/verify_all.py --seed 0
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from anosovlab import suites
from anosovlab.families import FamilyParams, derived_examples, family_st, fuchsian_octagon
from anosovlab.serialization import json_text, write_text


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=10_000)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.Philox(args.seed))

    rho1, model = fuchsian_octagon()
    derived = derived_examples(rho1)
    sym3, dsum1 = derived["Sym3"].rep, derived["DirectSumTrivial1"].rep
    rho_st = family_st(rho1, FamilyParams(1.0, 0.1))

    runs = [
        ("lemma21", lambda: suites.lemma21_suite(model, args.trials, rng)),
        ("lemma22", lambda: suites.lemma22_suite(model, args.trials, rng)),
        ("lemma32 d=3", lambda: suites.lemma32_suite(3, 10 * args.trials, rng)),
        ("lemma32 d=4", lambda: suites.lemma32_suite(4, 10 * args.trials, rng)),
        ("relator rho_st", lambda: suites.relator_suite(rho_st)),
        ("equivariance Sym3", lambda: suites.equivariance_suite(sym3, 1000, rng)),
        ("cor43 dsum1", lambda: suites.cor43_suite(dsum1, model, rng)),
        ("cor14 rho_st m=1", lambda: suites.cor14_suite(rho_st, model, 0.5, 1)),
        ("thm13 Sym3", lambda: suites.thm13_suite(sym3, model)),
        ("hyperconvex Sym3", lambda: suites.hyperconvex_suite(sym3, model, rng)),
    ]
    reports, failed = {}, 0
    for label, run in runs:
        r = run()
        reports[label] = r.to_json()
        failed += not r.passed
        status = "ok" if r.passed else "FAILED"
        print(f"{label:20s} {status:6s} checks={r.checks:<7d} violations={r.violations:<4d} worst={r.worst:.3e}")
    write_text(out / "verify_all.json", json_text(reports))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
