"""Command-line entry point: ``anosovlab <command> [options]``.

Exit codes: 0 success, 1 bad configuration or input, 2 numerical failure,
3 I/O failure, 4 a verification suite ran and failed.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import suites
from .exponents import (
    Verdict,
    alpha_rho,
    beta_rho,
    conj_exponent,
    inverse_exponent,
    nonattainment_series,
)
from .families import FAMILY_NAMES, ConfigurationError, FamilyParams, family_st, fuchsian_octagon, named_family
from .limits import build_dictionary, spanning_rank
from .matgap import NumericError, gap_arrays, support_line
from .models import ModelSpace, NonHyperbolicElement
from .serialization import (
    csv_text,
    json_text,
    load_json,
    rep_from_json,
    rep_to_json,
    save_svg,
    table_json,
    write_text,
)
from .words import EnumerationMode, WordError, word_codes

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO, EXIT_FAIL = 0, 1, 2, 3, 4
MIN_EPSILON = 0.05


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    family: str | None = None
    rep_json: str | None = None
    config: str | None = None
    model: str = "auto"
    max_len: int = 6
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    s: float = 1.0
    t: float = 0.1
    lam: float = 3.0
    X: list | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__ if f != "extra"}
        values = {k: v for k, v in vars(args).items() if k in known and v is not None}
        extra = {k: v for k, v in vars(args).items() if k not in known and k != "command"}
        cfg = cls(**values, extra=extra)
        if cfg.config:
            cfg._merge_file(cfg.config)
        if cfg.max_len < 0:
            raise ConfigError("max-len must be >= 0")
        if not 0 <= cfg.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        return cfg

    def _merge_file(self, path: str):
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = load_json(path)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        for key in ("s", "t", "lam"):
            if key in data:
                setattr(self, key, float(data[key]))
        if "X" in data:
            self.X = data["X"]
        if "family" in data and self.family is None:
            self.family = data["family"]

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed))


def load_representation(cfg: RunConfig, default: str = "fuchsian"):
    """Representation and model space for the config."""
    if cfg.rep_json:
        if not Path(cfg.rep_json).is_file():
            raise ConfigError(f"representation file not found: {cfg.rep_json}")
        rep = rep_from_json(load_json(cfg.rep_json))
        model = _model_for(rep.presentation, cfg.model)
        return rep, model
    name = cfg.family or default
    if name not in FAMILY_NAMES:
        raise ConfigError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}")
    rep, model = named_family(name, s=cfg.s, t=cfg.t, lam=cfg.lam, X=cfg.X)
    if cfg.model == "tree" and model.is_fuchsian:
        raise ConfigError("the tree model needs a free group")
    return rep, model


def _model_for(presentation, choice: str) -> ModelSpace:
    from .words import PresentationKind

    surface = presentation.kind is PresentationKind.SURFACE_GENUS2
    if choice == "tree" or (choice == "auto" and not surface):
        if surface:
            raise ConfigError("the tree model needs a free group")
        return ModelSpace.tree(presentation)
    if not surface:
        raise ConfigError("the Fuchsian model needs the genus-2 generators a1 b1 a2 b2")
    return fuchsian_octagon()[1]


def _emit(cfg: RunConfig, header, rows, extra_json=None):
    rows = list(rows)
    if cfg.fmt == "json":
        payload = {"rows": table_json(header, rows)}
        if extra_json:
            payload.update(extra_json)
        text = json_text(payload)
    else:
        text = csv_text(header, rows)
    _write(cfg.out, text)


def _write(path, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        write_text(path, text)


def _plot(path, draw):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    draw(ax)
    fig.tight_layout()
    save_svg(fig, path)
    plt.close(fig)


# commands ------------------------------------------------------------------

def cmd_gaps(cfg: RunConfig) -> int:
    rep, model = load_representation(cfg)
    k = int(cfg.extra.get("k") or 1)
    if not 1 <= k < rep.degree:
        raise ConfigError(f"k must lie in 1..{rep.degree - 1}")
    if cfg.max_len < 1:
        raise ConfigError("max-len must be >= 1")
    p = rep.presentation
    header = ["word", "len_X", "stable_len", "log_s1s2", "log_l1l2"]
    rows, xs, ys = [], [], []
    for length in range(1, cfg.max_len + 1):
        codes = word_codes(p, length, EnumerationMode.ALL_REDUCED)
        gaps = gap_arrays(rep, codes, k)
        lens = model.lengths(codes)
        stable = model.stable_lengths(codes)
        xs.append(lens)
        ys.append(gaps["sigma_gap"])
        for row, a, b, c, d in zip(codes, lens, stable, gaps["sigma_gap"], gaps["eig_gap"]):
            rows.append((str(p.decode(row)), a, b, c, d))
    eps, R = support_line(np.concatenate([[0.0], *xs]), np.concatenate([[0.0], *ys]))
    anosov = eps >= MIN_EPSILON
    _emit(cfg, header, rows, {"epsilon": eps, "R": R, "k": k, "anosov": anosov})
    verdict = "Anosov" if anosov else f"not {k}-Anosov (epsilon below {MIN_EPSILON})"
    print(f"epsilon={eps:.6g} R={R:.6g} k={k}: {verdict}", file=sys.stderr)
    return EXIT_OK


def cmd_exponent(cfg: RunConfig) -> int:
    conj = cfg.extra.get("conjugation")
    if cfg.max_len < 1:
        raise ConfigError("max-len must be >= 1")
    if conj:
        reps = []
        for name in conj:
            if name not in FAMILY_NAMES:
                raise ConfigError(f"unknown family {name!r}")
            reps.append(named_family(name, s=cfg.s, t=cfg.t, lam=cfg.lam, X=cfg.X)[0])
        report = conj_exponent(reps[0], reps[1], cfg.max_len)
        payload = {"conjugation": list(conj), "report": report.to_json()}
        summary = f"conjugation exponent {report.estimate:.12g}"
    else:
        rep, model = load_representation(cfg)
        a = alpha_rho(rep, model, cfg.max_len)
        b = beta_rho(rep, model, cfg.max_len)
        payload = {"alpha": a.to_json(), "beta": b.to_json(), "inverse_exponent": inverse_exponent(b)}
        summary = f"alpha={a.estimate:.12g} beta={b.estimate:.12g}"
    _write(cfg.out, json_text(payload))
    print(summary, file=sys.stderr)
    return EXIT_OK


SUITE_DEFAULT_FAMILY = {
    "lemma21": "fuchsian",
    "lemma22": "fuchsian",
    "relator": "fuchsian",
    "equivariance": "sym3",
    "cor43": "dsum1",
    "cor14": "family-st",
    "thm13": "fuchsian",
    "hyperconvex": "sym3",
}


def cmd_verify(cfg: RunConfig) -> int:
    suite = cfg.extra["suite"]
    rng = cfg.rng()
    trials = cfg.extra.get("trials")
    if suite == "lemma32":
        dim = int(cfg.extra.get("dim") or 4)
        report = suites.lemma32_suite(dim, int(trials or 100_000), rng)
    else:
        rep, model = load_representation(cfg, SUITE_DEFAULT_FAMILY[suite])
        depth = cfg.extra.get("depth")
        if suite == "lemma21":
            report = suites.lemma21_suite(model, int(trials or 10_000), rng, cfg.max_len)
        elif suite == "lemma22":
            report = suites.lemma22_suite(model, int(trials or 10_000), rng, cfg.max_len)
        elif suite == "relator":
            report = suites.relator_suite(rep)
        elif suite == "equivariance":
            report = suites.equivariance_suite(rep, int(trials or 1000), rng)
        elif suite == "cor43":
            report = suites.cor43_suite(rep, model, rng, cfg.max_len)
        elif suite == "cor14":
            alpha = cfg.extra.get("alpha")
            m = cfg.extra.get("m")
            report = suites.cor14_suite(
                rep, model, 0.5 if alpha is None else alpha, 1 if m is None else m, int(depth or 6)
            )
        elif suite == "thm13":
            report = suites.thm13_suite(rep, model, cfg.max_len)
        else:
            report = suites.hyperconvex_suite(rep, model, rng, int(depth or 6), int(trials or 1000))
    _write(cfg.out, json_text(report.to_json()))
    print(f"{suite}: {'pass' if report.passed else 'FAIL'} (worst {report.worst:.6g})", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_limit_set(cfg: RunConfig) -> int:
    if cfg.max_len < 1:
        raise ConfigError("max-len must be >= 1")
    rep, model = load_representation(cfg)
    dictionary = build_dictionary(rep, model, cfg.max_len)
    if not len(dictionary):
        raise NumericError("no proximal words in the enumeration")
    d = rep.degree
    vecs = dictionary.vectors()
    header = ["word", "boundary"] + [f"v{i}" for i in range(d)]
    rows = []
    for sample, v in zip(dictionary.samples, vecs):
        b = sample.boundary.angle if model.is_fuchsian else str(sample.boundary.prefix)
        rows.append((str(sample.word), b, *v))
    rank = spanning_rank(dictionary) if len(dictionary) >= d else 0
    info = {"samples": len(dictionary), "rank": rank, "degree": d, "spanning": rank == d}
    if cfg.fmt == "svg":
        if cfg.out is None:
            raise ConfigError("svg output needs --out")
        chart = int(np.argmax(np.abs(vecs).mean(axis=0)))
        j = (chart + 1) % d
        # arctan of the affine coordinate v_j / v_chart, finite at infinity
        slope = np.arctan2(vecs[:, j] * np.sign(vecs[:, chart] + (vecs[:, chart] == 0)), np.abs(vecs[:, chart]))

        def draw(ax):
            x = [r[1] for r in rows] if model.is_fuchsian else np.arange(len(rows))
            ax.scatter(x, slope, s=2)
            ax.set_xlabel("boundary angle" if model.is_fuchsian else "sample")
            ax.set_ylabel(f"arctan(v{j}/v{chart})")

        _plot(cfg.out, draw)
    else:
        _emit(cfg, header, rows, info)
    print(f"samples={len(dictionary)} rank={rank} of {d}", file=sys.stderr)
    if rank < d:
        print("warning: limit set is NOT spanning", file=sys.stderr)
    return EXIT_OK


def cmd_family_experiment(cfg: RunConfig) -> int:
    n_max = int(cfg.extra.get("n_max") or 40)
    if n_max < 0:
        raise ConfigError("n-max must be >= 0")
    if cfg.s == 0:
        raise ConfigError("s must be nonzero")
    rho1, model = fuchsian_octagon()
    params = FamilyParams(cfg.s, cfg.t) if cfg.X is None else FamilyParams(cfg.s, cfg.t, cfg.X)
    rep = family_st(rho1, params)
    series = nonattainment_series(rep, model, n_max=n_max)
    rows = [(n, r, q) for n, r, q in series.rows()]
    if cfg.fmt == "svg":
        if cfg.out is None:
            raise ConfigError("svg output needs --out")

        def draw(ax):
            ax.plot(series.n, series.r, marker=".")
            ax.set_xlabel("n")
            ax.set_ylabel("r_n")

        _plot(cfg.out, draw)
    else:
        _emit(cfg, ["n", "r_n", "r_n_over_n"], rows, {"verdict": series.verdict.value})
    ratio = series.r[40] / series.r[10] if n_max >= 40 else math.nan
    print(f"verdict: {series.verdict.value}" + (f" (r_40/r_10 = {ratio:.4g})" if n_max >= 40 else ""), file=sys.stderr)
    return EXIT_OK


def cmd_export_rep(cfg: RunConfig) -> int:
    rep, _ = load_representation(cfg)
    if rep.derivation is not None:
        rep = type(rep).from_generators(rep.presentation, {g: rep.images[g] for g in rep.presentation.alphabet.generators})
    _write(cfg.out, json_text(rep_to_json(rep)))
    return EXIT_OK


COMMANDS = {
    "gaps": cmd_gaps,
    "exponent": cmd_exponent,
    "verify": cmd_verify,
    "limit-set": cmd_limit_set,
    "family-experiment": cmd_family_experiment,
    "export-rep": cmd_export_rep,
}


def _common(p: argparse.ArgumentParser, max_len: int = 6):
    p.add_argument("--family", choices=FAMILY_NAMES)
    p.add_argument("--rep-json", help="representation JSON with a 'generators' object")
    p.add_argument("--config", help="JSON with family parameters s, t, X, lam")
    p.add_argument("--model", choices=("auto", "fuchsian", "tree"), default="auto")
    p.add_argument("--max-len", dest="max_len", type=int, default=max_len)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", dest="fmt", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--s", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--lam", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anosovlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gaps", help="per-word singular value and eigenvalue gaps")
    _common(p)
    p.add_argument("--k", type=int, default=1)

    p = sub.add_parser("exponent", help="Hölder exponent estimates")
    _common(p)
    p.add_argument("--conjugation", nargs=2, metavar=("REP1", "REP2"))

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=suites.SUITES)
    _common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--m", type=int)

    p = sub.add_parser("limit-set", help="sample the limit map")
    _common(p)

    p = sub.add_parser("family-experiment", help="growth series for the reducible family")
    _common(p)
    p.add_argument("--n-max", dest="n_max", type=int, default=40)

    p = sub.add_parser("export-rep", help="write generator images as representation JSON")
    _common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = RunConfig.from_args(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ConfigurationError, WordError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, NonHyperbolicElement, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
