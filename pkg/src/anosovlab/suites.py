"""Randomized and exhaustive verification suites behind ``anosovlab verify``.

Every suite returns a :class:`SuiteReport` with the number of checks, the
number of violations and the worst margin seen, so the command line and the
test suite read the same numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exponents import Verdict, beta_rho, alpha_rho, cor14_check, cor43_compare, thm13_fit
from .families import relator_residual
from .limits import (
    NotProximal,
    build_dictionary,
    fubini_study,
    hyperconvex_check,
    lemma32_margins,
    limit_plane,
    limit_point,
    plane_residual,
)
from .matgap import Representation, evaluate
from .models import (
    CirclePoint,
    DegenerateConfiguration,
    ModelSpace,
    NonHyperbolicElement,
    lemma21_residual,
    lemma22_residual,
)
from .words import Word, random_reduced_codes

SUITES = ("lemma21", "lemma22", "lemma32", "relator", "equivariance", "cor43", "cor14", "thm13", "hyperconvex")


@dataclass
class SuiteReport:
    suite: str
    passed: bool
    checks: int
    violations: int
    worst: float
    threshold: float
    skipped: int = 0
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "pass": self.passed,
            "checks": self.checks,
            "violations": self.violations,
            "skipped": self.skipped,
            "worst": self.worst,
            "threshold": self.threshold,
            "details": self.details,
        }


def random_words(p, rng: np.random.Generator, count: int, min_len: int, max_len: int) -> list[Word]:
    lengths = rng.integers(min_len, max_len + 1, size=count)
    out = []
    for n in lengths:
        out.append(p.decode(random_reduced_codes(p, int(n), 1, rng)[0]))
    return out


def lemma21_suite(model: ModelSpace, trials: int, rng: np.random.Generator, max_len: int = 8) -> SuiteReport:
    """Residual of the boundary Gromov-product identity, bound ``4 delta``."""
    bound = 4.0 * model.hyp_delta
    words = random_words(model.presentation, rng, trials, 0, max_len)
    angles = rng.uniform(0.0, 2.0 * math.pi, size=(trials, 2))
    worst, bad, skipped = 0.0, 0, 0
    for w, (ax, ay) in zip(words, angles):
        try:
            r = lemma21_residual(model, w, CirclePoint(ax), CirclePoint(ay))
        except DegenerateConfiguration:
            skipped += 1
            continue
        worst = max(worst, r)
        bad += r > bound
    return SuiteReport("lemma21", bad == 0, trials - skipped, int(bad), worst, bound, skipped)


def lemma22_suite(model: ModelSpace, trials: int, rng: np.random.Generator, max_len: int = 8) -> SuiteReport:
    """Residual of the translation-length defect identity, bound ``2 delta``."""
    bound = 2.0 * model.hyp_delta
    worst, bad, skipped = 0.0, 0, 0
    for w in random_words(model.presentation, rng, trials, 1, max_len):
        try:
            r = lemma22_residual(model, w)
        except NonHyperbolicElement:
            skipped += 1
            continue
        worst = max(worst, r)
        bad += r > bound
    return SuiteReport("lemma22", bad == 0, trials - skipped, int(bad), worst, bound, skipped)


def random_lemma32_inputs(dim: int, count: int, rng: np.random.Generator):
    """Matrices with widely spread singular values and random vector pairs."""
    q1 = np.linalg.qr(rng.standard_normal((count, dim, dim)))[0]
    q2 = np.linalg.qr(rng.standard_normal((count, dim, dim)))[0]
    logs = rng.uniform(-4.0, 4.0, size=(count, dim))
    gs = q1 @ (np.exp(logs)[:, :, None] * q2)
    v1 = rng.standard_normal((count, dim))
    v2 = rng.standard_normal((count, dim))
    # a share of nearly parallel pairs, where the bound is tightest
    near = rng.random(count) < 0.3
    v2[near] = v1[near] + 1e-6 * rng.standard_normal((int(near.sum()), dim))
    return gs, v1, v2


def lemma32_suite(dim: int, trials: int, rng: np.random.Generator, slack: float = 1e-12, chunk: int = 20000) -> SuiteReport:
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    worst, bad = math.inf, 0
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        margins = lemma32_margins(*random_lemma32_inputs(dim, n, rng))
        worst = min(worst, float(margins.min()))
        bad += int(np.sum(margins < -slack))
        done += n
    return SuiteReport("lemma32", bad == 0, trials, bad, worst, -slack, details={"dim": dim})


def relator_suite(rep: Representation, tol: float = 1e-9) -> SuiteReport:
    r = relator_residual(rep)
    return SuiteReport("relator", r < tol, len(rep.presentation.relators), int(r >= tol), r, tol)


def _conjugation_pairs(p, rng, count: int, u_len: int, w_len: int) -> list[tuple[Word, Word]]:
    """Random ``(u, w)`` with ``u w u^-1`` freely reduced as written.

    When ``u`` cancels into ``w`` the line ``xi(w)`` sits near the repelling
    directions of ``rho(u)``, and pushing it forward loses digits in
    proportion to the condition number; reduced products avoid that.
    """
    out = []
    while len(out) < count:
        u = random_words(p, rng, 1, 1, u_len)[0]
        w = random_words(p, rng, 1, 1, w_len)[0]
        if len(u * w * u.inverse()) == 2 * len(u) + len(w):
            out.append((u, w))
    return out


def _amplification(m: np.ndarray, v: np.ndarray) -> float:
    """How much ``m`` can magnify relative errors in the line of ``v``."""
    with np.errstate(divide="ignore"):
        return float(np.linalg.norm(m, 2) * np.linalg.norm(v) / np.linalg.norm(m @ v))


def _transport_residual(g: np.ndarray, g_inv: np.ndarray, v: np.ndarray, gv: np.ndarray) -> float:
    """``d_P(g v, gv)``, evaluated as a push-forward or a pull-back.

    Whichever of ``g`` on ``v`` and ``g^-1`` on ``gv`` magnifies rounding
    errors less is used; the two products of amplification factors are
    comparable to the condition number of ``g``, so one route is always mild.
    """
    if _amplification(g, v) <= _amplification(g_inv, gv):
        return fubini_study(g @ v, gv)
    return fubini_study(v, g_inv @ gv)


def equivariance_suite(
    rep: Representation,
    checks: int,
    rng: np.random.Generator,
    tol: float = 1e-8,
    u_len: int = 3,
    w_len: int = 4,
) -> SuiteReport:
    """``d_P(xi(u w u^-1), rho(u) xi(w))`` and limit-point/plane compatibility.

    The plane check asks that ``xi(w)`` lie in every attracting eigenspace of
    ``rho(w)`` of dimension ``2 .. d-1`` that is separated by a gap.
    """
    p = rep.presentation
    worst, worst_plane, bad, skipped = 0.0, 0.0, 0, 0
    for u, w in _conjugation_pairs(p, rng, checks, u_len, w_len):
        try:
            direct = limit_point(rep, u * w * u.inverse())
            base = limit_point(rep, w)
        except NotProximal:
            skipped += 1
            continue
        r = _transport_residual(evaluate(rep, u).mat, evaluate(rep, u.inverse()).mat, base.vector, direct.vector)
        worst = max(worst, r)
        bad += r >= tol
        for k in range(2, rep.degree):
            try:
                frame = limit_plane(rep, w, k)
            except NotProximal:
                continue
            worst_plane = max(worst_plane, plane_residual(base.vector, frame))
    bad += worst_plane >= tol
    return SuiteReport(
        "equivariance",
        bad == 0,
        checks - skipped,
        int(bad),
        max(worst, worst_plane),
        tol,
        skipped,
        {"worst_conjugation": worst, "worst_plane": worst_plane},
    )


COR43_GRID = (1.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)


def cor43_suite(
    rep: Representation,
    model: ModelSpace,
    rng: np.random.Generator,
    max_len: int = 6,
    n_check: float = 10.0,
    tol: float = 0.05,
) -> SuiteReport:
    """Sigma-side infimum against the eigenvalue-side exponent at ``n_check``."""
    rows = cor43_compare(rep, model, max_len, COR43_GRID, rng)
    at = min(rows, key=lambda r: abs(r.n - n_check))
    table = [[r.n, r.sigma_inf, r.alpha, r.gap, r.count] for r in rows]
    return SuiteReport(
        "cor43", at.gap <= tol, len(rows), int(at.gap > tol), at.gap, tol, details={"n": at.n, "rows": table}
    )


def cor14_suite(rep: Representation, model: ModelSpace, alpha: float, m: int, depth: int = 6) -> SuiteReport:
    """Boundedness of the log-corrected Hölder quotient across depths."""
    scan = cor14_check(build_dictionary(rep, model, depth), alpha, m)
    ok = scan.verdict is Verdict.BOUNDED
    worst = scan.constant_curve[-1][1] if scan.constant_curve else math.nan
    return SuiteReport("cor14", ok, len(scan.constant_curve), int(not ok), worst, math.nan, details=scan.to_json())


def thm13_suite(rep: Representation, model: ModelSpace, max_len: int = 6, slack: float = 1e-9) -> SuiteReport:
    """Fit both gap bounds and confirm they dominate every scanned word."""
    alpha = alpha_rho(rep, model, max_len).estimate
    beta = beta_rho(rep, model, max_len).estimate
    upper, lower = thm13_fit(rep, model, max_len, alpha, beta)
    with np.errstate(divide="ignore"):
        up = [math.log(b) - math.log(r) for _, _, r, b in upper.residual_table]
        low = [math.log(r) - math.log(b) for _, _, r, b in lower.residual_table]
    worst = min(min(up), min(low))
    bad = sum(v < -slack for v in up) + sum(v < -slack for v in low)
    details = {"alpha": alpha, "beta": beta, "upper": upper.to_json(), "lower": lower.to_json()}
    return SuiteReport("thm13", bad == 0, len(up) + len(low), int(bad), worst, -slack, details=details)


def hyperconvex_suite(
    rep: Representation,
    model: ModelSpace,
    rng: np.random.Generator,
    depth: int = 6,
    n_triples: int = 1000,
    min_sep: float = 0.1,
    threshold: float = 1e-6,
) -> SuiteReport:
    if rep.degree < 3:
        raise ValueError("hyperconvexity needs degree >= 3")
    dictionary = build_dictionary(rep, model, depth, plane_dim=rep.degree - 2)
    report = hyperconvex_check(dictionary, n_triples, min_sep, rng)
    ok = report.min_abs_det > threshold
    details = {"worst_triple": [str(w) for w in report.worst_triple], "samples": len(dictionary)}
    return SuiteReport("hyperconvex", ok, report.n_triples, int(not ok), report.min_abs_det, threshold, details=details)
