"""Extremal-ratio estimators for Hölder exponents of limit maps and the
bounds that relate them to singular value gaps.

Every estimate is an infimum or supremum over a finite word enumeration, so
it bounds the true value from one side; reports carry the running extremum
per word length so convergence can be judged by eye.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .limits import LimitDictionary, fubini_study_pairwise
from .matgap import Representation, gap_arrays
from .models import CirclePoint, ModelSpace, attracting_boundary_point, repelling_boundary_point
from .words import EnumerationMode, Word, count_reduced, random_reduced_codes, word_codes

BOUNDED_RATIO = 1.05
GROWTH_RATIO = 1.5
PAIR_CHUNK = 512


class Direction(enum.Enum):
    INF = "inf"
    SUP = "sup"


@dataclass
class ExponentReport:
    estimate: float
    witness: Word
    curve: list[tuple[int, float]]
    direction: Direction
    degenerate: int = 0

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "witness": str(self.witness),
            "direction": self.direction.value,
            "curve": [[n, v] for n, v in self.curve],
            "degenerate": self.degenerate,
        }


def _running_extremum(rows, direction: Direction) -> ExponentReport:
    """Fold ``(length, words, values)`` batches into a running inf or sup."""
    best, witness, curve = None, None, []
    better = np.less if direction is Direction.INF else np.greater
    degenerate = 0
    for length, codes, values, p in rows:
        valid = np.isfinite(values)
        degenerate += int(np.sum(~valid))
        if np.any(valid):
            vals = np.where(valid, values, np.inf if direction is Direction.INF else -np.inf)
            i = int(np.argmin(vals) if direction is Direction.INF else np.argmax(vals))
            if best is None or better(vals[i], best):
                best, witness = float(vals[i]), p.decode(codes[i])
        if best is not None:
            curve.append((length, best))
    if best is None:
        raise ValueError("no valid words in the enumeration")
    return ExponentReport(best, witness, curve, direction, degenerate)


def _cyclic_rows(p, max_len: int):
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    for length in range(1, max_len + 1):
        yield length, word_codes(p, length, EnumerationMode.CYCLIC_CLASSES)


def _gap_over_stable(rep: Representation, model: ModelSpace, max_len: int):
    for length, codes in _cyclic_rows(rep.presentation, max_len):
        gap = gap_arrays(rep, codes, 1, sigma=False)["eig_gap"]
        stable = model.stable_lengths(codes)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(stable > 0, gap / stable, np.nan)
        yield length, codes, q, rep.presentation


def alpha_rho(rep: Representation, model: ModelSpace, max_len: int) -> ExponentReport:
    """Running infimum of ``log(l1/l2) / |g|_inf`` over cyclic classes."""
    return _running_extremum(_gap_over_stable(rep, model, max_len), Direction.INF)


def beta_rho(rep: Representation, model: ModelSpace, max_len: int) -> ExponentReport:
    """Running supremum of ``log(l1/l2) / |g|_inf`` over cyclic classes."""
    return _running_extremum(_gap_over_stable(rep, model, max_len), Direction.SUP)


def inverse_exponent(beta: ExponentReport) -> float:
    """Hölder exponent of the inverse limit map, ``1 / beta``."""
    return 1.0 / beta.estimate


def conj_exponent(rep1: Representation, rep2: Representation, max_len: int) -> ExponentReport:
    """Running infimum of ``log(l1/l2)(rep2) / log(l1/l2)(rep1)``.

    Words where ``rep1`` has no gap are counted in ``degenerate`` and skipped.
    """
    if rep1.presentation != rep2.presentation:
        raise ValueError("representations of different groups")

    def rows():
        for length, codes in _cyclic_rows(rep1.presentation, max_len):
            g1 = gap_arrays(rep1, codes, 1, sigma=False)["eig_gap"]
            g2 = gap_arrays(rep2, codes, 1, sigma=False)["eig_gap"]
            with np.errstate(divide="ignore", invalid="ignore"):
                q = np.where(g1 > 0, g2 / g1, np.nan)
            yield length, codes, q, rep1.presentation

    return _running_extremum(rows(), Direction.INF)


# pair scans over limit dictionaries -------------------------------------------

class Verdict(enum.Enum):
    BOUNDED = "Bounded"
    GROWING = "Growing"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class HolderScan:
    alpha: float
    constant_curve: list[tuple[int, float]]
    verdict: Verdict
    m: int = 0

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "m": self.m,
            "curve": [[d, v] for d, v in self.constant_curve],
            "verdict": self.verdict.value,
        }


def curve_verdict(curve: list[tuple[int, float]]) -> Verdict:
    """Bounded if the last three maxima differ by < 5% step to step; Growing if
    the final value exceeds 1.5x the value at half the final depth."""
    vals = [v for _, v in curve]
    if len(vals) >= 3 and all(b < BOUNDED_RATIO * a for a, b in zip(vals[-3:], vals[-2:])):
        return Verdict.BOUNDED
    if len(curve) >= 2:
        top = curve[-1][0]
        half = min(curve, key=lambda dv: abs(dv[0] - top / 2))[1]
        if vals[-1] > GROWTH_RATIO * half:
            return Verdict.GROWING
    return Verdict.INCONCLUSIVE


def _boundary_distances(model: ModelSpace, xs, ys) -> np.ndarray:
    """Visual distances between paired boundary points (vectorized on circles)."""
    if model.is_fuchsian and model.visual_base == math.e:
        return np.abs(np.sin(0.5 * (xs[:, None] - ys[None, :])))
    from .models import visual_metric

    return np.array([[visual_metric(model, x, y) for y in ys] for x in xs])


def _pair_max(dictionary: LimitDictionary, weight, depths: list[int]) -> list[tuple[int, float]]:
    """Max over sample pairs of ``weight(d_P, d_v)``, incrementally by depth."""
    samples = dictionary.samples
    model = dictionary.model
    lengths = np.array([len(s.word) for s in samples])
    vecs = dictionary.vectors() if samples else np.zeros((0, dictionary.rep.degree))
    if model.is_fuchsian:
        bpts = np.array([s.boundary.angle for s in samples])
    else:
        bpts = np.array([s.boundary for s in samples], dtype=object)
    curve = []
    best = 0.0
    done = np.zeros(len(samples), dtype=bool)
    for depth in depths:
        new = np.nonzero((lengths <= depth) & ~done)[0]
        old = np.nonzero(done)[0]
        for lo in range(0, len(new), PAIR_CHUNK):
            blk = new[lo : lo + PAIR_CHUNK]
            # each unordered pair once: old samples and new ones from here on
            others = np.concatenate([old, new[lo:]])
            dv = _boundary_distances(model, bpts[blk], bpts[others])
            dp = fubini_study_pairwise(vecs[blk], vecs[others])
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = weight(dp, dv)
            vals = np.where(dv > 0, vals, -np.inf)
            if vals.size:
                best = max(best, float(np.max(vals)))
        done[new] = True
        if done.sum() >= 2:
            curve.append((depth, best))
    return curve


def _default_depths(dictionary: LimitDictionary) -> list[int]:
    top = max((len(s.word) for s in dictionary.samples), default=0)
    return list(range(1, top + 1))


def holder_scan(dictionary: LimitDictionary, alpha: float, depth_schedule=None) -> HolderScan:
    """Max over sample pairs of ``d_P(xi x, xi y) / d_v(x, y)^alpha`` per depth."""
    depths = list(depth_schedule) if depth_schedule is not None else _default_depths(dictionary)
    curve = _pair_max(dictionary, lambda dp, dv: dp / dv**alpha, depths)
    return HolderScan(alpha, curve, curve_verdict(curve))


def cor14_check(dictionary: LimitDictionary, alpha: float, m: int, depth_schedule=None) -> HolderScan:
    """Max of ``d_P / (d_v^alpha |log d_v|^m)`` over pairs with ``d_v < 1/e``."""
    depths = list(depth_schedule) if depth_schedule is not None else _default_depths(dictionary)
    cutoff = math.exp(-1.0)

    def weight(dp, dv):
        val = dp / (dv**alpha * np.abs(np.log(dv)) ** m)
        return np.where(dv < cutoff, val, -np.inf)

    curve = _pair_max(dictionary, weight, depths)
    return HolderScan(alpha, curve, curve_verdict(curve), m)


# the non-attainment series --------------------------------------------------

@dataclass
class SeriesResult:
    n: list[int]
    r: list[float]
    verdict: Verdict

    def rows(self) -> list[tuple[int, float, float]]:
        return [(n, r, r / n if n else math.nan) for n, r in zip(self.n, self.r)]


def series_verdict(n: list[int], r: list[float]) -> Verdict:
    if not n or n[-1] < 4:
        return Verdict.INCONCLUSIVE
    by_n = dict(zip(n, r))
    top = n[-1]
    if by_n[top] > GROWTH_RATIO * by_n[top // 2]:
        return Verdict.GROWING
    first = max(by_n[k] for k in n if k <= top // 2)
    second = max(by_n[k] for k in n if k > top // 2)
    if second <= BOUNDED_RATIO * first:
        return Verdict.BOUNDED
    return Verdict.INCONCLUSIVE


def _mp_matrix(a: np.ndarray):
    return mpmath.matrix([[mpmath.mpf(float(x)) for x in row] for row in a])


def _mp_product(rep: Representation, w: Word):
    out = mpmath.eye(rep.degree)
    for s in w:
        out = out * _mp_matrix(rep.images[s])
    return out


def _mp_top_vector(m, squarings: int):
    """Attracting eigenvector by repeated squaring with renormalisation."""
    p = m
    for _ in range(squarings):
        p = p * p
        p = p / mpmath.mnorm(p, 1)
    # the dominant column of a high power spans the attracting line
    cols = [p[:, j] for j in range(p.cols)]
    v = max(cols, key=lambda c: mpmath.norm(c))
    return v / mpmath.norm(v)


def _mp_wedge_sin(u, v) -> mpmath.mpf:
    num = mpmath.mpf(0)
    for i in range(len(u)):
        for j in range(i + 1, len(u)):
            num += (u[i] * v[j] - u[j] * v[i]) ** 2
    return mpmath.sqrt(num) / (mpmath.norm(u) * mpmath.norm(v))


def _mp_fubini_study(u, v) -> mpmath.mpf:
    inner = abs(sum(u[i] * v[i] for i in range(len(u))))
    return mpmath.atan2(_mp_wedge_sin(u, v) * mpmath.norm(u) * mpmath.norm(v), inner)


def nonattainment_series(
    rep: Representation,
    model: ModelSpace,
    x: Word | None = None,
    y: Word | None = None,
    n_max: int = 40,
    g: Word | None = None,
    extra_digits: int = 30,
) -> SeriesResult:
    """``r_n = d_P(rho(g^n) xi(x), rho(g^n) xi(y)) / d_v(g^n x, g^n y)^(1/2)``.

    ``x`` and ``y`` are the attracting fixed points of the given words
    (default: the first two generators) and ``xi`` is evaluated there by the
    attracting eigenvector. ``g`` defaults to the first generator. Both boundary and
    projective distances collapse like ``l_1(g)^(-2n)``, so the series is run
    in multiprecision with enough digits to resolve them.
    """
    if not model.is_fuchsian:
        raise ValueError("the series needs the Fuchsian model")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    p = rep.presentation
    gens = p.alphabet.generators
    g = g if g is not None else Word((gens[0],))
    x = x if x is not None else Word((gens[0],))
    y = y if y is not None else Word((gens[1 % len(gens)],))
    px, py = attracting_boundary_point(model, x), attracting_boundary_point(model, y)
    rep_pt = repelling_boundary_point(model, g)
    sep = min(abs(math.sin(0.5 * (a.angle - b.angle))) for a, b in ((px, py), (px, rep_pt), (py, rep_pt)))
    if sep < 1e-8:
        raise ValueError("x, y and the repelling point of g must be distinct")
    log_l = model.stable_length(g) / 2.0
    digits = extra_digits + int(math.ceil(2.0 * max(n_max, 1) * log_l / math.log(10.0)))
    with mpmath.workdps(digits):
        rho1 = model.rho1
        squarings = max(8, int(math.ceil(math.log2(digits + 10))) + 4)
        bx = _mp_top_vector(_mp_product(rho1, x), squarings)
        by = _mp_top_vector(_mp_product(rho1, y), squarings)
        vx = _mp_top_vector(_mp_product(rep, x), squarings)
        vy = _mp_top_vector(_mp_product(rep, y), squarings)
        step1 = _mp_product(rho1, g)
        step = _mp_product(rep, g)
        ns, rs = [], []
        for n in range(n_max + 1):
            if n:
                bx, by = step1 * bx, step1 * by
                vx, vy = step * vx, step * vy
                bx, by = bx / mpmath.norm(bx), by / mpmath.norm(by)
                vx, vy = vx / mpmath.norm(vx), vy / mpmath.norm(vy)
            dv = _mp_wedge_sin(bx, by)
            dp = _mp_fubini_study(vx, vy)
            ns.append(n)
            rs.append(float(dp / mpmath.sqrt(dv)))
    return SeriesResult(ns, rs, series_verdict(ns, rs))


# two-sided gap bounds -------------------------------------------------------

@dataclass
class BoundFit:
    C: float
    m: int
    residual_table: list[tuple[str, float, float, float]] = field(repr=False)

    def to_json(self) -> dict:
        return {"C": self.C, "m": self.m}


def _sigma_data(rep: Representation, model: ModelSpace, max_len: int, probe: int):
    p = rep.presentation
    words, xs, ys = [], [], []
    for length in range(1, max_len + 1):
        codes = word_codes(p, length, EnumerationMode.ALL_REDUCED)
        xs.append(model.lengths(codes))
        ys.append(gap_arrays(rep, codes, 1, eig=False)["sigma_gap"])
        words.extend(str(p.decode(c)) for c in codes)
    probe_x, probe_y, probe_w = [], [], []
    g = p.alphabet.symbols[0]
    for n in range(1, probe + 1):
        codes = np.full((1, n), p.alphabet.code(g), dtype=np.int8)
        probe_x.append(model.lengths(codes)[0])
        probe_y.append(gap_arrays(rep, codes, 1, eig=False)["sigma_gap"][0])
        probe_w.append(f"{g}^{n}")
    return (
        words + probe_w,
        np.concatenate(xs + [np.array(probe_x)]),
        np.concatenate(ys + [np.array(probe_y)]),
        np.array(probe_x),
        np.array(probe_y),
    )


def _upper_constants(x: np.ndarray, log_ratio: np.ndarray, alpha: float, m: int) -> np.ndarray:
    """``log(ratio * e^(alpha x) / x^m)`` with ``x`` floored at 1."""
    return log_ratio + alpha * x - m * np.log(np.maximum(x, 1.0))


def thm13_fit(
    rep: Representation,
    model: ModelSpace,
    max_len: int,
    alpha: float,
    beta: float,
    probe: int = 40,
) -> tuple[BoundFit, BoundFit]:
    """Fit ``C^-1 e^(-beta x) <= s2/s1 <= C e^(-alpha x) x^m`` with ``x = |g|_X``.

    ``m`` is the least degree for which the normalised ratio stops growing
    along the probe series ``g1^n`` (its second half never exceeds the first
    half by more than 5%); ``C`` is then the least constant dominating every
    scanned word and the probe series.
    """
    d = rep.degree
    words, x, gaps, px, pgaps = _sigma_data(rep, model, max_len, probe)
    m_max = max(0, d * (d - 1) // 2 - 2)
    chosen = m_max
    half = len(px) // 2
    for m in range(m_max + 1):
        c = _upper_constants(px, -pgaps, alpha, m)
        if half == 0 or c[half:].max() <= c[:half].max() + math.log(BOUNDED_RATIO):
            chosen = m
            break
    logc_up = _upper_constants(x, -gaps, alpha, chosen)
    C_up = math.exp(max(0.0, float(logc_up.max())))
    logc_low = gaps - beta * x
    C_low = math.exp(max(0.0, float(logc_low.max())))
    up_rows, low_rows = [], []
    for w, xi, gi in zip(words, x, gaps):
        ratio = math.exp(-gi)
        up_rows.append((w, float(xi), ratio, C_up * math.exp(-alpha * xi) * max(xi, 1.0) ** chosen))
        low_rows.append((w, float(xi), ratio, math.exp(-beta * xi) / C_low))
    return BoundFit(C_up, chosen, up_rows), BoundFit(C_low, 0, low_rows)


# sigma-side limit -------------------------------------------------------------

@dataclass
class Cor43Row:
    n: float
    sigma_inf: float
    alpha: float
    count: int

    @property
    def gap(self) -> float:
        return abs(self.sigma_inf - self.alpha)


def cor43_compare(
    rep: Representation,
    model: ModelSpace,
    max_len: int,
    n_grid,
    rng: np.random.Generator,
    sample_len: int = 10,
    n_samples: int = 20000,
) -> list[Cor43Row]:
    """``inf_{|g|_X >= n} log(s1/s2)(g) / |g|_X`` against the eigenvalue-side alpha.

    Words are every reduced word up to ``max_len`` plus ``n_samples`` random
    reduced words of length ``sample_len``.
    """
    p = rep.presentation
    xs, qs = [], []
    batches = [word_codes(p, L, EnumerationMode.ALL_REDUCED) for L in range(1, max_len + 1)]
    if n_samples:
        batches.append(random_reduced_codes(p, sample_len, n_samples, rng))
    for codes in batches:
        x = model.lengths(codes)
        gap = gap_arrays(rep, codes, 1, eig=False)["sigma_gap"]
        keep = x > 1e-9
        xs.append(x[keep])
        qs.append(gap[keep] / x[keep])
    x, q = np.concatenate(xs), np.concatenate(qs)
    alpha = alpha_rho(rep, model, max_len).estimate
    rows = []
    for n in n_grid:
        sel = x >= n
        val = float(q[sel].min()) if np.any(sel) else math.nan
        rows.append(Cor43Row(float(n), val, alpha, int(sel.sum())))
    return rows


# growth ----------------------------------------------------------------------

@dataclass
class GrowthEstimate:
    slope: float
    residual: float
    conclusive: bool
    radius: float


TOP_SHARE = 0.2


def _distinct_elements(model: ModelSpace, max_len: int) -> tuple[np.ndarray, np.ndarray]:
    """Displacements and shortest word lengths of the distinct nontrivial
    elements reachable by reduced words of length <= ``max_len``.

    Elements are identified by their rounded matrices, which removes the
    repeats created by the surface relator.
    """
    gens = model.rho1.stack
    n = len(gens)
    prods, last = gens.copy(), np.arange(n)
    mats, lens = [prods], [np.ones(n, dtype=np.int64)]
    for length in range(2, max_len + 1):
        parent = np.repeat(np.arange(len(prods)), n)
        nxt = np.tile(np.arange(n), len(prods))
        keep = nxt != (last[parent] ^ 1)
        prods, last = prods[parent[keep]] @ gens[nxt[keep]], nxt[keep]
        mats.append(prods)
        lens.append(np.full(len(prods), length, dtype=np.int64))
    flat = np.concatenate(mats).reshape(-1, 4)
    length = np.concatenate(lens)
    keys = np.ascontiguousarray(np.round(flat * 1e4).astype(np.int64))
    _, first = np.unique(keys.view(np.dtype((np.void, 32))).ravel(), return_index=True)
    x = np.arccosh(np.maximum(0.5 * np.sum(flat[first] ** 2, axis=1), 1.0))
    nontrivial = x > 1e-6
    return x[nontrivial], length[first][nontrivial]


def _completeness_radius(x: np.ndarray, length: np.ndarray, max_len: int, share: float) -> float:
    """Smallest radius at which elements first met at ``max_len`` make up
    more than ``share`` of the count; beyond it longer words clearly matter."""
    order = np.argsort(x, kind="stable")
    top = np.cumsum(length[order] == max_len) / np.arange(1, len(x) + 1)
    bad = np.nonzero(top > share)[0]
    return float(x[order][bad[0]] if len(bad) else x[order][-1])


def growth_entropy(model: ModelSpace, max_len: int, share: float = TOP_SHARE, n_radii: int = 24) -> GrowthEstimate:
    """Least-squares slope of ``log #{g : |g|_X <= R}`` against ``R``.

    On a tree the count runs over words up to ``max_len`` and the fit over the
    upper half of the lengths. For a Fuchsian model distinct elements are
    counted and trusted up to a completeness radius (see
    ``_completeness_radius``); the fit uses the upper half of that range.
    """
    if model.is_fuchsian:
        x, length = _distinct_elements(model, max_len)
        radius = _completeness_radius(x, length, max_len, share)
        allx = np.sort(x)
        radii = np.linspace(max(radius / 2, allx[0]), radius, n_radii)
        counts = np.searchsorted(allx, radii, side="right") + 1
    else:
        p = model.presentation
        radius = float(max_len)
        radii = np.arange(math.ceil(radius / 2), max_len + 1, dtype=float)
        counts = np.array([sum(count_reduced(p.rank, k) for k in range(int(r) + 1)) for r in radii])
    logn = np.log(counts)
    if len(radii) >= 2 and np.ptp(radii) > 0:
        A = np.vstack([radii, np.ones_like(radii)]).T
        coef, *_ = np.linalg.lstsq(A, logn, rcond=None)
        slope = float(coef[0])
        resid = float(np.sqrt(np.mean((A @ coef - logn) ** 2)))
    else:
        slope, resid = math.nan, math.nan
    conclusive = max_len >= 3 and len(np.unique(radii)) >= 3
    return GrowthEstimate(slope, resid, conclusive, radius)
