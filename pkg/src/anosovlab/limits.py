"""Sampled limit maps: attracting eigenlines and planes of group elements.

The limit map sends the attracting boundary point of ``w`` to the attracting
eigenline of ``rho(w)``; a dictionary of such pairs over an enumeration is a
sample of its graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
import scipy.linalg

from .matgap import (
    Functor,
    Representation,
    ScaledMatrix,
    _apply_functor,
    _log_spectrum,
    evaluate,
    evaluate_codes,
)
from .models import (
    BoundaryPoint,
    CirclePoint,
    ModelSpace,
    NonHyperbolicElement,
    TreeEnd,
    attracting_angles,
    attracting_boundary_point,
    visual_metric,
)
from .words import EnumerationMode, Word, invert_symbol, word_codes

PROXIMAL_GAP = math.log1p(1e-6)
MERGE_TOL = 1e-10
RANK_TOL = 1e-8


class NotProximal(ArithmeticError):
    """The required eigenvalue gap is below the proximality threshold."""


def _normalize_sign(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    big = np.abs(v) > 1e-12 * np.abs(v).max()
    first = int(np.argmax(big))
    return -v if v[first] < 0 else v


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """A line in R^d, stored as a unit vector with its first nonzero entry positive."""

    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)) or not np.any(v):
            raise ValueError("need a finite nonzero vector")
        object.__setattr__(self, "vector", _normalize_sign(v))

    @property
    def dim(self) -> int:
        return len(self.vector)


def _vec(p) -> np.ndarray:
    return p.vector if isinstance(p, ProjectivePoint) else np.asarray(p, dtype=float)


def wedge_norm(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``|u ^ v|`` from the 2x2 minors (last axis holds the vectors)."""
    outer = u[..., :, None] * v[..., None, :]
    minors = outer - np.swapaxes(outer, -1, -2)
    return np.sqrt(0.5 * np.sum(minors * minors, axis=(-1, -2)))


def fubini_study(p, q) -> float:
    """Angle between two lines, in ``[0, pi/2]``.

    Evaluated as ``atan2(|u ^ v|, |<u, v>|)``, which stays accurate for
    nearly equal lines where ``arccos`` loses half the digits.
    """
    u, v = _vec(p), _vec(q)
    return float(np.arctan2(wedge_norm(u, v), abs(u @ v)))


def fubini_study_batch(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.arctan2(wedge_norm(u, v), np.abs(np.sum(u * v, axis=-1)))


def fubini_study_pairwise(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """All-pairs line angles between the rows of ``u`` and ``v``.

    For unit vectors the angle is ``2 asin(min(|u - v|, |u + v|) / 2)``; the
    chord lengths come straight from coordinate differences, so small angles
    keep full relative accuracy.
    """
    u = u / np.linalg.norm(u, axis=1, keepdims=True)
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    chord = np.minimum(cdist(u, v), cdist(u, -v))
    return 2.0 * np.arcsin(np.minimum(chord / 2.0, 1.0))


# eigen decompositions -------------------------------------------------------

def _sorted_eig(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lam, vecs = np.linalg.eig(mats)
    order = np.argsort(-np.abs(lam), axis=1, kind="stable")
    lam = np.take_along_axis(lam, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)
    return lam, vecs


def _eigensystems(rep: Representation, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (of the scaled products) and eigenvector columns per row,
    sorted by decreasing modulus.

    For Sym^k and exterior-square representations the eigenvectors are the
    functor applied to the base eigenvectors, which keeps them accurate when
    the product is far from normal. Rows where the base spectrum is not real
    and simple fall back to a direct decomposition.
    """
    codes = np.asarray(codes)
    deriv = rep.derivation
    if deriv is None or deriv.kind is Functor.DIRECT_SUM_TRIVIAL:
        return _sorted_eig(evaluate_codes(rep, codes)[0])
    lam0, vec0 = _eigensystems(deriv.base, codes)
    real = np.all(lam0.imag == 0, axis=1)
    gaps = np.abs(np.diff(np.abs(lam0), axis=1))
    simple = real & np.all(gaps > 1e-14 * np.abs(lam0).max(axis=1, keepdims=True), axis=1)
    d = rep.degree
    lam = np.empty((len(codes), d), dtype=complex)
    vecs = np.empty((len(codes), d, d), dtype=complex)
    if np.any(simple):
        diag = np.zeros(lam0[simple].shape + (lam0.shape[1],))
        idx = np.arange(lam0.shape[1])
        diag[:, idx, idx] = lam0[simple].real
        lifted_lam = np.diagonal(_apply_functor(deriv.kind, deriv.k, diag), axis1=1, axis2=2)
        lifted_vec = _apply_functor(deriv.kind, deriv.k, vec0[simple].real)
        order = np.argsort(-np.abs(lifted_lam), axis=1, kind="stable")
        lam[simple] = np.take_along_axis(lifted_lam, order, axis=1)
        vecs[simple] = np.take_along_axis(lifted_vec, order[:, None, :], axis=2)
    if not np.all(simple):
        rest = ~simple
        lam[rest], vecs[rest] = _sorted_eig(evaluate_codes(rep, codes[rest])[0])
    return lam, vecs


def _real_top_vectors(vecs: np.ndarray) -> np.ndarray:
    """Top eigenvector per row with its complex phase removed."""
    v = vecs[:, :, 0]
    j = np.argmax(np.abs(v), axis=1)
    pivot = v[np.arange(len(v)), j]
    return (v * (np.abs(pivot) / pivot)[:, None]).real


def _gap_ok(rep: Representation, codes: np.ndarray, k: int) -> np.ndarray:
    ell = _log_spectrum(rep, codes, eig=True)
    if k >= ell.shape[1]:
        return np.zeros(len(codes), dtype=bool)
    return ell[:, k - 1] - ell[:, k] >= PROXIMAL_GAP


def _check_gap(rep: Representation, w: Word, k: int):
    if not _gap_ok(rep, rep.presentation.encode(w)[None, :], k)[0]:
        raise NotProximal(f"no eigenvalue gap at index {k} for {w}")


def _split_conjugate(w: Word) -> tuple[Word, Word]:
    """``(c, core)`` with ``w = c core c^-1`` and ``core`` cyclically reduced."""
    letters = w.letters
    i = 0
    while 2 * i + 1 < len(letters) and letters[-1 - i] == invert_symbol(letters[i]):
        i += 1
    return Word(letters[:i]), Word(letters[i : len(letters) - i])


def limit_point(rep: Representation, w: Word) -> ProjectivePoint:
    """Attracting eigenline of ``rho(w)``.

    For ``w = c core c^-1`` the eigenline of the short core is pushed forward
    by ``rho(c)``; the eigenvector of the long conjugate itself is far worse
    conditioned.
    """
    c, core = _split_conjugate(w)
    _check_gap(rep, core, 1)
    deriv = rep.derivation
    if len(c) and deriv is not None and deriv.kind is not Functor.DIRECT_SUM_TRIVIAL:
        # push the base eigenvectors and lift afterwards: the functor image of
        # rho(c) magnifies rounding errors far more than rho(c) itself
        lam0, vec0 = _eigensystems(deriv.base, rep.presentation.encode(core)[None, :])
        if np.all(lam0.imag == 0):
            pushed = evaluate(deriv.base, c).mat @ vec0[0].real
            return ProjectivePoint(_apply_functor(deriv.kind, deriv.k, pushed)[:, 0])
    _, vecs = _eigensystems(rep, rep.presentation.encode(core)[None, :])
    v = _real_top_vectors(vecs)[0]
    if len(c):
        v = evaluate(rep, c).mat @ v
    return ProjectivePoint(v)


def _planes(rep: Representation, codes: np.ndarray, k: int, lam, vecs) -> np.ndarray:
    """Top-``k`` eigenspace frames for rows already known to have the gap."""
    out = np.empty((len(codes), rep.degree, k))
    lifted = rep.derivation is not None and rep.derivation.kind is not Functor.DIRECT_SUM_TRIVIAL
    for i in range(len(codes)):
        if lifted and np.all(vecs[i].imag == 0):
            out[i] = np.linalg.qr(vecs[i].real[:, :k])[0]
            continue
        mats, _ = evaluate_codes(rep, codes[i : i + 1])
        mods = np.sort(np.abs(np.linalg.eigvals(mats[0])))[::-1]
        threshold = math.sqrt(mods[k - 1] * mods[k])
        _, z, sdim = scipy.linalg.schur(mats[0], output="real", sort=lambda re, im: np.hypot(re, im) > threshold)
        if sdim != k:
            raise NotProximal(f"ordered Schur form selected {sdim} of {k} eigenvalues")
        out[i] = z[:, :k]
    return out


def limit_plane(rep: Representation, w: Word, k: int) -> np.ndarray:
    """Orthonormal ``d x k`` frame of the top-``k`` generalized eigenspace."""
    d = rep.degree
    if not 1 <= k < d:
        raise ValueError(f"plane dimension {k} outside 1..{d - 1}")
    c, core = _split_conjugate(w)
    _check_gap(rep, core, k)
    codes = rep.presentation.encode(core)[None, :]
    lam, vecs = _eigensystems(rep, codes)
    frame = _planes(rep, codes, k, lam, vecs)[0]
    if len(c):
        frame = np.linalg.qr(evaluate(rep, c).mat @ frame)[0]
    return frame


def plane_residual(v: np.ndarray, frame: np.ndarray) -> float:
    """Distance from the unit vector ``v`` to the span of an orthonormal frame."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    return float(np.linalg.norm(v - frame @ (frame.T @ v)))


def transverse_det(v: np.ndarray, frame: np.ndarray) -> float:
    """``|det[v | frame]|`` for a unit ``v`` and an orthonormal ``(d-1)``-frame."""
    v = np.asarray(v, dtype=float)
    return abs(float(np.linalg.det(np.column_stack([v / np.linalg.norm(v), frame]))))


# dictionaries ---------------------------------------------------------------

@dataclass(eq=False)
class LimitSample:
    word: Word
    boundary: BoundaryPoint
    point: ProjectivePoint
    plane: np.ndarray | None = None


@dataclass(eq=False)
class LimitDictionary:
    samples: list[LimitSample]
    rep: Representation
    model: ModelSpace
    skipped: int = 0
    merged: int = 0
    depth: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.samples)

    def vectors(self) -> np.ndarray:
        return np.array([s.point.vector for s in self.samples])

    def up_to_depth(self, depth: int) -> "LimitDictionary":
        keep = [i for i, s in enumerate(self.samples) if len(s.word) <= depth]
        return LimitDictionary(
            [self.samples[i] for i in keep], self.rep, self.model, depth=[self.depth[i] for i in keep] if self.depth else []
        )


def _boundary_key(x: BoundaryPoint):
    return x.angle if isinstance(x, CirclePoint) else str(x.prefix)


def _merge(samples: list[LimitSample]) -> tuple[list[LimitSample], int]:
    """Drop samples whose boundary point repeats an earlier one."""
    if not samples:
        return samples, 0
    if isinstance(samples[0].boundary, TreeEnd):
        seen, out = set(), []
        for s in samples:
            key = _boundary_key(s.boundary)
            if key not in seen:
                seen.add(key)
                out.append(s)
        return out, len(samples) - len(out)
    angles = np.array([s.boundary.angle for s in samples])
    order = np.argsort(angles, kind="stable")
    drop = np.zeros(len(samples), dtype=bool)
    # walk runs of nearly equal angles; keep the earliest sample of each run
    run = [order[0]]
    runs = []
    for a, b in zip(order, order[1:]):
        if angles[b] - angles[a] < MERGE_TOL:
            run.append(b)
        else:
            runs.append(run)
            run = [b]
    runs.append(run)
    if len(runs) > 1 and angles[order[0]] + 2 * math.pi - angles[order[-1]] < MERGE_TOL:
        runs[0] = runs[0] + runs.pop()
    for r in runs:
        keep = min(r)
        for i in r:
            if i != keep:
                drop[i] = True
    out = [s for s, dr in zip(samples, drop) if not dr]
    return out, int(drop.sum())


def build_dictionary(rep: Representation, model: ModelSpace, max_len: int, plane_dim: int | None = None) -> LimitDictionary:
    """Pairs (attracting boundary point, attracting eigenline) over cyclic classes.

    With ``plane_dim`` set, each sample also carries the attracting
    ``plane_dim``-dimensional eigenspace; words lacking that gap are skipped.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if plane_dim is not None and not 1 <= plane_dim < rep.degree:
        raise ValueError(f"plane dimension {plane_dim} outside 1..{rep.degree - 1}")
    p = rep.presentation
    samples: list[LimitSample] = []
    skipped = 0
    for length in range(1, max_len + 1):
        codes = word_codes(p, length, EnumerationMode.CYCLIC_CLASSES)
        ok = _gap_ok(rep, codes, 1)
        if plane_dim:
            ok &= _gap_ok(rep, codes, plane_dim)
        if model.is_fuchsian:
            angles = attracting_angles(model, codes)
            ok &= ~np.isnan(angles)
        skipped += int(np.sum(~ok))
        codes = codes[ok]
        if not len(codes):
            continue
        lam, vecs = _eigensystems(rep, codes)
        points = _real_top_vectors(vecs)
        planes = _planes(rep, codes, plane_dim, lam, vecs) if plane_dim else [None] * len(codes)
        for i, row in enumerate(codes):
            w = p.decode(row)
            x = CirclePoint(angles[ok][i]) if model.is_fuchsian else attracting_boundary_point(model, w)
            samples.append(LimitSample(w, x, ProjectivePoint(points[i]), planes[i]))
    samples, merged = _merge(samples)
    return LimitDictionary(samples, rep, model, skipped, merged, [len(s.word) for s in samples])


def spanning_rank(dictionary: LimitDictionary, tol: float = RANK_TOL) -> int:
    """Numerical rank of the span of the sampled limit vectors."""
    d = dictionary.rep.degree
    if len(dictionary) < d:
        raise ValueError(f"need at least {d} samples, have {len(dictionary)}")
    s = np.linalg.svd(dictionary.vectors(), compute_uv=False)
    return int(np.sum(s > tol * s[0]))


@dataclass
class HyperconvexReport:
    min_abs_det: float
    worst_triple: tuple[Word, Word, Word]
    n_triples: int


def hyperconvex_check(
    dictionary: LimitDictionary,
    n_triples: int,
    min_sep: float,
    rng: np.random.Generator,
    max_attempts: int | None = None,
) -> HyperconvexReport:
    """Minimum of ``|det[v1 | v2 | plane3]|`` over random separated triples."""
    samples = [s for s in dictionary.samples if s.plane is not None]
    d = dictionary.rep.degree
    if not samples or samples[0].plane.shape[1] != d - 2:
        raise ValueError("dictionary samples need (d-2)-planes")
    if len(samples) < 3:
        raise ValueError("need at least three samples")
    m = dictionary.model
    attempts = max_attempts or 200 * n_triples
    best, worst, found = math.inf, None, 0
    for _ in range(attempts):
        if found == n_triples:
            break
        i, j, k = rng.choice(len(samples), size=3, replace=False)
        a, b, c = samples[i], samples[j], samples[k]
        if min(
            visual_metric(m, a.boundary, b.boundary),
            visual_metric(m, a.boundary, c.boundary),
            visual_metric(m, b.boundary, c.boundary),
        ) < min_sep:
            continue
        found += 1
        det = abs(float(np.linalg.det(np.column_stack([a.point.vector, b.point.vector, c.plane]))))
        if det < best:
            best, worst = det, (a.word, b.word, c.word)
    if found < n_triples:
        raise ValueError(f"found only {found} separated triples out of {n_triples}")
    return HyperconvexReport(best, worst, found)


def _as_matrix(g) -> np.ndarray:
    return g.mat if isinstance(g, ScaledMatrix) else np.asarray(g, dtype=float)


def lemma32_margins(gs: np.ndarray, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """Batched :func:`lemma32_property` over stacks of matrices and vectors."""
    s = np.linalg.svd(gs, compute_uv=False)
    factor = (2.0 / math.pi) * s[:, -1] * s[:, -2] / s[:, 0] ** 2
    gv1 = np.einsum("nij,nj->ni", gs, v1)
    gv2 = np.einsum("nij,nj->ni", gs, v2)
    return fubini_study_batch(gv1, gv2) - factor * fubini_study_batch(v1, v2)


def lemma32_property(g, v1, v2) -> float:
    """``d([g v1], [g v2]) - (2/pi) (s_d s_{d-1} / s_1^2) d([v1], [v2])``.

    Nonnegative for every invertible ``g``; the scale of ``g`` cancels.
    """
    m = _as_matrix(g)
    return float(lemma32_margins(m[None], np.asarray(v1, float)[None], np.asarray(v2, float)[None])[0])
