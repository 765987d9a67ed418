"""Overflow-safe word evaluation and singular/eigenvalue gap data.

Products are kept as ``2**e * mat`` with ``max|mat|`` in ``[1/2, 1)``; scaling
by powers of two is exact, so zero blocks and unit diagonals of block
triangular representations survive every product bit-for-bit.

Spectral data is read in the log domain through exterior powers:
``log(s_1 ... s_k) = log s_1(wedge^k g)`` and likewise for eigenvalue moduli.
Each exterior power is evaluated word-wise (it is a homomorphism), which keeps
relative accuracy for the lower singular values and eigenvalues even when the
spectrum of ``g`` spans many orders of magnitude.
"""
from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _parallel
from .words import (
    EnumerationMode,
    Presentation,
    Word,
    WordError,
    conjugator_lengths,
    dehn_shorten,
    enumerate_words,
    word_codes,
)

LN2 = math.log(2.0)
# log-modulus spread below which eigenvalues are treated as one cluster
CLUSTER_TOL = 1e-6
GAP_FLOOR = 1e-12
CHUNK = 40_000
EIG_ERROR_TOL = 1e-9
PERIODS = 12
SETTLE_TOL = 1e-6
CONVERGED_TOL = 1e-11


class NumericError(ArithmeticError):
    pass


def exterior_power_matrix(a: np.ndarray, k: int) -> np.ndarray:
    """Matrix of ``wedge^k a`` in the lex-ordered basis ``e_I`` (stacks allowed)."""
    d = a.shape[-1]
    if not 1 <= k <= d:
        raise ValueError(f"exterior power {k} of degree {d}")
    if k == 1:
        return np.array(a, dtype=float, copy=True)
    idx = np.array(list(itertools.combinations(range(d), k)))
    sub = a[..., idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def sym_power_matrix(g: np.ndarray, k: int) -> np.ndarray:
    """``Sym^k`` of a 2x2 matrix in the orthonormal weight basis (stacks allowed).

    Basis vector ``j`` is ``sqrt(C(k, j)) x^(k-j) y^j``, so orthogonal
    matrices go to orthogonal matrices and ``diag(l, 1/l)`` to
    ``diag(l^k, l^(k-2), ..., l^-k)``.
    """
    g = np.asarray(g, dtype=float)
    a, b = g[..., 0, 0, None], g[..., 0, 1, None]
    c, d = g[..., 1, 0, None], g[..., 1, 1, None]
    lead = g.shape[:-2]
    out = np.zeros(lead + (k + 1, k + 1))
    binom = np.array([math.comb(k, j) for j in range(k + 1)], dtype=float)
    for j in range(k + 1):
        # coefficients in t = y/x of (a + b t)^(k-j) (c + d t)^j
        poly = np.ones(lead + (1,))
        for lin0, lin1 in [(a, b)] * (k - j) + [(c, d)] * j:
            nxt = np.zeros(poly.shape[:-1] + (poly.shape[-1] + 1,))
            nxt[..., :-1] += poly * lin0
            nxt[..., 1:] += poly * lin1
            poly = nxt
        out[..., j, :] = np.sqrt(binom[j] / binom) * poly
    return out


def _sl2_inverse(g: np.ndarray) -> np.ndarray:
    (a, b), (c, d) = g
    return np.array([[d, -b], [-c, a]]) / (a * d - b * c)


def _inverse(m: np.ndarray) -> np.ndarray:
    """Matrix inverse that keeps an exact zero lower-left block exactly zero."""
    d = m.shape[0]
    if d == 2:
        return _sl2_inverse(m)
    for p in range(1, d):
        if not np.any(m[p:, :p]):
            ai, di = _inverse(m[:p, :p]), _inverse(m[p:, p:])
            out = np.zeros_like(m)
            out[:p, :p] = ai
            out[p:, p:] = di
            out[:p, p:] = -ai @ m[:p, p:] @ di
            return out
    if d == 1:
        return 1.0 / m
    return np.linalg.inv(m)


@dataclass(eq=False)
class Representation:
    """Generator images of a representation into GL_d(R).

    ``images`` holds every symbol of the alphabet, inverses included.
    """

    presentation: Presentation
    images: dict[str, np.ndarray]
    derivation: "Derivation | None" = None
    _exterior: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        symbols = self.presentation.alphabet.symbols
        missing = [s for s in symbols if s not in self.images]
        if missing:
            raise WordError(f"representation lacks images for {missing}")
        d = None
        for s in symbols:
            m = np.asarray(self.images[s], dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"image of {s} is not square")
            if d is None:
                d = m.shape[0]
            elif m.shape[0] != d:
                raise ValueError("images have different sizes")
            if not np.all(np.isfinite(m)):
                raise NumericError(f"non-finite entries in image of {s}")
            self.images[s] = m
        for g in self.presentation.alphabet.generators:
            a, b = self.images[g], self.images[g + "^-1"]
            tol = 1e-10 * max(1.0, np.abs(a).max() * np.abs(b).max())
            if np.abs(a @ b - np.eye(d)).max() > tol:
                raise ValueError(f"image of {g}^-1 is not the inverse of {g}")

    @classmethod
    def from_generators(cls, presentation: Presentation, generators: Mapping[str, Sequence]) -> "Representation":
        images = {}
        for g in presentation.alphabet.generators:
            if g not in generators:
                raise WordError(f"no image given for generator {g}")
            m = np.array(generators[g], dtype=float)
            images[g] = m
            images[g + "^-1"] = _inverse(m)
        extra = set(generators) - set(presentation.alphabet.generators)
        if extra:
            raise WordError(f"unknown generators {sorted(extra)}")
        return cls(presentation, images)

    @property
    def degree(self) -> int:
        return self.stack.shape[-1]

    @functools.cached_property
    def stack(self) -> np.ndarray:
        """Images in symbol-code order, shape ``(n_symbols, d, d)``."""
        out = np.array([self.images[s] for s in self.presentation.alphabet.symbols])
        out.setflags(write=False)
        return out

    @functools.cached_property
    def log_abs_det(self) -> np.ndarray:
        return np.linalg.slogdet(self.stack)[1]

    @functools.cached_property
    def diagonal_blocks(self) -> tuple[tuple[int, int], ...]:
        """Finest common block upper-triangular shape of all images.

        Detected from exact zeros, so every product shares it and its
        eigenvalues are those of the diagonal blocks.
        """
        d = self.degree
        cuts = [0]
        for p in range(1, d):
            if not np.any(self.stack[:, p:, :p]):
                cuts.append(p)
        cuts.append(d)
        return tuple(zip(cuts[:-1], cuts[1:]))

    def block(self, lo: int, hi: int) -> "Representation":
        """The representation on a diagonal block of :attr:`diagonal_blocks`."""
        key = ("block", lo, hi)
        if key not in self._exterior:
            imgs = {s: m[lo:hi, lo:hi].copy() for s, m in self.images.items()}
            self._exterior[key] = Representation(self.presentation, imgs)
        return self._exterior[key]

    def generator_images(self) -> dict[str, np.ndarray]:
        return {g: self.images[g] for g in self.presentation.alphabet.generators}

    def exterior(self, k: int) -> "Representation":
        if k == 1:
            return self
        if k not in self._exterior:
            imgs = {s: exterior_power_matrix(m, k) for s, m in self.images.items()}
            self._exterior[k] = Representation(self.presentation, imgs)
        return self._exterior[k]

    def scaled(self, c: float) -> "Representation":
        """Multiply every generator image by ``c > 0`` (inverses by ``1/c``)."""
        imgs = {}
        for s, m in self.images.items():
            imgs[s] = m / c if s.endswith("^-1") else m * c
        deriv = None
        if self.derivation is not None:
            deriv = self.derivation.shifted(math.log(c))
        return Representation(self.presentation, imgs, deriv)


@dataclass(frozen=True, eq=False)
class Derivation:
    """Records that a representation is ``F(base)`` for a functor ``F``.

    Spectral data of ``F(base)(w)`` is an exact function of that of
    ``base(w)``: every log singular value and log eigenvalue modulus is a
    fixed integer combination ``weights @ base_logs``. Reading it through the
    (smaller, better conditioned) base product avoids the loss of accuracy
    that ``F`` causes on non-normal products. ``log_shift`` carries a scalar
    multiple of the images, one entry per symbol code.
    """

    base: Representation
    kind: "Functor"
    k: int
    log_shift: np.ndarray | None = None

    @functools.cached_property
    def weights(self) -> np.ndarray:
        d = self.base.degree
        if self.kind is Functor.DIRECT_SUM_TRIVIAL:
            return np.vstack([np.eye(d), np.zeros((self.k, d))])
        if self.kind is Functor.SYM_POWER:
            return np.array([[self.k - j, j] for j in range(self.k + 1)], dtype=float)
        rows = []
        for i, j in itertools.combinations(range(d), 2):
            r = np.zeros(d)
            r[[i, j]] = 1.0
            rows.append(r)
        return np.array(rows)

    def shifted(self, log_c: float) -> "Derivation":
        n = len(self.base.presentation.alphabet)
        step = np.where(np.arange(n) % 2 == 0, log_c, -log_c)
        shift = step if self.log_shift is None else self.log_shift + step
        return Derivation(self.base, self.kind, self.k, shift)

    def lift(self, mat: np.ndarray) -> np.ndarray:
        return _apply_functor(self.kind, self.k, mat)

    def spectrum(self, codes: np.ndarray, eig: bool) -> np.ndarray:
        """Descending log spectra of ``F(base)(w)`` for each code row."""
        base = _log_spectrum(self.base, codes, eig)
        out = base @ self.weights.T
        if self.log_shift is not None and codes.shape[1]:
            out += self.log_shift[codes].sum(axis=1)[:, None]
        return -np.sort(-out, axis=1)


@dataclass(frozen=True)
class ScaledMatrix:
    """The matrix ``exp(log_scale) * mat``."""

    mat: np.ndarray
    log_scale: float = 0.0

    @classmethod
    def identity(cls, d: int) -> "ScaledMatrix":
        return cls(np.eye(d), 0.0)

    @classmethod
    def from_matrix(cls, a) -> "ScaledMatrix":
        mats, e = _renormalize(np.asarray(a, dtype=float)[None])
        return cls(mats[0], float(e[0]) * LN2)

    def __matmul__(self, other: "ScaledMatrix") -> "ScaledMatrix":
        mats, e = _renormalize((self.mat @ other.mat)[None])
        return ScaledMatrix(mats[0], self.log_scale + other.log_scale + float(e[0]) * LN2)

    def value(self) -> np.ndarray:
        return self.mat * math.exp(self.log_scale)

    @property
    def degree(self) -> int:
        return self.mat.shape[0]


def _renormalize(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    peak = np.abs(mats).max(axis=(1, 2))
    _, e = np.frexp(peak)
    return np.ldexp(mats, -e[:, None, None]), e


def evaluate_codes(rep: Representation, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate equal-length code rows; returns ``(mats, log_scales)``."""
    codes = np.asarray(codes)
    n, length = codes.shape
    d = rep.degree
    if length == 0:
        return np.broadcast_to(np.eye(d), (n, d, d)).copy(), np.zeros(n)
    stack = rep.stack
    mats, e = _renormalize(stack[codes[:, 0]])
    exps = e.astype(np.int64)
    for j in range(1, length):
        mats, e = _renormalize(mats @ stack[codes[:, j]])
        exps += e
    return mats, exps * LN2


def evaluate_cores(rep: Representation, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the cyclically reduced core of each row.

    Only conjugation-invariant data (eigenvalues, traces) may be read off the
    result. Conjugating by a long word makes the product far from normal and
    its eigenvalues ill conditioned; the core avoids that.
    """
    codes = np.asarray(codes)
    n, length = codes.shape
    strip = conjugator_lengths(codes)
    if not np.any(strip):
        return evaluate_codes(rep, codes)
    d = rep.degree
    mats, logs = np.empty((n, d, d)), np.empty(n)
    for s in np.unique(strip):
        sel = strip == s
        mats[sel], logs[sel] = evaluate_codes(rep, codes[sel][:, s : length - s])
    return mats, logs


def evaluate(rep: Representation, w: Word) -> ScaledMatrix:
    """Product of generator images in word order.

    Functor-derived representations apply the functor to the base product.
    """
    codes = rep.presentation.encode(w)[None, :]
    deriv = rep.derivation
    if deriv is None:
        mats, logs = evaluate_codes(rep, codes)
        return ScaledMatrix(mats[0], float(logs[0]))
    base = evaluate(deriv.base, w)
    shift = 0.0
    if deriv.log_shift is not None and len(w):
        shift = float(deriv.log_shift[codes[0]].sum())
    if deriv.kind is Functor.DIRECT_SUM_TRIVIAL:
        d = base.degree
        lifted = deriv.lift(base.mat)
        # the trivial block does not carry the base scale
        lifted[d:, d:] *= math.exp(max(-base.log_scale, -700.0))
        return ScaledMatrix.from_matrix(lifted) @ ScaledMatrix(np.eye(len(lifted)), base.log_scale + shift)
    degree = deriv.k if deriv.kind is Functor.SYM_POWER else 2
    lifted = ScaledMatrix.from_matrix(deriv.lift(base.mat))
    return ScaledMatrix(lifted.mat, lifted.log_scale + degree * base.log_scale + shift)


def _check_finite(mats: np.ndarray):
    if not np.all(np.isfinite(mats)):
        raise NumericError("non-finite matrix entries")


def _top_log_sv(mats: np.ndarray) -> np.ndarray:
    if mats.shape[-1] == 1:
        return np.log(np.abs(mats[:, 0, 0]))
    return np.log(np.linalg.norm(mats, ord=2, axis=(1, 2)))


def _cluster_means(logmods: np.ndarray, tol: float = CLUSTER_TOL) -> np.ndarray:
    """Replace each log-modulus by the mean of its cluster (rows sorted desc)."""
    out = logmods.copy()
    n, m = logmods.shape
    start = np.zeros(n, dtype=int)
    for j in range(1, m + 1):
        # a cluster ends where the next value drops by more than tol
        if j < m:
            brk = (logmods[:, j - 1] - logmods[:, j]) > tol
        else:
            brk = np.ones(n, dtype=bool)
        for i in np.nonzero(brk)[0]:
            s = start[i]
            if j - s > 1:
                out[i, s:j] = logmods[i, s:j].mean()
            start[i] = j
    return out


def _top_log_eig(mats: np.ndarray) -> np.ndarray:
    if mats.shape[-1] == 1:
        return np.log(np.abs(mats[:, 0, 0]))
    with np.errstate(divide="ignore"):
        lm = np.log(np.abs(np.linalg.eigvals(mats)))
    top = lm.max(axis=1)
    member = lm >= (top - CLUSTER_TOL)[:, None]
    return np.where(member, lm, 0.0).sum(axis=1) / member.sum(axis=1)


def singular_values(g: ScaledMatrix) -> np.ndarray:
    """Log singular values of ``g``, descending (direct SVD)."""
    _check_finite(g.mat)
    with np.errstate(divide="ignore"):
        return np.log(np.linalg.svd(g.mat, compute_uv=False)) + g.log_scale


def eigen_moduli(g: ScaledMatrix) -> np.ndarray:
    """Log eigenvalue moduli of ``g``, descending, clusters averaged.

    Averaging the log-moduli of a numerically split cluster (a perturbed
    Jordan block or a complex pair) recovers the common modulus to working
    accuracy, since the cluster's determinant is well conditioned.
    """
    _check_finite(g.mat)
    try:
        ev = np.linalg.eigvals(g.mat)
    except np.linalg.LinAlgError as exc:
        raise NumericError(str(exc)) from exc
    with np.errstate(divide="ignore"):
        lm = np.sort(np.log(np.abs(ev)))[::-1]
    return _cluster_means(lm[None, :])[0] + g.log_scale


def _log_det_codes(rep: Representation, codes: np.ndarray) -> np.ndarray:
    if codes.shape[1] == 0:
        return np.zeros(len(codes))
    return rep.log_abs_det[codes].sum(axis=1)


def _log_spectrum(rep: Representation, codes: np.ndarray, eig: bool) -> np.ndarray:
    """Full descending log spectra, shape ``(rows, d)``."""
    if rep.derivation is not None:
        return rep.derivation.spectrum(codes, eig)
    if eig and len(rep.diagonal_blocks) > 1:
        parts = [_log_spectrum(rep.block(lo, hi), codes, True) for lo, hi in rep.diagonal_blocks]
        return -np.sort(-np.concatenate(parts, axis=1), axis=1)
    d = rep.degree
    tops = _exterior_tops(rep, codes, range(d + 1), eig)
    cum = np.stack([tops[k] for k in range(d + 1)], axis=1)
    return np.minimum.accumulate(np.diff(cum, axis=1), axis=1)


def _exterior_tops(rep: Representation, codes: np.ndarray, ks: Iterable[int], eig: bool) -> dict[int, np.ndarray]:
    """``k -> log s_1`` (or top log-modulus) of ``wedge^k rho(w)`` per row."""
    d = rep.degree
    if rep.derivation is not None or (eig and len(rep.diagonal_blocks) > 1):
        spec = _log_spectrum(rep, codes, eig)
        cum = np.concatenate([np.zeros((len(codes), 1)), np.cumsum(spec, axis=1)], axis=1)
        return {k: cum[:, k] for k in ks}
    groups = _eig_groups(rep, codes) if eig else [(slice(None), codes)]
    refine = eig and d >= 3
    suspect = np.zeros(len(codes), dtype=bool)
    out = {}
    for k in ks:
        if k == 0:
            out[k] = np.zeros(len(codes))
        elif k == d:
            out[k] = _log_det_codes(rep, codes)
        else:
            out[k] = np.empty(len(codes))
            for idx, sub in groups:
                mats, logs = evaluate_codes(rep.exterior(k), sub)
                _check_finite(mats)
                out[k][idx] = (_top_log_eig(mats) if eig else _top_log_sv(mats)) + logs
                if refine:
                    bound = _log_rounding_bound(rep.exterior(k), sub)
                    suspect[idx] |= _top_eig_error(mats, bound - logs) > EIG_ERROR_TOL
    if refine and np.any(suspect):
        for idx, sub in groups:
            rows = np.arange(len(codes))[idx]
            _refine_rows(rep, rows[suspect[rows]], sub[suspect[rows]], out)
    return out


def _periodic_tops(rep: Representation, codes: np.ndarray, periods: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal iteration through the factors of each product.

    Returns ``log |l_1 ... l_k|`` for ``k = 0..d`` and a mask of the values
    that settled (changed by at most ``SETTLE_TOL`` relative over the last
    period run). The product is never formed: every step is a backward-stable
    product and QR of one factor, so the result is exact for slightly
    perturbed *factors*, far better than eig of a rounded product when the
    factors cancel. Rows leave the iteration once every value has converged
    to ``CONVERGED_TOL`` or stopped improving below ``SETTLE_TOL``.
    """
    n, length = codes.shape
    d = rep.degree
    # a generic start: the coordinate frame can be invariant under every factor
    start = np.linalg.qr(np.random.Generator(np.random.Philox(0)).standard_normal((d, d)))[0]
    q = np.broadcast_to(start, (n, d, d)).copy()
    cum = np.zeros((n, d + 1))
    change = np.full((n, d + 1), np.inf)
    active = np.arange(n)
    for period in range(periods):
        acc = np.zeros((len(active), d))
        qa = q[active]
        for j in range(length - 1, -1, -1):
            qa, r = np.linalg.qr(rep.stack[codes[active, j]] @ qa)
            with np.errstate(divide="ignore"):
                acc += np.log(np.abs(np.diagonal(r, axis1=1, axis2=2)))
        q[active] = qa
        new = np.hstack([np.zeros((len(active), 1)), np.cumsum(acc, axis=1)])
        before = change[active]
        if period:
            change[active] = np.abs(new - cum[active]) / (1.0 + np.abs(new))
        cum[active] = new
        now = change[active]
        # converged, or down at the rounding floor where changes stop shrinking
        done = (now <= CONVERGED_TOL) | ((now <= SETTLE_TOL) & (now > 0.5 * before))
        active = active[~done.all(axis=1)]
        if not len(active):
            break
    return cum, change <= SETTLE_TOL


def _partial_log_norms(rep: Representation, codes: np.ndarray, reverse: bool) -> np.ndarray:
    """Log Frobenius norms of the prefix (or suffix) products, ``(rows, L + 1)``."""
    n, length = codes.shape
    out = np.zeros((n, length + 1))
    part = np.broadcast_to(np.eye(rep.degree), (n, rep.degree, rep.degree)).copy()
    total = np.zeros(n)
    order = range(length - 1, -1, -1) if reverse else range(length)
    for t, j in enumerate(order):
        part = rep.stack[codes[:, j]] @ part if reverse else part @ rep.stack[codes[:, j]]
        size = np.linalg.norm(part, axis=(1, 2))
        part /= size[:, None, None]
        total += np.log(size)
        out[:, t + 1] = total
    return out


def _log_rounding_bound(rep: Representation, codes: np.ndarray) -> np.ndarray:
    """Log of ``sum_i ||A_1..A_(i-1)|| ||A_i|| ||A_(i+1)..A_L||`` per row.

    Up to a factor ``eps`` this bounds the rounding error of the product
    formed left to right: the error made at step ``i`` is carried by the
    remaining suffix. It exceeds ``||M||`` by a lot when the factors cancel.
    """
    length = codes.shape[1]
    if length == 0:
        return np.zeros(len(codes))
    prefix = _partial_log_norms(rep, codes, reverse=False)
    suffix = _partial_log_norms(rep, codes, reverse=True)
    own = np.log(np.linalg.norm(rep.stack, axis=(1, 2)))[codes]
    terms = [prefix[:, i] + own[:, i] + suffix[:, length - 1 - i] for i in range(length)]
    return np.logaddexp.reduce(np.stack(terms, axis=1), axis=1)


def _top_eig_error(mats: np.ndarray, log_bound: np.ndarray) -> np.ndarray:
    """First-order relative error of the computed top eigenvalue per product.

    Forming a product of ``n`` factors perturbs it by up to
    ``eps * prod ||A_i||`` (``log_bound`` is the log of that product relative
    to the scaling of ``mats``), which can dwarf ``||M||`` when the factors
    cancel. The eigenvalue moves by that much times
    ``kappa = ||y|| ||x|| / |y x|``.
    """
    if mats.shape[-1] == 1 or len(mats) == 0:
        return np.zeros(len(mats))
    try:
        lam, vecs = np.linalg.eig(mats)
        left = np.linalg.inv(vecs)
    except np.linalg.LinAlgError:
        return np.full(len(mats), np.inf)
    top = np.argmax(np.abs(lam), axis=1)
    n = np.arange(len(mats))
    kappa = np.linalg.norm(left[n, top, :], axis=1) * np.linalg.norm(vecs[n, :, top], axis=1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        est = np.finfo(float).eps * np.exp(log_bound) * kappa / np.abs(lam[n, top])
    return np.nan_to_num(est, nan=np.inf)


def _refine_rows(rep: Representation, rows: np.ndarray, codes: np.ndarray, out: dict[int, np.ndarray]) -> None:
    """Replace eig-route values by periodic iteration on ill-conditioned rows.

    A cumulative value is replaced only once it has settled; without an
    eigenvalue gap at ``k`` (a complex pair, say) it never does, and the
    eig-route value is kept.
    """
    if len(rows) == 0 or codes.shape[1] == 0:
        return
    last, settled = _periodic_tops(rep, codes, PERIODS)
    for k, values in out.items():
        if 0 < k < rep.degree:
            values[rows] = np.where(settled[:, k], last[:, k], values[rows])


def _best_rotations(rep: Representation, codes: np.ndarray) -> np.ndarray:
    """Rotate each cyclically reduced row to the conjugate of least norm."""
    n, length = codes.shape
    if length < 2:
        return codes
    shifts = np.arange(length)
    cand = np.stack([np.roll(codes, -j, axis=1) for j in shifts], axis=1)
    mats, logs = evaluate_codes(rep, cand.reshape(n * length, length))
    size = (np.log(np.linalg.norm(mats, axis=(1, 2))) + logs).reshape(n, length)
    best = np.argmin(size, axis=1)
    return cand[np.arange(n), best]


def _eig_groups(rep: Representation, codes: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Row groups with conjugation-equivalent, better conditioned words.

    Conjugators are stripped, and for degree >= 3 each cyclic core is
    rotated to the conjugate with the smallest product. A long excursion of
    the basepoint away from the axis makes the product far from normal, and
    for higher-degree images that costs most of the eigenvalue digits.
    Cores holding most of a relator are first shortened by Dehn's algorithm.
    """
    n, length = codes.shape
    strip = conjugator_lengths(codes)
    groups = []
    for s in np.unique(strip):
        idx = np.nonzero(strip == s)[0]
        for rows, sub in dehn_shorten(rep.presentation, codes[idx][:, s : length - s]):
            if rep.degree >= 3:
                sub = _best_rotations(rep, sub)
            groups.append((idx[rows], sub))
    return groups


def _chunks(n: int, size: int = CHUNK):
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def gap_arrays(rep: Representation, codes: np.ndarray, k: int = 1, sigma: bool = True, eig: bool = True) -> dict[str, np.ndarray]:
    """Batched ``log s_k/s_{k+1}`` and ``log l_k/l_{k+1}`` for equal-length rows.

    Keys ``sigma_gap``/``log_s1`` and ``eig_gap``/``log_l1``; either half can
    be switched off.
    """
    codes = np.asarray(codes)
    d = rep.degree
    if not 1 <= k < d:
        raise ValueError(f"gap index {k} outside 1..{d - 1}")
    ks = sorted({1, k - 1, k, k + 1})
    kinds = [name for name, on in (("sigma", sigma), ("eig", eig)) if on]

    def work(bounds):
        lo, hi = bounds
        sub = codes[lo:hi]
        return {kind: _exterior_tops(rep, sub, ks, eig=kind == "eig") for kind in kinds}

    parts = _parallel.map_ordered(work, _chunks(len(codes)))
    out = {}
    for kind in kinds:
        tops = {j: np.concatenate([p[kind][j] for p in parts]) if parts else np.zeros(0) for j in ks}
        gap = 2 * tops[k] - tops[k - 1] - tops[k + 1]
        gap[gap < GAP_FLOOR] = 0.0
        label = "sigma" if kind == "sigma" else "eig"
        out[f"{label}_gap"] = gap
        out["log_s1" if kind == "sigma" else "log_l1"] = tops[1]
    return out


def log_sigma(rep: Representation, w: Word) -> np.ndarray:
    """All log singular values of ``rho(w)``, descending, via exterior powers."""
    return _log_spectrum(rep, rep.presentation.encode(w)[None, :], eig=False)[0]


def log_ell_codes(rep: Representation, codes: np.ndarray) -> np.ndarray:
    """Batched log eigenvalue moduli, one descending row per code row."""
    codes = np.asarray(codes)
    parts = _parallel.map_ordered(lambda b: _log_spectrum(rep, codes[b[0] : b[1]], True), _chunks(len(codes)))
    return np.concatenate(parts) if parts else np.zeros((0, rep.degree))


def log_ell(rep: Representation, w: Word) -> np.ndarray:
    """All log eigenvalue moduli of ``rho(w)``, descending, via exterior powers."""
    return _log_spectrum(rep, rep.presentation.encode(w)[None, :], eig=True)[0]


@dataclass(frozen=True)
class GapData:
    log_sigma: np.ndarray
    log_ell: np.ndarray
    word_len: int
    model_len: float | None = None
    model_stable_len: float | None = None


def gap_data(rep: Representation, w: Word, model=None) -> GapData:
    ml = msl = None
    if model is not None:
        ml = model.length(w)
        msl = model.stable_length(w)
    return GapData(log_sigma(rep, w), log_ell(rep, w), len(w), ml, msl)


def first_gaps(rep: Representation, w: Word) -> tuple[float, float]:
    """``(log s1/s2, log l1/l2)`` of ``rho(w)``."""
    if rep.degree < 2:
        raise ValueError("first gaps need degree >= 2")
    g = gap_arrays(rep, rep.presentation.encode(w)[None, :], 1)
    return float(g["sigma_gap"][0]), float(g["eig_gap"][0])


def gap_arrays_for_words(rep: Representation, words: Sequence[Word], k: int = 1) -> dict[str, np.ndarray]:
    """:func:`gap_arrays` for words of mixed lengths, results in input order."""
    n = len(words)
    out: dict[str, np.ndarray] = {}
    by_len: dict[int, list[int]] = {}
    for i, w in enumerate(words):
        by_len.setdefault(len(w), []).append(i)
    for length, idx in by_len.items():
        codes = np.array([rep.presentation.encode(words[i]) for i in idx], dtype=np.int8).reshape(len(idx), length)
        part = gap_arrays(rep, codes, k)
        for key, vals in part.items():
            out.setdefault(key, np.empty(n))[idx] = vals
    return out


class Functor(enum.Enum):
    DIRECT_SUM_TRIVIAL = "direct_sum_trivial"
    SYM_POWER = "sym_power"
    EXTERIOR_SQUARE = "exterior_square"


def _apply_functor(f: Functor, k: int, m: np.ndarray) -> np.ndarray:
    """Functor on a matrix or a stack of matrices."""
    d = m.shape[-1]
    if f is Functor.DIRECT_SUM_TRIVIAL:
        out = np.zeros(m.shape[:-2] + (d + k, d + k))
        out[..., :, :] = np.eye(d + k)
        out[..., :d, :d] = m
        return out
    if f is Functor.SYM_POWER:
        return sym_power_matrix(m, k)
    return exterior_power_matrix(m, 2)


def functor(rep: Representation, f, k: int = 1) -> Representation:
    """Apply a representation functor generator-wise.

    The result remembers ``rep`` as its base, so its spectral data is read
    from ``rep`` (see :class:`Derivation`).
    """
    f = Functor(f) if not isinstance(f, Functor) else f
    d = rep.degree
    if f is Functor.DIRECT_SUM_TRIVIAL and k < 1:
        raise ValueError("need k >= 1 trivial summands")
    if f is Functor.SYM_POWER:
        if d != 2:
            raise ValueError("symmetric powers are only built for degree-2 input")
        if k < 1:
            raise ValueError("need k >= 1")
    if f is Functor.EXTERIOR_SQUARE:
        if d < 2:
            raise ValueError("exterior square needs degree >= 2")
        k = 2
    images = {s: _apply_functor(f, k, m) for s, m in rep.images.items()}
    return Representation(rep.presentation, images, Derivation(rep, f, k))


@dataclass
class GapScan:
    epsilon: float
    R: float
    k: int
    anosov: bool
    table: list[tuple[str, float, float]]


def _lower_hull(x: np.ndarray, y: np.ndarray) -> list[int]:
    order = np.lexsort((y, x))
    hull: list[int] = []
    for i in order:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def support_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Slope of the lower hull at half the largest ``x`` and the offset
    making that line a minorant.

    Returns ``(eps, R)`` with ``eps * x - R <= y`` for every point. The hull
    edge over the middle of the range is used because the final edges are
    set by a handful of the longest words, while slowly growing families
    (powers of one element, say) show up lower down.
    """
    hull = _lower_hull(x, y)
    if len(hull) < 2:
        eps = 0.0
    else:
        hx = x[hull]
        mid = 0.5 * float(np.max(x))
        j = int(np.clip(np.searchsorted(hx, mid, side="right"), 1, len(hull) - 1))
        a, b = hull[j - 1], hull[j]
        eps = float((y[b] - y[a]) / (x[b] - x[a]))
    R = float(np.max(eps * x - y))
    return eps, max(R, 0.0)


def anosov_gap_scan(rep: Representation, model, k: int, max_len: int, min_epsilon: float = 0.05) -> GapScan:
    """Fit ``log s_k/s_{k+1} >= eps |g|_X - R`` over all reduced words.

    ``eps`` is the slope of the lower convex hull at mid-range; the
    representation is flagged Anosov in index ``k`` when ``eps >= min_epsilon``.
    """
    p = rep.presentation
    xs, ys, table = [np.zeros(1)], [np.zeros(1)], [("", 0.0, 0.0)]
    for length in range(1, max_len + 1):
        codes = word_codes(p, length, EnumerationMode.ALL_REDUCED)
        gx = model.lengths(codes)
        gy = gap_arrays(rep, codes, k, eig=False)["sigma_gap"]
        xs.append(gx)
        ys.append(gy)
        for row, a, b in zip(codes, gx, gy):
            table.append((str(p.decode(row)), float(a), float(b)))
    x, y = np.concatenate(xs), np.concatenate(ys)
    eps, R = support_line(x, y)
    return GapScan(eps, R, k, eps >= min_epsilon, table)


def ams_witness(rep: Representation, model, w: Word, radius: int) -> tuple[Word, float]:
    """Search ``|f| <= radius`` so that ``w f`` has eigen data close to the
    singular data of ``w`` and stable length close to ``|w|_X``."""
    if radius > 4:
        raise ValueError("radius is capped at 4")
    p = rep.presentation
    cands = [Word()]
    if radius >= 1:
        cands += list(enumerate_words(p, radius))
    target = log_sigma(rep, w)
    target_len = model.length(w)
    products = [w * f for f in cands]
    d = rep.degree
    best, best_val = cands[0], math.inf
    for f, wf in zip(cands, products):
        ell = log_ell(rep, wf)
        try:
            stable = model.stable_length(wf)
        except ArithmeticError:
            continue
        disc = max(abs(target_len - stable), abs(target[0] - ell[0]), abs(target[1] - ell[1]) if d > 1 else 0.0)
        if disc < best_val - 1e-15:
            best, best_val = f, disc
    return best, float(best_val)
