import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anosovlab.families import psi_t
from anosovlab.matgap import (
    Functor,
    NumericError,
    Representation,
    ScaledMatrix,
    ams_witness,
    anosov_gap_scan,
    eigen_moduli,
    evaluate,
    first_gaps,
    functor,
    gap_data,
    log_ell,
    log_ell_codes,
    log_sigma,
    singular_values,
    support_line,
)
from anosovlab.words import EnumerationMode, Presentation, Word, dehn_shorten, word_codes

SURF = Presentation.surface_genus2()
F1 = Presentation.free(1)
F2 = Presentation.free(2)
words = st.lists(st.sampled_from(SURF.alphabet.symbols), max_size=30).map(lambda xs: Word.parse(" ".join(xs)))


def one_gen(m):
    return Representation.from_generators(F1, {"a": m})


def mp_log_sigma(rep, w, dps=60):
    """Singular values of the exact product in high precision."""
    with mpmath.workdps(dps):
        g = mpmath.eye(rep.degree)
        for s in w:
            g = g * mpmath.matrix(rep.images[s].tolist())
        sv = mpmath.svd_r(g, compute_uv=False)
        return sorted((float(mpmath.log(x)) for x in sv), reverse=True)


def test_representation_inverse_invariant(rho1, sym3, rho_st):
    # relative to the conditioning of the pair: Sym^3 images reach 10^3
    for rep in (rho1, sym3, rho_st):
        for g in rep.presentation.alphabet.generators:
            a, b = rep.images[g], rep.images[g + "^-1"]
            scale = np.linalg.norm(a, 2) * np.linalg.norm(b, 2)
            assert np.abs(a @ b - np.eye(rep.degree)).max() < 1e-10 * max(1.0, scale / 100)


def test_non_finite_rejected():
    with pytest.raises(NumericError):
        one_gen([[np.nan, 0.0], [0.0, 1.0]])


def test_evaluate_examples():
    rep = one_gen(np.diag([2.0, 0.5]))
    e = evaluate(rep, Word())
    assert np.array_equal(e.mat, np.eye(2)) and e.log_scale == 0.0
    g = evaluate(rep, Word.parse("a") ** 100)
    assert 0.5 <= np.abs(g.mat).max() <= 2
    assert g.log_scale + math.log(g.mat[0, 0]) == pytest.approx(100 * math.log(2), rel=1e-14)
    assert singular_values(g) == pytest.approx([100 * math.log(2), -100 * math.log(2)], rel=1e-12)


def test_evaluate_inverse_pair(rho1):
    w = Word.parse("a1 b1 a2^-1 b2")
    g = evaluate(rho1, w).value() @ evaluate(rho1, w.inverse()).value()
    assert np.allclose(g, np.eye(2), atol=1e-9)


def test_singular_value_examples():
    assert singular_values(ScaledMatrix.from_matrix(np.diag([3.0, 1 / 3]))) == pytest.approx([math.log(3), -math.log(3)])
    th = 0.7
    rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    assert singular_values(ScaledMatrix.from_matrix(rot)) == pytest.approx([0, 0], abs=1e-15)
    j1 = ScaledMatrix.from_matrix([[1.0, 1.0], [0.0, 1.0]])
    assert singular_values(j1)[0] == pytest.approx(math.log((1 + math.sqrt(5)) / 2), rel=1e-12)


def test_eigen_moduli_examples():
    assert eigen_moduli(ScaledMatrix.from_matrix(np.diag([2.0, 0.5]))) == pytest.approx([math.log(2), -math.log(2)])
    assert eigen_moduli(ScaledMatrix.from_matrix([[1.0, 0.3], [0.0, 1.0]])) == pytest.approx([0, 0], abs=1e-15)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert eigen_moduli(ScaledMatrix.from_matrix(rot)) == pytest.approx([0, 0], abs=1e-15)


def test_first_gaps_examples(rho1, rho_st):
    assert first_gaps(rho1, Word()) == (0.0, 0.0)
    rep = one_gen(np.diag([4.0, 2.0, 1.0]))
    s, e = first_gaps(rep, Word.parse("a"))
    assert s == pytest.approx(math.log(2)) and e == pytest.approx(math.log(2))
    for text in ("a1", "b1 a2", "a1 b1^-1 b2 b2"):
        w = Word.parse(text)
        assert first_gaps(rho_st, w)[1] == pytest.approx(log_ell(rho1, w)[0], rel=1e-9)


def test_first_gaps_needs_degree_two():
    with pytest.raises(ValueError):
        first_gaps(one_gen([[2.0]]), Word.parse("a"))


def test_functor_examples():
    lam = 1.7
    base = one_gen(np.diag([lam, 1 / lam]))
    s3 = functor(base, Functor.SYM_POWER, 3)
    assert s3.degree == 4
    assert np.allclose(s3.images["a"], np.diag([lam**3, lam, 1 / lam, lam**-3]))
    a, b, c = 2.0, 3.0, 0.5
    w2 = functor(one_gen(np.diag([a, b, c])), Functor.EXTERIOR_SQUARE)
    assert w2.degree == 3
    assert sorted(np.diag(w2.images["a"])) == pytest.approx(sorted([a * b, a * c, b * c]))
    assert np.count_nonzero(w2.images["a"] - np.diag(np.diag(w2.images["a"]))) == 0


def test_direct_sum_adds_unit_modulus(rho1, dsum1):
    assert dsum1.degree == 3
    for text in ("a1", "a1 b2", "b1^-1 a2 a2"):
        w = Word.parse(text)
        expected = sorted(list(log_ell(rho1, w)) + [0.0], reverse=True)
        got = eigen_moduli(evaluate(dsum1, w))
        assert got == pytest.approx(expected, abs=1e-9)


def test_functor_rejections(rho1, sym3):
    with pytest.raises(ValueError):
        functor(sym3, Functor.SYM_POWER, 2)
    with pytest.raises(ValueError):
        functor(rho1, Functor.DIRECT_SUM_TRIVIAL, 0)


def test_gap_data_lists(rho1, hmodel, sym3):
    w = Word.parse("a1 b1 a2")
    gd = gap_data(sym3, w, hmodel)
    assert np.all(np.diff(gd.log_sigma) <= 1e-12) and np.all(np.diff(gd.log_ell) <= 1e-12)
    assert abs(gd.log_sigma.sum()) < 1e-7 and abs(gd.log_ell.sum()) < 1e-7
    assert gd.model_len == pytest.approx(hmodel.length(w))
    assert gd.word_len == 3


def test_support_line_minorizes():
    x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    y = np.array([0.0, 1.2, 1.9, 3.1, 4.0])
    eps, R = support_line(x, y)
    assert np.all(eps * x - R <= y + 1e-12)


def test_gap_scan_fuchsian(rho1, hmodel):
    scan = anosov_gap_scan(rho1, hmodel, 1, 5)
    assert scan.epsilon == pytest.approx(1.0, abs=1e-9)
    assert scan.R == pytest.approx(0.0, abs=1e-8)
    assert scan.anosov


def test_gap_scan_direct_sum(dsum1, hmodel):
    scan = anosov_gap_scan(dsum1, hmodel, 1, 5)
    assert 0.35 < scan.epsilon < 0.65 and scan.anosov


def test_gap_scan_unipotent_not_anosov(hmodel):
    scan = anosov_gap_scan(psi_t(SURF, 0.2), hmodel, 1, 6)
    assert scan.epsilon < 0.05 and not scan.anosov


def test_ams_witness_examples(rho1, hmodel):
    assert ams_witness(rho1, hmodel, Word(), 2) == (Word(), 0.0)
    w = Word.parse("a1 b1 a2")
    f, disc = ams_witness(rho1, hmodel, w, 2)
    assert disc < 2.0
    conj = Word.parse("b2 b2 b1") * w * Word.parse("b2 b2 b1").inverse()
    _, base_disc = ams_witness(rho1, hmodel, conj, 0)
    _, best = ams_witness(rho1, hmodel, conj, 2)
    assert best < base_disc
    with pytest.raises(ValueError):
        ams_witness(rho1, hmodel, w, 5)


# properties ------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(words, st.floats(0.1, 10.0))
def test_scale_invariance(rho_st, w, c):
    a = first_gaps(rho_st, w)
    b = first_gaps(rho_st.scaled(c), w)
    assert a == pytest.approx(b, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(words)
def test_det_consistency(rho_st, w):
    assert abs(log_sigma(rho_st, w).sum()) < 1e-7
    assert abs(log_ell(rho_st, w).sum()) < 1e-7


@settings(max_examples=40, deadline=None)
@given(words, words)
def test_submultiplicative(sym3, u, v):
    lhs = log_sigma(sym3, u * v)[0]
    assert lhs <= log_sigma(sym3, u)[0] + log_sigma(sym3, v)[0] + 1e-9


@settings(max_examples=40, deadline=None)
@given(words.filter(lambda w: len(w) > 0), st.integers(1, 6))
def test_eigen_homogeneity(rho_st, w, n):
    one = log_ell(rho_st, w)
    assert log_ell(rho_st, w**n) == pytest.approx(n * one, abs=1e-7 * n)


@settings(max_examples=40, deadline=None)
@given(words)
def test_exterior_square_identity(rho_st, w):
    wedge = functor(rho_st, Functor.EXTERIOR_SQUARE)
    s = log_sigma(rho_st, w)
    assert log_sigma(wedge, w)[0] == pytest.approx(s[0] + s[1], abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(words)
def test_log_sigma_against_high_precision(rho_st, w):
    assert log_sigma(rho_st, w) == pytest.approx(mp_log_sigma(rho_st, w), abs=1e-9 * max(1, len(w)))


def test_long_products_do_not_overflow(rho1):
    w = Word.parse("a1 b1 a2 b2 a1") ** 80
    g = evaluate(rho1, w)
    assert np.all(np.isfinite(g.mat)) and 0.5 <= np.abs(g.mat).max() <= 2
    assert log_sigma(rho1, w)[0] > 100


def plain_copy(rep):
    """The same generator matrices without the record of how they were built."""
    gens = rep.presentation.alphabet.generators
    return Representation.from_generators(rep.presentation, {g: rep.images[g] for g in gens})


def test_plain_matrices_match_derived_eigen_data(sym3):
    # the derived rep reads exact functor spectra; plain 4x4 products cancel
    # heavily on words holding most of a relator
    plain = plain_copy(sym3)
    for length in range(1, 7):
        codes = word_codes(SURF, length, EnumerationMode.CYCLIC_CLASSES)
        err = np.abs(log_ell_codes(plain, codes) - log_ell_codes(sym3, codes)).max()
        assert err < 1e-6, (length, err)


def test_plain_matrices_on_relator_word(sym3, rho1):
    w = SURF.parse("a1 b1 a1^-1 b1^-1 a2 b2 a2^-1")
    assert log_ell(plain_copy(sym3), w) == pytest.approx(log_ell(sym3, SURF.parse("b2")), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(SURF.alphabet.symbols), min_size=1, max_size=14))
def test_dehn_shorten_preserves_trace(rho1, xs):
    core, _ = SURF.cyclic_reduce(Word.parse(" ".join(xs)))
    if not len(core):
        return
    [(_, out)] = dehn_shorten(SURF, SURF.encode(core)[None, :])
    before, after = evaluate(rho1, core), evaluate(rho1, SURF.decode(out[0]))
    tr_before = abs(np.trace(before.mat)) * math.exp(before.log_scale)
    tr_after = abs(np.trace(after.mat)) * math.exp(after.log_scale)
    assert tr_after == pytest.approx(tr_before, rel=1e-6, abs=1e-6)
