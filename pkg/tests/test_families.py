import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anosovlab.families import (
    FAMILY_NAMES,
    OCTAGON_COSH,
    FamilyParams,
    coupling_block,
    derived_examples,
    family_st,
    hyperbolicity_margin,
    named_family,
    octagon_translation,
    psi_t,
    relator_residual,
    schottky,
)
from anosovlab.matgap import evaluate, first_gaps, log_ell, log_sigma, singular_values
from anosovlab.words import EnumerationMode, Presentation, Word, enumerate_words

SURF = Presentation.surface_genus2()
L0 = 2 * math.acosh(1 + math.sqrt(2))


def relator_matrix(images):
    m = np.eye(len(images["a1"]))
    for s in SURF.relators[0]:
        m = m @ images[s]
    return m


def solved_coupling(rho1, p):
    """Oracle: the corner of rho(b2) solving the relator as a linear system."""
    base = dict(family_st(rho1, p).images)

    def corner_residual(z):
        imgs = dict(base)
        b2 = imgs["b2"].copy()
        b2[:2, 2:] = z.reshape(2, 2)
        imgs["b2"] = b2
        imgs["b2^-1"] = np.linalg.inv(b2)
        return relator_matrix(imgs)[:2, 2:].ravel()

    r0 = corner_residual(np.zeros(4))
    cols = [corner_residual(e) - r0 for e in np.eye(4)]
    return np.linalg.solve(np.array(cols).T, -r0).reshape(2, 2)


def test_octagon_relator_and_hyperbolicity(rho1):
    assert relator_residual(rho1) < 1e-8
    assert hyperbolicity_margin(rho1, 6) > 0


def test_octagon_generator_data(rho1):
    a1 = rho1.images["a1"]
    assert np.trace(a1) == pytest.approx(2 * (1 + math.sqrt(2)), rel=1e-14)
    assert singular_values(evaluate(rho1, Word.parse("a1")))[0] == pytest.approx(L0 / 2, rel=1e-12)
    for g in SURF.alphabet.generators:
        assert np.linalg.det(rho1.images[g]) == pytest.approx(1.0, abs=1e-12)


def test_octagon_side_pairings():
    ts = [octagon_translation(k) for k in range(4)]
    for t in ts:
        assert np.trace(t) == pytest.approx(2 * OCTAGON_COSH)
        assert np.allclose(t, t.T)
    # the side-pairing relation of the octagon
    inv = [np.linalg.inv(t) for t in ts]
    m = ts[0] @ inv[1] @ ts[2] @ inv[3] @ inv[0] @ ts[1] @ inv[2] @ ts[3]
    assert np.abs(m - np.eye(2)).max() < 1e-10


def test_octagon_generators_generate(rho1):
    # the pairing T1 is recovered from the commutator generators
    y = evaluate(rho1, Word.parse("b2^-1 a1 b1")).value()
    assert np.allclose(y, np.linalg.inv(octagon_translation(1)), atol=1e-10)


def test_schottky_examples(free2):
    rep, _ = free2
    assert np.allclose(rep.images["b"], [[5 / 3, 4 / 3], [4 / 3, 5 / 3]])
    assert math.exp(log_ell(rep, Word.parse("a"))[0]) == pytest.approx(3.0)
    assert abs(np.trace(rep.images["a"] @ rep.images["b"])) > 2
    with pytest.raises(ValueError):
        schottky(2.0)


def test_all_short_schottky_words_hyperbolic(free2):
    assert hyperbolicity_margin(free2[0], 6) > 0


@pytest.mark.parametrize("s", [-2.0, -1.0, 1.0, 2.0])
@pytest.mark.parametrize("t", [-0.2, -0.1, 0.1, 0.2])
def test_family_relator(rho1, s, t):
    assert relator_residual(family_st(rho1, FamilyParams(s, t))) < 1e-9


@pytest.mark.parametrize("X", [np.eye(2), [[2.0, 1.0], [0.5, 3.0]], [[0.0, 1.0], [-1.0, 0.3]]])
def test_coupling_block_matches_linear_solve(rho1, X):
    p = FamilyParams(1.5, -0.15, X)
    assert np.allclose(coupling_block(rho1, p), solved_coupling(rho1, p), atol=1e-9)


def test_family_lower_block_is_rho1(rho1, rho_st):
    for g in SURF.alphabet.symbols:
        assert np.array_equal(rho_st.images[g][2:, 2:], rho1.images[g])
        assert not np.any(rho_st.images[g][2:, :2])


def test_family_eigen_moduli(rho1, rho_st):
    for w in enumerate_words(SURF, 4, EnumerationMode.CYCLIC_CLASSES):
        ell = log_ell(rho1, w)[0]
        assert log_ell(rho_st, w) == pytest.approx([ell, 0.0, 0.0, -ell], abs=1e-6 * max(1.0, ell))


def test_family_sigma2_grows_linearly(rho1):
    for t in (0.1, -0.2):
        rep = family_st(rho1, FamilyParams(1.0, t))
        for n in (5, 20, 60):
            s2 = math.exp(log_sigma(rep, Word.parse("a1") ** n)[1])
            assert s2 >= abs(t) * n


def test_family_params_validation():
    with pytest.raises(ValueError):
        FamilyParams(1.0, 0.1, [[1.0, 2.0], [2.0, 4.0]])


def test_psi_alone_is_unipotent():
    rep = psi_t(SURF, 0.3)
    assert first_gaps(rep, Word.parse("a1 b1 a1"))[1] == 0.0


def test_derived_examples(rho1):
    ex = derived_examples(rho1)
    assert ex["Sym3"].rep.degree == 4
    assert ex["DirectSumTrivial1"].rep.degree == 3
    assert ex["DirectSumTrivial2"].rep.degree == 4
    assert ex["Sym3"].alpha == 1.0 and ex["DirectSumTrivial1"].alpha == 0.5


def test_named_family():
    for name in FAMILY_NAMES:
        rep, model = named_family(name)
        assert rep.degree >= 2
    with pytest.raises(KeyError):
        named_family("octagon")


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3).filter(lambda s: abs(s) > 1e-3), st.floats(-0.5, 0.5))
def test_family_relator_property(rho1, s, t):
    assert relator_residual(family_st(rho1, FamilyParams(s, t))) < 1e-9
