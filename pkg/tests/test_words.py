import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anosovlab.words import (
    EnumerationMode,
    Presentation,
    Word,
    WordError,
    count_reduced,
    cyclic_reduce,
    dehn_shorten,
    enumerate_words,
    random_reduced_codes,
    reduce,
    word_codes,
)

SURF = Presentation.surface_genus2()
FREE2 = Presentation.free(2)
letters = st.lists(st.sampled_from(SURF.alphabet.symbols), max_size=24)


def test_reduce_examples():
    assert reduce("a1 a1^-1".split()) == Word()
    assert reduce("a1 b1 b1^-1 a1".split()) == Word(("a1", "a1"))
    assert str(reduce("a1 b1 a1^-1".split())) == "a1 b1 a1^-1"


def test_unknown_symbol_rejected():
    with pytest.raises(WordError):
        SURF.parse("a1 c7")


def test_word_must_be_reduced():
    with pytest.raises(WordError):
        Word(("a", "a^-1"))


def test_cyclic_reduce_examples():
    core, conj = cyclic_reduce(Word.parse("a1 b1 a1^-1"))
    assert (str(core), str(conj)) == ("b1", "a1")
    core, conj = cyclic_reduce(Word.parse("b1 a1"))
    assert str(core) == "a1 b1"
    assert conj * core * conj.inverse() == Word.parse("b1 a1")
    assert cyclic_reduce(Word()) == (Word(), Word())


def test_enumeration_counts_small():
    assert len(list(enumerate_words(FREE2, 1))) == 4
    assert len(list(enumerate_words(FREE2, 2))) == 16
    cyc = [str(w) for w in enumerate_words(Presentation.free(1), 3, EnumerationMode.CYCLIC_CLASSES)]
    assert sorted(cyc) == sorted(["a", "a^-1", "a a", "a^-1 a^-1", "a a a", "a^-1 a^-1 a^-1"])


@pytest.mark.parametrize("rank", [1, 2, 3])
@pytest.mark.parametrize("length", range(1, 7))
def test_enumeration_counts_formula(rank, length):
    p = Presentation.free(rank)
    codes = word_codes(p, length)
    assert len(codes) == count_reduced(rank, length) == (2 * rank) * (2 * rank - 1) ** (length - 1)
    assert len({tuple(r) for r in codes}) == len(codes)


def test_enumeration_is_length_then_lex_and_deterministic():
    a = list(enumerate_words(SURF, 3))
    b = list(enumerate_words(SURF, 3))
    assert a == b
    lens = [len(w) for w in a]
    assert lens == sorted(lens)
    codes = [tuple(SURF.encode(w)) for w in a if len(w) == 3]
    assert codes == sorted(codes)


def test_cyclic_classes_one_per_rotation_class():
    # brute-force oracle: group cyclically reduced words by rotation
    for length in range(1, 6):
        brute = set()
        for row in word_codes(FREE2, length):
            if length > 1 and row[-1] == row[0] ^ 1:
                continue
            brute.add(min(tuple(np.roll(row, -k)) for k in range(length)))
        got = {tuple(r) for r in word_codes(FREE2, length, EnumerationMode.CYCLIC_CLASSES)}
        assert got == brute


def test_enumerate_rejects_nonpositive():
    with pytest.raises(WordError):
        list(enumerate_words(FREE2, 0))


def test_surface_relator():
    (rel,) = SURF.relators
    assert str(rel) == "a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1"


def test_random_reduced_codes_are_reduced():
    rng = np.random.Generator(np.random.Philox(3))
    codes = random_reduced_codes(SURF, 12, 500, rng)
    assert np.all(codes[:, 1:] != (codes[:, :-1] ^ 1))
    assert set(np.unique(codes)) == set(range(8))


@given(letters)
def test_reduce_idempotent(xs):
    w = reduce(xs)
    assert reduce(w.letters) == w


@given(letters)
def test_cyclic_reduce_round_trip(xs):
    w = reduce(xs)
    core, conj = SURF.cyclic_reduce(w)
    assert conj * core * conj.inverse() == w
    if len(core) > 1:
        assert core.letters[-1] != SURF.alphabet.involution[core.letters[0]]


@given(letters, letters)
def test_inverse_and_product(xs, ys):
    u, v = reduce(xs), reduce(ys)
    assert (u * v).inverse() == v.inverse() * u.inverse()
    assert u * u.inverse() == Word()


@settings(max_examples=50)
@given(letters)
def test_parse_round_trip(xs):
    w = reduce(xs)
    assert SURF.parse(str(w)) == w
    assert SURF.decode(SURF.encode(w)) == w


@pytest.mark.parametrize(
    "text, expected",
    [
        ("a1 b1 a1^-1 b1^-1 a2 b2 a2^-1", "b2"),
        ("a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1", ""),
        ("b1 a1^-1 b1^-1 a2 b2", "a1^-1 b2 a2"),
        ("a2 b2 a2^-1 b2^-1 a1", "a1"),
        ("a1 a1 b2", "a1 a1 b2"),
        ("a1 b1 a1^-1 b1^-1", "a1 b1 a1^-1 b1^-1"),
    ],
)
def test_dehn_shorten_examples(text, expected):
    [(rows, out)] = dehn_shorten(SURF, SURF.encode(SURF.parse(text))[None, :])
    assert list(rows) == [0]
    assert str(SURF.decode(out[0])) == expected


def test_dehn_shorten_leaves_free_groups_alone():
    codes = word_codes(FREE2, 5, EnumerationMode.CYCLIC_CLASSES)
    [(rows, out)] = dehn_shorten(FREE2, codes)
    assert np.array_equal(rows, np.arange(len(codes))) and np.array_equal(out, codes)


def _has_long_relator_run(codes_row) -> bool:
    relator = SURF.encode(SURF.relators[0])
    rotations = [np.roll(c, -j) for c in (relator, SURF.encode(SURF.relators[0].inverse())) for j in range(8)]
    n = len(codes_row)
    for rot in rotations:
        for start in range(n):
            run = 0
            while run < min(n, 7) and codes_row[(start + run) % n] == rot[run]:
                run += 1
            if run > 4:
                return True
    return False


def test_dehn_shorten_invariants():
    codes = word_codes(SURF, 6, EnumerationMode.CYCLIC_CLASSES)
    seen = []
    for rows, out in dehn_shorten(SURF, codes):
        seen.extend(rows)
        assert out.shape[1] <= 6
        for row in out:
            w = SURF.decode(row)
            core, conj = SURF.cyclic_reduce(w)
            assert len(core) == len(w) and len(conj) <= len(w)
            assert not _has_long_relator_run(row)
    assert sorted(seen) == list(range(len(codes)))
