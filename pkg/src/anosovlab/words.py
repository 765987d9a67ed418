"""Words in free groups and the genus-2 surface group.

Symbols are plain generator names; the inverse of ``g`` is written ``g^-1``.
Internally every symbol has an integer code: ``2*j`` for generator ``j`` and
``2*j + 1`` for its inverse, so ``code ^ 1`` inverts a letter and integer
order is the lexicographic order used throughout.
"""
from __future__ import annotations

import enum
import functools
import string
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

INVERSE_SUFFIX = "^-1"


def invert_symbol(symbol: str) -> str:
    if symbol.endswith(INVERSE_SUFFIX):
        return symbol[: -len(INVERSE_SUFFIX)]
    return symbol + INVERSE_SUFFIX


class WordError(ValueError):
    """Malformed word input (unknown symbol, unreduced letters, ...)."""


@dataclass(frozen=True)
class GeneratorAlphabet:
    generators: tuple[str, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise WordError("alphabet needs at least one generator")
        if len(set(gens)) != len(gens):
            raise WordError(f"duplicate generators in {gens}")
        for g in gens:
            if not g or "^" in g or any(ch.isspace() for ch in g):
                raise WordError(f"bad generator name {g!r}")

    @functools.cached_property
    def symbols(self) -> tuple[str, ...]:
        out = []
        for g in self.generators:
            out += [g, g + INVERSE_SUFFIX]
        return tuple(out)

    @functools.cached_property
    def involution(self) -> dict[str, str]:
        return {s: invert_symbol(s) for s in self.symbols}

    @functools.cached_property
    def _codes(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def code(self, symbol: str) -> int:
        try:
            return self._codes[symbol]
        except KeyError:
            raise WordError(f"unknown symbol {symbol!r}") from None

    def __len__(self):
        return len(self.symbols)


@dataclass(frozen=True, order=True)
class Word:
    """A freely reduced word; the empty word is the identity."""

    letters: tuple[str, ...] = ()

    def __post_init__(self):
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        for a, b in zip(letters, letters[1:]):
            if b == invert_symbol(a):
                raise WordError(f"word is not freely reduced: {' '.join(letters)}")

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parse whitespace-separated symbols, reducing freely."""
        return reduce(text.split())

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __str__(self):
        return " ".join(self.letters)

    def __repr__(self):
        return f"Word({str(self)!r})"

    def __mul__(self, other: "Word") -> "Word":
        return reduce(self.letters + other.letters)

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        return reduce(self.letters * n)

    def inverse(self) -> "Word":
        return Word(tuple(invert_symbol(s) for s in reversed(self.letters)))


IDENTITY = Word()


def reduce(letters: Iterable[str], alphabet: GeneratorAlphabet | None = None) -> Word:
    """Freely reduce a raw symbol sequence."""
    stack: list[str] = []
    for s in letters:
        if alphabet is not None:
            alphabet.code(s)
        if stack and stack[-1] == invert_symbol(s):
            stack.pop()
        else:
            stack.append(s)
    return Word(tuple(stack))


def _min_rotation(seq: Sequence, key) -> int:
    n = len(seq)
    best = 0
    best_key = None
    for shift in range(n):
        k = [key(x) for x in seq[shift:] + seq[:shift]]
        if best_key is None or k < best_key:
            best, best_key = shift, k
    return best


def cyclic_reduce(w: Word, alphabet: GeneratorAlphabet | None = None) -> tuple[Word, Word]:
    """Return ``(core, conjugator)`` with ``w = conjugator * core * conjugator^-1``.

    The core is the lexicographically least rotation of the cyclically reduced
    part of ``w``; letter order follows ``alphabet`` when given, else the
    string order of symbols.
    """
    letters = list(w.letters)
    i, j = 0, len(letters) - 1
    while i < j and letters[j] == invert_symbol(letters[i]):
        i += 1
        j -= 1
    outer = letters[:i]
    inner = letters[i : j + 1]
    if not inner:
        return IDENTITY, IDENTITY
    key = alphabet.code if alphabet is not None else (lambda s: s)
    shift = _min_rotation(inner, key)
    core = Word(tuple(inner[shift:] + inner[:shift]))
    conjugator = Word(tuple(outer)) * Word(tuple(inner[:shift]))
    return core, conjugator


class PresentationKind(enum.Enum):
    FREE = "free"
    SURFACE_GENUS2 = "surface2"


@dataclass(frozen=True)
class Presentation:
    alphabet: GeneratorAlphabet
    relators: tuple[Word, ...]
    kind: PresentationKind

    @classmethod
    def free(cls, rank: int, names: Sequence[str] | None = None) -> "Presentation":
        if rank < 1:
            raise WordError("rank must be positive")
        if names is None:
            if rank > 26:
                raise WordError("give explicit names for rank > 26")
            names = string.ascii_lowercase[:rank]
        if len(names) != rank:
            raise WordError("need one name per generator")
        return cls(GeneratorAlphabet(tuple(names)), (), PresentationKind.FREE)

    @classmethod
    def surface_genus2(cls) -> "Presentation":
        alphabet = GeneratorAlphabet(("a1", "b1", "a2", "b2"))
        relator = Word.parse("a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1")
        return cls(alphabet, (relator,), PresentationKind.SURFACE_GENUS2)

    @property
    def rank(self) -> int:
        return len(self.alphabet.generators)

    def encode(self, w: Word) -> np.ndarray:
        return np.array([self.alphabet.code(s) for s in w], dtype=np.int8)

    def decode(self, codes: Iterable[int]) -> Word:
        symbols = self.alphabet.symbols
        return Word(tuple(symbols[int(c)] for c in codes))

    def parse(self, text: str) -> Word:
        return reduce(text.split(), self.alphabet)

    def cyclic_reduce(self, w: Word) -> tuple[Word, Word]:
        return cyclic_reduce(w, self.alphabet)


class EnumerationMode(enum.Enum):
    ALL_REDUCED = "all"
    CYCLIC_CLASSES = "cyclic"


def _mode(mode) -> EnumerationMode:
    return mode if isinstance(mode, EnumerationMode) else EnumerationMode(mode)


@functools.lru_cache(maxsize=32)
def _reduced_codes(n_symbols: int, length: int) -> np.ndarray:
    """All reduced words of one length as a lex-sorted ``(N, length)`` array."""
    if length == 0:
        return np.zeros((1, 0), dtype=np.int8)
    if length == 1:
        return np.arange(n_symbols, dtype=np.int8)[:, None]
    prev = _reduced_codes(n_symbols, length - 1)
    letters = np.arange(n_symbols, dtype=np.int8)
    rep = np.repeat(prev, n_symbols, axis=0)
    nxt = np.tile(letters, len(prev))
    keep = nxt != (rep[:, -1] ^ 1)
    out = np.concatenate([rep[keep], nxt[keep, None]], axis=1)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=32)
def _cyclic_class_codes(n_symbols: int, length: int) -> np.ndarray:
    words = _reduced_codes(n_symbols, length)
    if length > 1:
        words = words[words[:, -1] != (words[:, 0] ^ 1)]
    if length > 21:
        raise WordError("cyclic enumeration is limited to length 21")
    base = np.int64(n_symbols)
    weights = base ** np.arange(length - 1, -1, -1, dtype=np.int64)
    own = words.astype(np.int64) @ weights
    best = own.copy()
    for shift in range(1, length):
        rotated = np.roll(words, -shift, axis=1).astype(np.int64) @ weights
        np.minimum(best, rotated, out=best)
    out = np.ascontiguousarray(words[own == best])
    out.setflags(write=False)
    return out


def word_codes(p: Presentation, length: int, mode=EnumerationMode.ALL_REDUCED) -> np.ndarray:
    """Words of exactly ``length`` letters as an int8 code array, lex order."""
    if _mode(mode) is EnumerationMode.ALL_REDUCED:
        return _reduced_codes(len(p.alphabet), length)
    return _cyclic_class_codes(len(p.alphabet), length)


def conjugator_lengths(codes: np.ndarray) -> np.ndarray:
    """Per row, how many letters cancel between the two ends of the word.

    Row ``w = c u c^-1`` with ``u`` cyclically reduced gives ``len(c)``.
    """
    codes = np.asarray(codes)
    n, length = codes.shape
    strip = np.zeros(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    for i in range(length // 2):
        alive &= codes[:, i] == (codes[:, length - 1 - i] ^ 1)
        strip += alive
    return strip


def _relator_rotations(p: Presentation) -> np.ndarray:
    """Every cyclic rotation of every relator and of its inverse, as codes."""
    rows = []
    for r in p.relators:
        for c in (p.encode(r), p.encode(r.inverse())):
            rows.extend(np.roll(c, -j) for j in range(len(c)))
    return np.array(rows, dtype=np.int8)


def _cyclic_free_reduce(letters: list[int]) -> list[int]:
    out: list[int] = []
    for c in letters:
        if out and out[-1] == c ^ 1:
            out.pop()
        else:
            out.append(c)
    i, j = 0, len(out) - 1
    while i < j and out[j] == out[i] ^ 1:
        i += 1
        j -= 1
    return out[i : j + 1]


def _longest_relator_runs(codes: np.ndarray, rotations: np.ndarray, cap: int):
    """Per row: the longest cyclic run matching a relator rotation prefix.

    Returns ``(length, start, rotation index)`` arrays.
    """
    n, length = codes.shape
    best = np.zeros(n, dtype=np.int64)
    where = np.zeros(n, dtype=np.int64)
    which = np.zeros(n, dtype=np.int64)
    span = min(cap, length)
    for ri, rot in enumerate(rotations):
        for start in range(length):
            cols = (start + np.arange(span)) % length
            run = np.cumprod(codes[:, cols] == rot[:span], axis=1).sum(axis=1)
            better = run > best
            best[better], where[better], which[better] = run[better], start, ri
    return best, where, which


def dehn_shorten(p: Presentation, codes: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Shorten cyclically reduced rows by Dehn's algorithm.

    Any cyclic subword made of more than half of a relator rotation is
    replaced by the inverse of the remaining part, then the word is freely
    and cyclically reduced; this repeats until no such subword is left. The
    result is conjugate to the input in the group (it only differs by
    relators), and much shorter words cancel far less in matrix products.
    Returns ``(row indices, codes)`` groups of equal length.
    """
    codes = np.asarray(codes)
    n, length = codes.shape
    if not p.relators or length == 0:
        return [(np.arange(n), codes)]
    rotations = _relator_rotations(p)
    m = rotations.shape[1]
    pending = [(np.arange(n), codes)]
    done: dict[int, list] = {}
    while pending:
        idx, sub = pending.pop()
        size = sub.shape[1]
        run, start, which = _longest_relator_runs(sub, rotations, m - 1) if size > m // 2 else (np.zeros(len(sub), dtype=np.int64),) * 3
        hit = run > m // 2
        done.setdefault(size, []).append((idx[~hit], sub[~hit]))
        if not np.any(hit):
            continue
        changed: dict[int, tuple[list, list]] = {}
        for row, l, s0, ri in zip(np.nonzero(hit)[0], run[hit], start[hit], which[hit]):
            w = np.roll(sub[row], -int(s0)).tolist()
            rest = [int(c) ^ 1 for c in rotations[ri][l:][::-1]]
            new = _cyclic_free_reduce(rest + w[l:])
            bucket = changed.setdefault(len(new), ([], []))
            bucket[0].append(idx[row])
            bucket[1].append(new)
        for size_new, (rows, words) in changed.items():
            pending.append((np.array(rows), np.array(words, dtype=codes.dtype).reshape(len(words), size_new)))
    out = []
    for size, parts in sorted(done.items()):
        rows = np.concatenate([r for r, _ in parts])
        if len(rows):
            out.append((rows, np.concatenate([c for _, c in parts]).reshape(len(rows), size)))
    return out


def count_reduced(rank: int, length: int) -> int:
    if length == 0:
        return 1
    return 2 * rank * (2 * rank - 1) ** (length - 1)


def enumerate_words(p: Presentation, max_len: int, mode=EnumerationMode.ALL_REDUCED) -> Iterator[Word]:
    """Yield words of length 1..max_len, length-then-lex, deterministically.

    Surface-group words are not normalised modulo the relator, so distinct
    words may name the same group element.
    """
    if max_len < 1:
        raise WordError("max_len must be >= 1")
    for length in range(1, max_len + 1):
        for row in word_codes(p, length, mode):
            yield p.decode(row)


def random_reduced_codes(p: Presentation, length: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random reduced words of a fixed length."""
    n = len(p.alphabet)
    out = np.empty((count, length), dtype=np.int8)
    if length == 0:
        return out
    out[:, 0] = rng.integers(0, n, size=count)
    for j in range(1, length):
        step = rng.integers(0, n - 1, size=count)
        forbidden = out[:, j - 1] ^ 1
        # skip the forbidden inverse letter by shifting values at or above it
        out[:, j] = step + (step >= forbidden)
    return out
