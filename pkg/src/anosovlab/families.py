"""Concrete representations: the genus-2 octagon group, Schottky groups,
functor-derived examples and the reducible SL_4 family ``rho_{s,t}``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matgap import Functor, Representation, functor
from .models import ModelSpace
from .words import EnumerationMode, Presentation, word_codes


class ConfigurationError(RuntimeError):
    """A constructed representation failed its self-check."""


# Regular octagon with interior angles pi/4: cosh of half the translation
# length of the pairing between opposite sides.
OCTAGON_COSH = 1.0 + math.sqrt(2.0)


def octagon_translation(k: int) -> np.ndarray:
    """Hyperbolic translation through ``i`` along the axis at angle ``k pi/4``.

    Its translation length ``l0`` satisfies ``cosh(l0/2) = 1 + sqrt 2``.
    """
    ch = OCTAGON_COSH
    sh = math.sqrt(ch * ch - 1.0)
    phi = k * math.pi / 4.0
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[ch + sh * c, sh * s], [sh * s, ch - sh * c]])


def _inv2(g):
    return np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])


def relator_residual(rep: Representation) -> float:
    p = rep.presentation
    worst = 0.0
    for r in p.relators:
        m = np.eye(rep.degree)
        for s in r:
            m = m @ rep.images[s]
        worst = max(worst, float(np.abs(m - np.eye(rep.degree)).max()))
    return worst


def hyperbolicity_margin(rho: Representation, max_len: int = 6) -> float:
    """``min |trace| - 2`` over nontrivial cyclic classes up to ``max_len``."""
    worst = math.inf
    for length in range(1, max_len + 1):
        codes = word_codes(rho.presentation, length, EnumerationMode.CYCLIC_CLASSES)
        m = rho.stack[codes[:, 0]]
        for j in range(1, length):
            m = m @ rho.stack[codes[:, j]]
        worst = min(worst, float(np.abs(m[:, 0, 0] + m[:, 1, 1]).min()) - 2.0)
    return worst


def fuchsian_octagon(check_len: int = 6) -> tuple[Representation, ModelSpace]:
    """Genus-2 Fuchsian representation from the regular octagon.

    The side pairings of opposite sides are the four translations ``T_k``;
    they satisfy ``T0 T1^-1 T2 T3^-1 T0^-1 T1 T2^-1 T3 = 1``. Setting
    ``x, y, z, w = T0, T1^-1, T2, T3^-1``, the elements

        a1 = x,  b1 = y z y,  a2 = y w^-1,  b2 = x y z

    satisfy ``[a1,b1][a2,b2] = 1`` and generate (``y = b2^-1 a1 b1``).
    """
    t0, t1, t2, t3 = (octagon_translation(k) for k in range(4))
    y = _inv2(t1)
    gens = {
        "a1": t0,
        "b1": y @ t2 @ y,
        "a2": y @ t3,
        "b2": t0 @ y @ t2,
    }
    rho1 = Representation.from_generators(Presentation.surface_genus2(), gens)
    res = relator_residual(rho1)
    if res >= 1e-8:
        raise ConfigurationError(f"octagon relator residual {res:.3g}")
    margin = hyperbolicity_margin(rho1, check_len)
    if margin <= 0:
        raise ConfigurationError("octagon group has a non-hyperbolic short word")
    return rho1, ModelSpace.fuchsian(rho1)


def schottky(lam: float = 3.0, check_len: int = 6) -> tuple[Representation, ModelSpace]:
    """Free group on ``a, b`` with ``a = diag(l, 1/l)`` and ``b`` its
    conjugate by the rotation taking the real axis to the unit circle."""
    if lam < 3.0:
        raise ValueError("Schottky parameter must be >= 3")
    ch, sh = 0.5 * (lam + 1.0 / lam), 0.5 * (lam - 1.0 / lam)
    gens = {"a": np.diag([lam, 1.0 / lam]), "b": np.array([[ch, sh], [sh, ch]])}
    rep = Representation.from_generators(Presentation.free(2), gens)
    if hyperbolicity_margin(rep, check_len) <= 0:
        raise ValueError(f"ping-pong check failed for lambda = {lam}")
    return rep, ModelSpace.tree(rep.presentation)


@dataclass
class FamilyParams:
    s: float
    t: float
    X: np.ndarray = field(default_factory=lambda: np.eye(2))

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.shape != (2, 2) or abs(np.linalg.det(self.X)) < 1e-12:
            raise ValueError("X must be an invertible 2x2 matrix")


def coupling_block(rho1: Representation, p: FamilyParams) -> np.ndarray:
    """Upper-right block of ``rho_{s,t}(b2)``, chosen so the relator is trivial.

    With ``A_i, B_i`` the images under ``rho1`` it is

        s (X B1^-1 - J_t X A1^-1 B1^-1) A2 B2 A2^-1 (A2^-1 - I)^-1.
    """
    im = rho1.images
    J = np.array([[1.0, p.t], [0.0, 1.0]])
    A1i, B1i = im["a1^-1"], im["b1^-1"]
    A2, B2, A2i = im["a2"], im["b2"], im["a2^-1"]
    shift = A2i - np.eye(2)
    if abs(np.linalg.det(shift)) < 1e-12:
        raise ConfigurationError("rho1(a2) has eigenvalue 1")
    left = p.s * (p.X @ B1i - J @ p.X @ A1i @ B1i)
    return left @ A2 @ B2 @ A2i @ np.linalg.inv(shift)


def family_st(rho1: Representation, p: FamilyParams) -> Representation:
    """The SL_4 family: block upper-triangular extension of ``rho1`` by the
    unipotent ``psi_t`` (``a1 -> J_t``, other generators trivial)."""
    im = rho1.images
    J = np.array([[1.0, p.t], [0.0, 1.0]])
    I2, Z = np.eye(2), np.zeros((2, 2))

    def block(top, corner, g):
        return np.block([[top, corner], [Z, im[g]]])

    gens = {
        "a1": block(J, Z, "a1"),
        "a2": block(I2, Z, "a2"),
        "b1": block(I2, p.s * p.X, "b1"),
        "b2": block(I2, coupling_block(rho1, p), "b2"),
    }
    return Representation.from_generators(rho1.presentation, gens)


def psi_t(presentation: Presentation, t: float) -> Representation:
    """The unipotent representation ``a1 -> J_t``, everything else trivial."""
    gens = {g: np.eye(2) for g in presentation.alphabet.generators}
    gens["a1"] = np.array([[1.0, t], [0.0, 1.0]])
    return Representation.from_generators(presentation, gens)


@dataclass
class DerivedExample:
    name: str
    rep: Representation
    alpha: float
    beta: float


def derived_examples(rho1: Representation) -> dict[str, DerivedExample]:
    """Sym^3 and trivial extensions of ``rho1`` with their exponents."""
    return {
        "Sym3": DerivedExample("Sym3", functor(rho1, Functor.SYM_POWER, 3), 1.0, 1.0),
        "DirectSumTrivial1": DerivedExample(
            "DirectSumTrivial1", functor(rho1, Functor.DIRECT_SUM_TRIVIAL, 1), 0.5, 0.5
        ),
        "DirectSumTrivial2": DerivedExample(
            "DirectSumTrivial2", functor(rho1, Functor.DIRECT_SUM_TRIVIAL, 2), 0.5, 0.5
        ),
    }


FAMILY_NAMES = ("fuchsian", "schottky", "sym3", "dsum1", "dsum2", "family-st", "psi")


def named_family(name: str, s: float = 1.0, t: float = 0.1, lam: float = 3.0, X=None) -> tuple[Representation, ModelSpace]:
    """Look up a representation and its model space by CLI name."""
    if name == "schottky":
        return schottky(lam)
    if name not in FAMILY_NAMES:
        raise KeyError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}")
    rho1, model = fuchsian_octagon()
    if name == "fuchsian":
        return rho1, model
    if name == "family-st":
        params = FamilyParams(s, t) if X is None else FamilyParams(s, t, X)
        return family_st(rho1, params), model
    if name == "psi":
        return psi_t(rho1.presentation, t), model
    key = {"sym3": "Sym3", "dsum1": "DirectSumTrivial1", "dsum2": "DirectSumTrivial2"}[name]
    return derived_examples(rho1)[key].rep, model
