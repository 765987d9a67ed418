"""Model spaces: the hyperbolic plane of a Fuchsian representation, and the
Cayley tree of a free group.

The Fuchsian basepoint is ``i`` in the upper half-plane (the centre of the
disc). With that choice ``|g|_X = arccosh(||g||_F^2 / 2) = 2 log s_1(g)``,
``|g|_{X,inf} = 2 arccosh(|tr g| / 2)``, and the visual metric with base ``e``
is exactly half the chord length on the unit circle.

A boundary point of H^2 is stored as its disc angle. The projective line
``P(R^2)`` double covers the circle: the line through ``(cos p, sin p)`` is
the circle point of angle ``-2p``. This is the map that turns the attracting
eigenline of a hyperbolic matrix into its attracting fixed point.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .matgap import Representation, ScaledMatrix, _top_log_eig, evaluate, evaluate_codes, evaluate_cores
from .words import Presentation, Word, conjugator_lengths, cyclic_reduce

TWO_PI = 2.0 * math.pi
HYPERBOLIC_SLACK = 1e-9


class NonHyperbolicElement(ArithmeticError):
    pass


class ModelMismatch(ValueError):
    pass


class DegenerateConfiguration(ValueError):
    pass


@dataclass(frozen=True)
class CirclePoint:
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % TWO_PI)

    @classmethod
    def from_vector(cls, v) -> "CirclePoint":
        return cls(-2.0 * math.atan2(float(v[1]), float(v[0])))

    @property
    def vector(self) -> np.ndarray:
        half = -0.5 * self.angle
        return np.array([math.cos(half), math.sin(half)])

    def to_json(self) -> dict:
        return {"angle": self.angle}


@dataclass(frozen=True)
class TreeEnd:
    prefix: Word

    def to_json(self) -> dict:
        return {"prefix": str(self.prefix)}


BoundaryPoint = CirclePoint | TreeEnd


def boundary_from_json(obj: dict) -> BoundaryPoint:
    if "angle" in obj:
        return CirclePoint(obj["angle"])
    return TreeEnd(Word.parse(obj["prefix"]))


class ModelKind(enum.Enum):
    FUCHSIAN = "fuchsian"
    TREE = "tree"


def _arccosh_of_log(log_y: np.ndarray) -> np.ndarray:
    """``arccosh(exp(log_y))`` without overflow; values below 1 clamp to 0."""
    log_y = np.asarray(log_y, dtype=float)
    small = log_y < 30.0
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.arccosh(np.maximum(np.exp(np.where(small, log_y, 0.0)), 1.0))
        big = log_y + np.log1p(np.sqrt(-np.expm1(-2.0 * log_y)))
    return np.where(small, direct, big)


@dataclass(eq=False)
class ModelSpace:
    kind: ModelKind
    presentation: Presentation
    rho1: Representation | None = None
    visual_base: float = math.e
    visual_r: float = 1.0
    hyp_delta: float = 1.0
    end_depth: int = 48

    def __post_init__(self):
        if self.visual_base <= 1.0:
            raise ValueError("visual base must exceed 1")
        if self.visual_r < 1.0:
            raise ValueError("visual_r must be >= 1")
        if self.hyp_delta < 0:
            raise ValueError("hyp_delta must be >= 0")
        if self.kind is ModelKind.FUCHSIAN:
            if self.rho1 is None or self.rho1.degree != 2:
                raise ValueError("Fuchsian model needs a degree-2 representation")
            dets = np.linalg.det(self.rho1.stack)
            if np.abs(dets - 1.0).max() > 1e-10:
                raise ValueError("Fuchsian generators must have determinant 1")

    @classmethod
    def fuchsian(cls, rho1: Representation, hyp_delta: float = 1.0) -> "ModelSpace":
        return cls(ModelKind.FUCHSIAN, rho1.presentation, rho1, hyp_delta=hyp_delta)

    @classmethod
    def tree(cls, presentation: Presentation, visual_base: float = math.e, end_depth: int = 48) -> "ModelSpace":
        return cls(ModelKind.TREE, presentation, None, visual_base=visual_base, end_depth=end_depth)

    @property
    def is_fuchsian(self) -> bool:
        return self.kind is ModelKind.FUCHSIAN

    # batched lengths over equal-length code rows

    def lengths(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes)
        if not self.is_fuchsian:
            return np.full(len(codes), float(codes.shape[1]))
        mats, logs = evaluate_codes(self.rho1, codes)
        frob = np.einsum("nij,nij->n", mats, mats)
        return _arccosh_of_log(np.log(frob / 2.0) + 2.0 * logs)

    def stable_lengths(self, codes: np.ndarray) -> np.ndarray:
        """Stable lengths; NaN marks non-hyperbolic Fuchsian images."""
        codes = np.asarray(codes)
        n, length = codes.shape
        if not self.is_fuchsian:
            if length == 0:
                return np.zeros(n)
            return (length - 2 * conjugator_lengths(codes)).astype(float)
        if length == 0:
            return np.zeros(n)
        mats, logs = evaluate_cores(self.rho1, codes)
        tr = np.abs(mats[:, 0, 0] + mats[:, 1, 1])
        with np.errstate(divide="ignore"):
            log_half_tr = np.log(tr / 2.0) + logs
        hyperbolic = log_half_tr > math.log1p(HYPERBOLIC_SLACK / 2.0)
        # 2 log l_1 through the same eigenvalue routine as the gap scans
        return np.where(hyperbolic, 2.0 * (_top_log_eig(mats) + logs), np.nan)

    def length(self, w: Word) -> float:
        return float(self.lengths(self.presentation.encode(w)[None, :])[0])

    def stable_length(self, w: Word) -> float:
        val = float(self.stable_lengths(self.presentation.encode(w)[None, :])[0])
        if math.isnan(val):
            raise NonHyperbolicElement(f"rho1({w}) is not hyperbolic")
        return val


def length(m: ModelSpace, w: Word) -> float:
    """``|w|_X``: displacement of the basepoint, or word length in the tree."""
    return m.length(w)


def stable_length(m: ModelSpace, w: Word) -> float:
    return m.stable_length(w)


def _top_eigvec_2x2(mat: np.ndarray) -> np.ndarray:
    (a, b), (c, d) = mat
    t = a + d
    disc = t * t - 4.0 * (a * d - b * c)
    mu = 0.5 * (t + math.copysign(math.sqrt(max(disc, 0.0)), t))
    v1 = np.array([b, mu - a])
    v2 = np.array([mu - d, c])
    v = v1 if np.hypot(*v1) >= np.hypot(*v2) else v2
    return v / np.hypot(*v)


def attracting_angles(m: ModelSpace, codes: np.ndarray) -> np.ndarray:
    """Batched attracting fixed points as disc angles; NaN if not hyperbolic."""
    if not m.is_fuchsian:
        raise ModelMismatch("angles exist only in the Fuchsian model")
    mats, logs = evaluate_codes(m.rho1, np.asarray(codes))
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    t = a + d
    with np.errstate(divide="ignore", invalid="ignore"):
        tr = np.abs(t) * np.exp(logs)
        disc = t * t - 4.0 * (a * d - b * c)
        mu = 0.5 * (t + np.copysign(np.sqrt(np.maximum(disc, 0.0)), t))
    v1 = np.stack([b, mu - a], axis=1)
    v2 = np.stack([mu - d, c], axis=1)
    use1 = np.hypot(v1[:, 0], v1[:, 1]) >= np.hypot(v2[:, 0], v2[:, 1])
    v = np.where(use1[:, None], v1, v2)
    angles = np.mod(-2.0 * np.arctan2(v[:, 1], v[:, 0]), TWO_PI)
    hyperbolic = (tr > 2.0 + HYPERBOLIC_SLACK) & (codes.shape[1] > 0)
    return np.where(hyperbolic, angles, np.nan)


def _check_hyperbolic(g: ScaledMatrix, w: Word):
    tr = abs(g.mat[0, 0] + g.mat[1, 1]) * math.exp(g.log_scale)
    if len(w) == 0 or tr <= 2.0 + HYPERBOLIC_SLACK:
        raise NonHyperbolicElement(f"rho1({w}) is not hyperbolic (|trace| = {tr})")


def _tree_end(m: ModelSpace, w: Word) -> TreeEnd:
    core, conj = cyclic_reduce(w, m.presentation.alphabet)
    if len(core) == 0:
        raise NonHyperbolicElement("the identity has no boundary fixed point")
    reps = (m.end_depth + 2 * len(w)) // len(core) + 2
    end = w**reps
    return TreeEnd(Word(end.letters[: m.end_depth]))


def attracting_boundary_point(m: ModelSpace, w: Word) -> BoundaryPoint:
    """The attracting fixed point of ``w`` on the boundary of the model."""
    if not m.is_fuchsian:
        return _tree_end(m, w)
    g = evaluate(m.rho1, w)
    _check_hyperbolic(g, w)
    return CirclePoint.from_vector(_top_eigvec_2x2(g.mat))


def repelling_boundary_point(m: ModelSpace, w: Word) -> BoundaryPoint:
    return attracting_boundary_point(m, w.inverse())


def act(m: ModelSpace, w: Word, x: BoundaryPoint) -> BoundaryPoint:
    """Image of a boundary point under ``w``."""
    if m.is_fuchsian:
        _require(x, CirclePoint)
        g = evaluate(m.rho1, w)
        return CirclePoint.from_vector(g.mat @ x.vector)
    _require(x, TreeEnd)
    moved = w * x.prefix
    return TreeEnd(Word(moved.letters[: m.end_depth]))


def _require(x, cls):
    if not isinstance(x, cls):
        raise ModelMismatch(f"expected {cls.__name__}, got {type(x).__name__}")


def gromov_product(m: ModelSpace, x: BoundaryPoint, y: BoundaryPoint) -> float:
    """Gromov product of two boundary points at the basepoint."""
    if m.is_fuchsian:
        _require(x, CirclePoint)
        _require(y, CirclePoint)
        half_chord = abs(math.sin(0.5 * (x.angle - y.angle)))
        if half_chord == 0.0:
            return math.inf
        return -math.log(half_chord)
    _require(x, TreeEnd)
    _require(y, TreeEnd)
    a, b = x.prefix.letters, y.prefix.letters
    n = 0
    for s, t in zip(a, b):
        if s != t:
            return float(n)
        n += 1
    return math.inf


def visual_metric(m: ModelSpace, x: BoundaryPoint, y: BoundaryPoint) -> float:
    if m.is_fuchsian and m.visual_base == math.e:
        _require(x, CirclePoint)
        _require(y, CirclePoint)
        return abs(math.sin(0.5 * (x.angle - y.angle)))
    gp = gromov_product(m, x, y)
    return 0.0 if math.isinf(gp) else math.exp(-gp * math.log(m.visual_base))


def _inverse_basepoint(m: ModelSpace, w: Word) -> complex:
    """``rho1(w)^-1 . i`` in the upper half-plane, using det = 1 exactly."""
    g = evaluate(m.rho1, w)
    (a, b), (c, d) = g.mat
    norm = a * a + c * c
    re = -(a * b + c * d) / norm
    im = math.exp(-2.0 * g.log_scale) / norm
    return complex(re, im)


def _hyperbolic_distance_to_i(z: complex) -> float:
    # cosh d(z, i) = 1 + |z - i|^2 / (2 Im z)
    return float(np.arccosh(1.0 + abs(z - 1j) ** 2 / (2.0 * z.imag)))


def _product_with_interior(x: CirclePoint, z: complex) -> float:
    """``(x . z)`` at basepoint ``i`` via the Busemann function of ``x``."""
    u1, u2 = x.vector
    poisson = z.imag / abs(u2 * z - u1) ** 2
    return 0.5 * (_hyperbolic_distance_to_i(z) + math.log(poisson))


def _require_fuchsian(m: ModelSpace):
    if not m.is_fuchsian:
        raise ModelMismatch("this residual is defined for the Fuchsian model")


def _image_product(m: ModelSpace, w: Word, x: CirclePoint, y: CirclePoint) -> float:
    """``(gx . gy)`` at the basepoint without forming the image angles.

    The half-chord between the images is ``|det[gu, gv]| / (|gu| |gv|)`` for
    unit vectors ``u, v`` of ``x, y``; since ``det g = 1`` the numerator is
    ``|det[u, v]|``, so no cancellation occurs when ``g`` crushes ``x`` and
    ``y`` together.
    """
    g = evaluate(m.rho1, w)
    u, v = x.vector, y.vector
    det = abs(u[0] * v[1] - u[1] * v[0])
    if det == 0.0:
        return math.inf
    gu, gv = g.mat @ u, g.mat @ v
    return -math.log(det) + math.log(np.hypot(*gu)) + math.log(np.hypot(*gv)) + 2.0 * g.log_scale


def lemma21_residual(m: ModelSpace, w: Word, x: BoundaryPoint, y: BoundaryPoint) -> float:
    """``|(gx.gy) - |g| - (x.y) + (x.g^-1 o) + (y.g^-1 o)|`` at the basepoint."""
    _require_fuchsian(m)
    _require(x, CirclePoint)
    _require(y, CirclePoint)
    if visual_metric(m, x, y) < 1e-12:
        raise DegenerateConfiguration("x and y coincide")
    z = _inverse_basepoint(m, w)
    total = (
        _image_product(m, w, x, y)
        - m.length(w)
        - gromov_product(m, x, y)
        + _product_with_interior(x, z)
        + _product_with_interior(y, z)
    )
    if not math.isfinite(total):
        raise DegenerateConfiguration("non-finite Gromov product")
    return abs(total)


def lemma22_residual(m: ModelSpace, w: Word) -> float:
    """``|2(g+ . g^-1 o) - (|g| - |g|_inf)|`` for hyperbolic ``g``."""
    _require_fuchsian(m)
    plus = attracting_boundary_point(m, w)
    z = _inverse_basepoint(m, w)
    return abs(2.0 * _product_with_interior(plus, z) - (m.length(w) - m.stable_length(w)))
