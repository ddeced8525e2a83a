"""Spheres, real/complex projective spaces and lens spaces as orbit spaces.

Every point of a quotient is carried by a unit vector of the covering
sphere.  Complex coordinates are stored as interleaved real pairs
``(re z0, im z0, re z1, im z1, ...)`` so one real vector type serves both
the real and the complex contexts.

Canonical orbit representatives:

* ``rp``   - the first coordinate of modulus > EPS0 is made positive;
* ``lens`` - multiply by the m-th root of unity that puts the argument of
  the first complex coordinate of modulus > EPS0 into ``[0, 2*pi/m)``;
* ``cp``   - the first complex coordinate of modulus > EPS0 is made real
  positive;
* ``sphere`` - identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import DiagonalPair, DimensionMismatch, NearZeroVector

EPS0 = 1e-12  # singularity threshold for normalization
EPS_SEP = 1e-9  # diagonal exclusion threshold
TOL = 1e-9  # default verification residual
UNIT_TOL = 1e-12

# slack used when snapping a lens argument into its fundamental domain, so
# that canonicalizing a canonical point never jumps across the cut at 0
_ARG_SLACK = 1e-9


# ---------------------------------------------------------------- vectors


def _as_array(v: Any) -> np.ndarray:
    if isinstance(v, UnitVector):
        return v.coords
    return np.asarray(v, dtype=float)


@dataclass(frozen=True, eq=False)
class UnitVector:
    """A point of the unit sphere S^r in R^(r+1)."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.size < 1:
            raise DimensionMismatch("a unit vector needs at least one coordinate")
        if abs(np.linalg.norm(c) - 1.0) > UNIT_TOL:
            raise ValueError(f"not a unit vector (norm {np.linalg.norm(c)!r})")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.size - 1

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    def __len__(self):
        return self.coords.size

    def __neg__(self) -> "UnitVector":
        return UnitVector(-self.coords)

    def __eq__(self, other):
        if not isinstance(other, UnitVector):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(np.all(self.coords == other.coords))

    def __hash__(self):
        return hash(self.coords.tobytes())

    def tolist(self) -> list[float]:
        return self.coords.tolist()

    def __repr__(self):
        return f"UnitVector({np.array2string(self.coords, precision=6)})"


def unit_norms(v: np.ndarray) -> np.ndarray:
    return np.linalg.norm(v, axis=-1)


def nu(v: np.ndarray, eps: float = EPS0) -> np.ndarray:
    """Batched normalization over the last axis; raises on near-zero rows."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n <= eps):
        raise NearZeroVector(f"vector norm {float(np.min(n)):.3e} <= {eps:g}")
    return v / n


def normalize(v) -> UnitVector:
    """Scale a nonzero vector to unit length.

    >>> normalize([3, 4]).tolist()
    [0.6, 0.8]
    """
    a = _as_array(v).reshape(-1)
    if a.size < 1:
        raise DimensionMismatch("empty vector")
    n = np.linalg.norm(a)
    if not n > EPS0:
        raise NearZeroVector(f"cannot normalize vector of norm {n:.3e}")
    out = a / n
    # guard against a last-ulp drift beyond the unit tolerance
    return UnitVector(out / np.linalg.norm(out))


def angle(x, y) -> np.ndarray | float:
    """Geodesic distance on the sphere, accurate near 0 and near pi."""
    x = _as_array(x)
    y = _as_array(y)
    a = 2.0 * np.arctan2(np.linalg.norm(x - y, axis=-1), np.linalg.norm(x + y, axis=-1))
    return float(a) if np.ndim(a) == 0 else a


# --------------------------------------------------------- complex helpers


def as_complex(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] % 2:
        raise DimensionMismatch("complex view needs an even number of real coordinates")
    return x[..., 0::2] + 1j * x[..., 1::2]


def from_complex(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def root_of_unity(m: int, j: int = 1) -> complex:
    return complex(math.cos(2 * math.pi * j / m), math.sin(2 * math.pi * j / m))


def rotate(x: np.ndarray, m: int, j: int = 1) -> np.ndarray:
    """Multiply every complex coordinate by omega^j, omega = exp(2 pi i/m)."""
    return from_complex(as_complex(x) * root_of_unity(m, j))


def scale_complex(x: np.ndarray, w: complex) -> np.ndarray:
    return from_complex(as_complex(x) * w)


def herm_inner(x: np.ndarray, y: np.ndarray) -> np.ndarray | complex:
    """<x, y> = sum x_k conj(y_k) on the complex view."""
    return np.sum(as_complex(x) * np.conj(as_complex(y)), axis=-1)


# ------------------------------------------------------------------ spaces

_KINDS = ("sphere", "rp", "lens", "cp")


@dataclass(frozen=True)
class SpaceDescriptor:
    """One of S^r, P^r, L^(2n+1)(m) or CP^n.

    For ``sphere`` and ``rp`` the integer ``n`` holds r.
    """

    kind: str
    n: int
    m: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.n < 0:
            raise ValueError("dimension parameter must be >= 0")
        if self.kind == "lens" and self.m < 2:
            raise ValueError("lens spaces need torsion m >= 2")

    @classmethod
    def sphere(cls, r: int) -> "SpaceDescriptor":
        return cls("sphere", r)

    @classmethod
    def rp(cls, r: int) -> "SpaceDescriptor":
        return cls("rp", r)

    @classmethod
    def lens(cls, n: int, m: int) -> "SpaceDescriptor":
        return cls("lens", n, m)

    @classmethod
    def cp(cls, n: int) -> "SpaceDescriptor":
        return cls("cp", n)

    @classmethod
    def parse(cls, text: str) -> "SpaceDescriptor":
        """Parse ``rp:r | lens:n,m | cp:n | sphere:r``."""
        try:
            kind, _, args = text.strip().partition(":")
            vals = [int(a) for a in args.split(",")]
        except ValueError:
            raise ValueError(f"bad space descriptor {text!r}") from None
        kind = kind.lower()
        if kind == "lens":
            if len(vals) != 2:
                raise ValueError("lens descriptor is lens:n,m")
            return cls.lens(*vals)
        if kind in ("rp", "cp", "sphere") and len(vals) == 1:
            return cls(kind, vals[0])
        raise ValueError(f"bad space descriptor {text!r}")

    @property
    def tag(self) -> str:
        return f"lens:{self.n},{self.m}" if self.kind == "lens" else f"{self.kind}:{self.n}"

    @property
    def r(self) -> int:
        return self.n

    @property
    def ambient(self) -> int:
        """Length of the covering-sphere coordinate vector."""
        if self.kind in ("sphere", "rp"):
            return self.n + 1
        return 2 * self.n + 2

    @property
    def dim(self) -> int:
        """Manifold dimension."""
        return {"sphere": self.n, "rp": self.n, "lens": 2 * self.n + 1, "cp": 2 * self.n}[self.kind]

    @property
    def deck_order(self) -> int | None:
        """Order of the (finite) deck group, None for the circle action on CP^n."""
        return {"sphere": 1, "rp": 2, "lens": self.m, "cp": None}[self.kind]

    def __str__(self):
        return self.tag


def deck_apply(space: SpaceDescriptor, j: int, x: np.ndarray) -> np.ndarray:
    """Apply the j-th deck transformation (finite deck groups only)."""
    x = np.asarray(x, dtype=float)
    if space.kind == "sphere":
        return x
    if space.kind == "rp":
        return -x if j % 2 else x
    if space.kind == "lens":
        return rotate(x, space.m, j)
    raise ValueError("CP^n has a continuous deck group")


def _check_dim(space: SpaceDescriptor, x: np.ndarray):
    if x.shape[-1] != space.ambient:
        raise DimensionMismatch(
            f"{space.tag} needs vectors of length {space.ambient}, got {x.shape[-1]}"
        )


def _first_significant(mag: np.ndarray) -> np.ndarray:
    mask = mag > EPS0
    return np.argmax(mask, axis=-1)


def canonical_rep(space: SpaceDescriptor, x) -> np.ndarray:
    """Batched canonical representative (no unit-norm validation)."""
    x = _as_array(x)
    _check_dim(space, x)
    if space.kind == "sphere":
        return x.copy()
    if space.kind == "rp":
        idx = _first_significant(np.abs(x))
        lead = np.take_along_axis(x, idx[..., None], axis=-1)
        return np.where(lead < 0, -x, x)
    z = as_complex(x)
    idx = _first_significant(np.abs(z))
    lead = np.take_along_axis(z, idx[..., None], axis=-1)
    if space.kind == "cp":
        phase = np.conj(lead) / np.abs(lead)
        phase = np.where((lead.imag == 0) & (lead.real > 0), 1.0 + 0j, phase)
        out = z * phase
        # make the leading coordinate exactly real so that canonicalizing is idempotent
        np.put_along_axis(out, idx[..., None], np.abs(lead).astype(complex), axis=-1)
        return from_complex(out)
    m = space.m
    t = np.angle(lead) * m / (2 * math.pi)
    j = np.floor(t + _ARG_SLACK)
    return from_complex(z * np.exp(-2j * math.pi * j / m))


@dataclass(frozen=True, eq=False)
class SpacePoint:
    """A point of a space, held as its canonical covering-sphere representative."""

    space: SpaceDescriptor
    rep: UnitVector

    @property
    def coords(self) -> np.ndarray:
        return self.rep.coords

    def __array__(self, dtype=None, copy=None):
        return self.rep.__array__(dtype)

    def tolist(self):
        return self.rep.tolist()

    def to_json(self) -> dict:
        return {"space": self.space.tag, "rep": self.rep.tolist()}


def canonicalize(space: SpaceDescriptor, x) -> SpacePoint:
    a = _as_array(x).reshape(-1)
    _check_dim(space, a)
    rep = canonical_rep(space, a)
    return SpacePoint(space, UnitVector(rep / np.linalg.norm(rep)))


def orbit_distance(space: SpaceDescriptor, x, y) -> float | np.ndarray:
    """Angular distance between the deck orbits of x and y (batched)."""
    x = _as_array(x)
    y = _as_array(y)
    _check_dim(space, x)
    _check_dim(space, y)
    if space.kind == "sphere":
        return angle(x, y)
    if space.kind == "rp":
        return np.minimum(angle(x, y), angle(x, -y))
    if space.kind == "cp":
        h = np.asarray(herm_inner(x, y))
        mag = np.abs(h)
        phase = np.where(mag > 0, h / np.where(mag > 0, mag, 1.0), 1.0)
        return angle(x, scale_complex(y, phase[..., None]))
    best = angle(x, y)
    for j in range(1, space.m):
        best = np.minimum(best, angle(x, rotate(y, space.m, j)))
    return best


def nearest_deck_image(space: SpaceDescriptor, x, y) -> tuple[np.ndarray, int]:
    """Deck image of y maximizing <x, g.y>; ties go to the smallest index."""
    x = _as_array(x)
    y = _as_array(y)
    order = space.deck_order
    if order is None:
        raise ValueError("nearest_deck_image needs a finite deck group")
    best_j, best_v, best_ip = 0, y, float(x @ y)
    for j in range(1, order):
        gy = deck_apply(space, j, y)
        ip = float(x @ gy)
        if ip > best_ip + 1e-15:
            best_j, best_v, best_ip = j, gy, ip
    return best_v, best_j


@dataclass(frozen=True)
class OrderedPairConfig:
    """An ordered pair of distinct points (off the diagonal / in distinct orbits)."""

    first: SpacePoint
    second: SpacePoint
    min_separation: float

    @property
    def space(self) -> SpaceDescriptor:
        return self.first.space

    def swapped(self) -> "OrderedPairConfig":
        return OrderedPairConfig(self.second, self.first, self.min_separation)


def make_pair_config(space: SpaceDescriptor, x, y, eps_sep: float = EPS_SEP) -> OrderedPairConfig:
    a = canonicalize(space, x)
    b = canonicalize(space, y)
    sep = float(orbit_distance(space, a.coords, b.coords))
    if sep <= eps_sep:
        raise DiagonalPair(f"points lie in the same orbit (separation {sep:.3e})")
    return OrderedPairConfig(a, b, sep)


# ------------------------------------------------------------------ frames


@dataclass(frozen=True)
class Frame2:
    u1: UnitVector
    u2: UnitVector
    hermitian: bool = False

    def __post_init__(self):
        if not is_frame(self.u1, self.u2, 1e-9, hermitian=self.hermitian):
            raise ValueError("vectors do not form an orthonormal 2-frame")


def is_frame(u1, u2, tol: float = TOL, hermitian: bool = False) -> bool:
    a = _as_array(u1)
    b = _as_array(u2)
    if a.shape != b.shape:
        raise DimensionMismatch("frame vectors differ in length")
    ip = abs(herm_inner(a, b)) if hermitian else abs(float(a @ b))
    return bool(
        ip <= tol
        and abs(np.linalg.norm(a) - 1) <= tol
        and abs(np.linalg.norm(b) - 1) <= tol
    )


# ----------------------------------------------------------- group actions

Point = Any  # an ndarray, or a tuple of ndarrays for product spaces


def flatten_point(p: Point) -> np.ndarray:
    if isinstance(p, tuple):
        return np.concatenate([np.ravel(_as_array(q)) for q in p])
    return np.ravel(_as_array(p))


@dataclass(frozen=True)
class GroupActionSpec:
    """A finite group acting through explicit generators.

    ``relations`` lists pairs of words (tuples of generator indices, applied
    left to right) that must act identically.
    """

    kind: str
    generators: tuple[Callable[[Point], Point], ...]
    relations: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = field(default=())
    names: tuple[str, ...] = field(default=())

    def apply_word(self, word: Sequence[int], p: Point) -> Point:
        for g in word:
            p = self.generators[g](p)
        return p


def antipodal_action() -> GroupActionSpec:
    return GroupActionSpec("antipodal", (lambda x: -x,), (((0, 0), ()),), ("-1",))


def trivial_action(ngens: int = 1) -> GroupActionSpec:
    return GroupActionSpec("trivial", tuple(lambda x: x for _ in range(ngens)), (), ("id",) * ngens)


def rotation_action(m: int) -> GroupActionSpec:
    return GroupActionSpec(
        "rotation", (lambda x: rotate(x, m, 1),), (((0,) * m, ()),), (f"omega_{m}",)
    )


def swap_action() -> GroupActionSpec:
    return GroupActionSpec("swap", (lambda p: (p[1], p[0]),), (((0, 0), ()),), ("swap",))


def d4_action() -> GroupActionSpec:
    """Wreath product (Z/2 x Z/2) x| Z/2 on a product of two spheres.

    Generators: antipode on the first factor, swap, and the diagonal
    antipode (-x, -y) (redundant, but it is the one lifting the diagonal Z/2).
    """
    a = lambda p: (-p[0], p[1])
    b = lambda p: (p[1], p[0])
    c = lambda p: (-p[0], -p[1])
    rels = (
        ((0, 0), ()),
        ((1, 1), ()),
        ((0, 1) * 4, ()),
        ((2,), (0, 1, 0, 1)),
    )
    return GroupActionSpec("dihedral", (a, b, c), rels, ("antipode_first", "swap", "antipode_both"))


def d4_through_z2() -> GroupActionSpec:
    """D4 acting on a target sphere through its projection onto the swap Z/2."""
    return GroupActionSpec(
        "through_z2", (lambda x: x, lambda x: -x, lambda x: x), (), ("id", "-1", "id")
    )


def lens_pair_action(m: int) -> GroupActionSpec:
    """G_m = (Z/m x Z/m) x| Z/2 on pairs of points of S^(2n+1)."""
    g1 = lambda p: (rotate(p[0], m, 1), p[1])
    g2 = lambda p: (p[0], rotate(p[1], m, 1))
    s = lambda p: (p[1], p[0])
    rels = (((0,) * m, ()), ((2, 2), ()), ((2, 0, 2), (1,)), ((0, 1), (1, 0)))
    return GroupActionSpec("lens_pair", (g1, g2, s), rels, ("omega_first", "omega_second", "swap"))


def check_group_relations(
    action: GroupActionSpec,
    sampler: Callable[[np.random.Generator], Point],
    samples: int = 100,
    seed: int = 0,
) -> float:
    """Max residual of the action's relations and of norm preservation."""
    from .sampling import sample_rng, stream_id

    stream = stream_id("group-relations", action.kind)
    worst = 0.0
    for i in range(samples):
        p = sampler(sample_rng(seed, i, stream))
        for g in action.generators:
            q = g(p)
            parts = q if isinstance(q, tuple) else (q,)
            for part in parts:
                worst = max(worst, abs(float(np.linalg.norm(part)) - 1.0))
        for lhs, rhs in action.relations:
            d = flatten_point(action.apply_word(lhs, p)) - flatten_point(action.apply_word(rhs, p))
            worst = max(worst, float(np.linalg.norm(d)))
    return worst
