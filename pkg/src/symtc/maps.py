"""Bilinear and biequivariant maps between spheres, the frame maps Psi and H,
Hopf and Haefliger maps, and their numerical relation checks.

All evaluators are vectorized over leading axes: ``x`` and ``y`` may be
single vectors or stacks of vectors with the coordinate on the last axis.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import geometry as geo
from .errors import CoincidentImages, DegeneratePair, NearZeroVector, Unsupported
from .geometry import (
    EPS0,
    EPS_SEP,
    TOL,
    GroupActionSpec,
    OrderedPairConfig,
    SpaceDescriptor,
    SpacePoint,
    UnitVector,
    flatten_point,
)
from .sampling import random_frame, sample_rng, stream_id, uniform_sphere

RELATION_IDS = ("SYM", "AXIAL2", "BIEQ_E", "TCE", "EMB", "IDENT")


# ------------------------------------------------------------------ specs


@dataclass(frozen=True)
class BilinearMapSpec:
    """A map alpha: R^(r+1) x R^(r+1) -> R^(s+1) with its claimed relations.

    ``torsion`` is the order m of the cyclic group Z/m (acting by the scalar
    omega = exp(2 pi i/m) on complex coordinates) used by the relation sets
    that mention omega; m = 2 means omega = -1.  ``complex_target`` marks
    outputs that are read as vectors of C^k (for the omega-scaling relation).
    """

    name: str
    domain_dim: int
    target_dim: int
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    relation_profile: frozenset = frozenset()
    torsion: int = 2
    complex_target: bool = False
    bilinear: bool = True

    def __call__(self, x, y) -> np.ndarray:
        return self.evaluator(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def sphere(self, x, y) -> np.ndarray:
        """Normalized values nu(alpha(x, y)) (batched)."""
        return geo.nu(self(x, y))

    def component(self, i: int, x, y) -> np.ndarray:
        """The i-th real component alpha_i, 1-indexed."""
        if not 1 <= i <= self.target_dim + 1:
            raise IndexError(f"component index {i} outside 1..{self.target_dim + 1}")
        return self(x, y)[..., i - 1]

    @property
    def ambient_in(self) -> int:
        return self.domain_dim + 1

    @property
    def ambient_out(self) -> int:
        return self.target_dim + 1

    @property
    def rule_count(self) -> int:
        return self.target_dim + 1


def _complex_mult(x, y):
    a, b = x[..., 0], x[..., 1]
    c, d = y[..., 0], y[..., 1]
    return np.stack([a * c - b * d, a * d + b * c], axis=-1)


def _quat_mult(p, q):
    a1, b1, c1, d1 = (p[..., i] for i in range(4))
    a2, b2, c2, d2 = (q[..., i] for i in range(4))
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )


def _quat_conj(p):
    return p * np.array([1.0, -1.0, -1.0, -1.0])


def _oct_mult(x, y):
    # Cayley-Dickson: (a, b)(c, d) = (ac - d* b, da + b c*)
    a, b = x[..., :4], x[..., 4:]
    c, d = y[..., :4], y[..., 4:]
    return np.concatenate(
        [_quat_mult(a, c) - _quat_mult(_quat_conj(d), b), _quat_mult(d, a) + _quat_mult(b, _quat_conj(c))],
        axis=-1,
    )


def _poly_mult(r: int):
    def conv(x, y):
        out = np.zeros(np.broadcast_shapes(x.shape[:-1], y.shape[:-1]) + (2 * r + 1,))
        for i in range(r + 1):
            out[..., i : i + r + 1] += x[..., i, None] * y
        return out

    return conv


def _lens_conv(n: int):
    def conv(x, y):
        z = geo.as_complex(x)
        w = np.conj(geo.as_complex(y))
        out = np.zeros(np.broadcast_shapes(z.shape[:-1], w.shape[:-1]) + (2 * n + 1,), dtype=complex)
        for i in range(n + 1):
            out[..., i : i + n + 1] += z[..., i, None] * w
        return geo.from_complex(out)

    return conv


def _lens_outer(n: int):
    def outer(x, y):
        z = geo.as_complex(x)
        w = np.conj(geo.as_complex(y))
        prod = z[..., :, None] * w[..., None, :]
        return geo.from_complex(prod.reshape(prod.shape[:-2] + ((n + 1) ** 2,)))

    return outer


def builtin_bilinear(kind: str, r: int | None = None, n: int | None = None,
                     m: int | None = None, k: int | None = None) -> BilinearMapSpec:
    """Built-in bilinear maps.

    ``complex``, ``quaternion``, ``octonion``: the division-algebra products.
    ``poly`` (needs ``r``): coefficient convolution R^(r+1) x R^(r+1) -> R^(2r+1),
    i.e. multiplication of real polynomials of degree <= r.
    ``lens`` (needs ``n``, ``m``, optional ``k``): complex maps
    C^(n+1) x C^(n+1) -> C^k built from the products z_i * conj(w_j).  They
    satisfy omega-scaling in the first slot and omega^-1-scaling in the
    second; ``k = 2n+1`` (the default) sums them along anti-diagonals, i.e.
    multiplies the polynomials with coefficients z and conj(w), and
    ``k = (n+1)^2`` keeps every product.
    """
    kind = kind.lower()
    if kind == "complex":
        return BilinearMapSpec("complex", 1, 1, _complex_mult, frozenset({"SYM", "AXIAL2"}))
    if kind == "quaternion":
        return BilinearMapSpec("quaternion", 3, 3, _quat_mult, frozenset({"AXIAL2"}))
    if kind == "octonion":
        return BilinearMapSpec("octonion", 7, 7, _oct_mult, frozenset({"AXIAL2"}))
    if kind in ("poly", "polynomial", "polynomialmult"):
        if r is None or r < 0:
            raise Unsupported("polynomial multiplication needs r >= 0")
        return BilinearMapSpec(f"poly{r}", r, 2 * r, _poly_mult(r), frozenset({"SYM", "AXIAL2"}))
    if kind in ("lens", "lensbiequivariant"):
        if n is None or m is None or n < 0 or m < 2:
            raise Unsupported("lens biequivariant maps need n >= 0 and m >= 2")
        k = 2 * n + 1 if k is None else k
        if k == 2 * n + 1:
            ev = _lens_conv(n)
        elif k == (n + 1) ** 2:
            ev = _lens_outer(n)
        else:
            raise Unsupported(f"no built-in lens map C^{n + 1} x C^{n + 1} -> C^{k}")
        return BilinearMapSpec(
            f"lens{n},{m}:{k}", 2 * n + 1, 2 * k - 1, ev, frozenset({"TCE", "AXIAL2"}),
            torsion=m, complex_target=True,
        )
    raise Unsupported(f"unknown bilinear map {kind!r}")


def sphere_map(spec: BilinearMapSpec, x, y) -> UnitVector:
    """alpha~(x, y) = nu(alpha(x, y)); NearZeroVector flags a singular pair."""
    xa, ya = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if xa.shape[-1] != spec.ambient_in or ya.shape[-1] != spec.ambient_in:
        raise geo.DimensionMismatch(f"{spec.name} takes vectors of length {spec.ambient_in}")
    return geo.normalize(spec(xa, ya))


# -------------------------------------------------------------- relations


def _omega(x: np.ndarray, m: int, j: int = 1) -> np.ndarray:
    if m == 1 or j % m == 0:
        return x
    if m == 2:
        return -x
    return geo.rotate(x, m, j)


def _relation_equations(rel: str, f, m: int, x, y) -> list[tuple[str, np.ndarray, np.ndarray]]:
    """Generator equations of a relation set as (label, lhs, rhs) stacks."""
    if rel == "SYM":
        return [("f(x,y)=f(y,x)", f(x, y), f(y, x))]
    if rel == "AXIAL2":
        base = f(x, y)
        return [("-f(x,y)=f(-x,y)", -base, f(-x, y)), ("-f(x,y)=f(x,-y)", -base, f(x, -y))]
    if rel == "BIEQ_E":
        return [
            ("f(wx,y)=f(x,wy)", f(_omega(x, m), y), f(x, _omega(y, m))),
            ("f(-x,y)=-f(x,y)", f(-x, y), -f(x, y)),
        ]
    if rel == "TCE":
        base = f(x, y)
        wbase = _omega(base, m)
        return [
            ("f(wx,y)=w f(x,y)", f(_omega(x, m), y), wbase),
            ("w f(x,y)=f(x,w^-1 y)", wbase, f(x, _omega(y, m, -1))),
        ]
    if rel == "EMB":
        base = f(x, y)
        return [
            ("f(wx,y)=f(x,y)", f(_omega(x, m), y), base),
            ("f(x,y)=f(x,wy)", base, f(x, _omega(y, m))),
            ("f(x,y)=-f(y,x)", base, -f(y, x)),
        ]
    if rel == "IDENT":
        return [("f(ex,y)=f(x,y)", f(_omega(x, 1), y), f(x, y))]
    raise ValueError(f"unknown relation set {rel!r}")


@dataclass
class VerificationReport:
    map: str
    relation: str
    samples: int
    seed: int
    max_residual: float
    worst_input: list | None
    tol: float
    singular: int = 0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.singular == 0 and math.isfinite(self.max_residual) and self.max_residual <= self.tol

    def to_json(self) -> dict:
        res = self.max_residual if math.isfinite(self.max_residual) else None
        out = {
            "map": self.map,
            "relation": self.relation,
            "samples": self.samples,
            "seed": self.seed,
            "max_residual": res,
            "worst_input": self.worst_input,
            "pass": self.passed,
            "tol": self.tol,
        }
        if self.singular:
            out["singular"] = self.singular
        if self.details:
            out["details"] = self.details
        return out


def _safe_sphere(spec: BilinearMapSpec):
    """Batched nu(alpha(x, y)) with NaN rows where alpha vanishes."""

    def f(x, y):
        v = spec(x, y)
        n = np.linalg.norm(v, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(n > EPS0, v / np.where(n > EPS0, n, 1.0), np.nan)

    return f


def _distinct_orbit_pair(rng, ambient: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    while True:
        x = uniform_sphere(rng, ambient)
        y = uniform_sphere(rng, ambient)
        if _orbit_sep(x, y, m) > EPS_SEP:
            return x, y


def _orbit_sep(x, y, m: int) -> float:
    if m <= 2 or x.size % 2:
        return float(min(geo.angle(x, y), geo.angle(x, -y)))
    return float(min(geo.angle(x, geo.rotate(y, m, j)) for j in range(m)))


def sample_pairs(ambient: int, count: int, seed: int, stream: int, m: int = 2,
                 start: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Seeded pairs drawn from the orbit configuration space of Z/m."""
    xs = np.empty((count, ambient))
    ys = np.empty((count, ambient))
    for i in range(count):
        xs[i], ys[i] = _distinct_orbit_pair(sample_rng(seed, start + i, stream), ambient, m)
    return xs, ys


def relation_residuals(spec: BilinearMapSpec, rel: str, seed: int, start: int, stop: int,
                       torsion: int | None = None):
    """Per-sample residuals for sample indices ``start..stop-1``.

    Returns ``(residuals, xs, ys)``; NaN marks a sample where the map vanished.
    Splitting an index range across workers and concatenating reproduces the
    serial result exactly.
    """
    m = spec.torsion if torsion is None else torsion
    stream = stream_id("relations", spec.name, rel)
    xs, ys = sample_pairs(spec.ambient_in, stop - start, seed, stream, m=max(m, 2), start=start)
    f = _safe_sphere(spec)
    res = np.zeros(stop - start)
    for _, lhs, rhs in _relation_equations(rel, f, m, xs, ys):
        res = np.fmax(res, np.linalg.norm(lhs - rhs, axis=-1))
        res[np.isnan(lhs).any(axis=-1) | np.isnan(rhs).any(axis=-1)] = np.nan
    return res, xs, ys


def _report_from_residuals(name, rel, res, xs, ys, seed, tol, extra=None) -> VerificationReport:
    singular = int(np.isnan(res).sum())
    if res.size == 0:
        return VerificationReport(name, rel, 0, seed, 0.0, None, tol)
    if singular:
        worst = int(np.flatnonzero(np.isnan(res))[0])
        worst_val = math.inf
    else:
        worst = int(np.argmax(res))
        worst_val = float(res[worst])
    return VerificationReport(
        name, rel, int(res.size), seed, worst_val, [xs[worst].tolist(), ys[worst].tolist()], tol,
        singular, extra or {},
    )


def check_relations(spec: BilinearMapSpec, rel: str, samples: int = 10_000, seed: int = 0,
                    tol: float = TOL, torsion: int | None = None) -> VerificationReport:
    """Evaluate every generator equation of ``rel`` at seeded random unit pairs.

    Failures (including vanishing of alpha) are reported, never raised.
    """
    res, xs, ys = relation_residuals(spec, rel, seed, 0, samples, torsion)
    return _report_from_residuals(spec.name, rel, res, xs, ys, seed, tol)


def check_nonvanishing(spec: BilinearMapSpec, samples: int = 10_000, seed: int = 0) -> tuple[int, float]:
    """(vanishing count, minimum |alpha(x, y)|) over seeded unit pairs."""
    xs, ys = sample_pairs(spec.ambient_in, samples, seed, stream_id("nonvanishing", spec.name),
                          m=max(spec.torsion, 2))
    norms = np.linalg.norm(spec(xs, ys), axis=-1)
    return int(np.sum(norms <= EPS0)), float(norms.min()) if samples else math.inf


def check_bilinearity(spec: BilinearMapSpec, samples: int = 1000, seed: int = 0) -> float:
    """Max residual of linearity in each slot, on Gaussian vectors and scalars."""
    d = spec.ambient_in
    worst = 0.0
    stream = stream_id("bilinear", spec.name)
    for i in range(samples):
        rng = sample_rng(seed, i, stream)
        x, x2, y, y2 = (rng.standard_normal(d) for _ in range(4))
        a, b = rng.standard_normal(2)
        r1 = spec(a * x + b * x2, y) - (a * spec(x, y) + b * spec(x2, y))
        r2 = spec(x, a * y + b * y2) - (a * spec(x, y) + b * spec(x, y2))
        worst = max(worst, float(np.linalg.norm(r1)), float(np.linalg.norm(r2)))
    return worst


# ---------------------------------------------------------- equivariance


def check_equivariance(fn: Callable, domain_action: GroupActionSpec, codomain_action: GroupActionSpec,
                       sampler: Callable[[np.random.Generator], object], samples: int = 1000,
                       seed: int = 0, tol: float = TOL, name: str = "map") -> VerificationReport:
    """Check fn(g.p) = g'.fn(p) for each matched generator pair (g, g')."""
    if len(domain_action.generators) != len(codomain_action.generators):
        raise ValueError("actions must list the same number of generators")
    stream = stream_id("equivariance", name, domain_action.kind, codomain_action.kind)
    worst, worst_p = 0.0, None
    for i in range(samples):
        p = sampler(sample_rng(seed, i, stream))
        fp = fn(p)
        for g, h in zip(domain_action.generators, codomain_action.generators):
            d = float(np.linalg.norm(flatten_point(fn(g(p))) - flatten_point(h(fp))))
            if d > worst or worst_p is None:
                worst, worst_p = max(d, worst), p
    worst_input = [np.asarray(q).tolist() for q in worst_p] if isinstance(worst_p, tuple) else (
        None if worst_p is None else np.asarray(worst_p).tolist())
    return VerificationReport(name, f"equivariance:{domain_action.kind}->{codomain_action.kind}",
                              samples, seed, worst, worst_input, tol)


# --------------------------------------------------------------------- Psi


def psi_batch(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return geo.nu(x + y, EPS_SEP), geo.nu(x - y, EPS_SEP)


def psi_split(x, y) -> tuple[UnitVector, UnitVector]:
    """(x, y) -> (nu(x + y), nu(x - y)).

    On an orthonormal frame this is ((x+y)/sqrt2, (x-y)/sqrt2), again a frame.
    """
    xa, ya = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if xa.shape != ya.shape:
        raise geo.DimensionMismatch("psi_split needs vectors of equal length")
    if np.linalg.norm(xa + ya) <= EPS_SEP or np.linalg.norm(xa - ya) <= EPS_SEP:
        raise NearZeroVector("psi_split is undefined on pairs with x = +-y")
    return geo.normalize(xa + ya), geo.normalize(xa - ya)


# the relation groups on S^r x S^r, as maps on stacked pairs
_SWAP_CLASS = (  # generated by (-x,-y) and (y,x)
    lambda x, y: (x, y),
    lambda x, y: (-x, -y),
    lambda x, y: (y, x),
    lambda x, y: (-y, -x),
)
_SIGN_CLASS = (  # generated by (-x,y) and (x,-y)
    lambda x, y: (x, y),
    lambda x, y: (-x, y),
    lambda x, y: (x, -y),
    lambda x, y: (-x, -y),
)
_SWAP_GENS = {"(-x,-y)": _SWAP_CLASS[1], "(y,x)": _SWAP_CLASS[2]}
_SIGN_GENS = {"(-x,y)": _SIGN_CLASS[1], "(x,-y)": _SIGN_CLASS[2]}


def _class_residual(a: tuple, b: tuple, group) -> np.ndarray:
    """min over h in group of |a - h.b| for stacked pairs."""
    best = None
    for h in group:
        hb0, hb1 = h(*b)
        d = np.sqrt(np.sum((a[0] - hb0) ** 2, axis=-1) + np.sum((a[1] - hb1) ** 2, axis=-1))
        best = d if best is None else np.minimum(best, d)
    return best


def psi_exchange_suite(r: int, samples: int = 10_000, seed: int = 0, tol: float = TOL) -> list[VerificationReport]:
    """Psi sends the swap relations to the sign relations, and vice versa.

    Forward: for each generator g of {(-x,-y) ~ (x,y) ~ (y,x)}, Psi(g.p)
    lies in the sign class {(+-u, +-v)} of Psi(p).  Backward: for each
    generator of the sign relations, Psi(g.p) lies in the swap class of Psi(p).
    """
    reports = []
    for label, gens, group in (
        ("swap->sign", _SWAP_GENS, _SIGN_CLASS),
        ("sign->swap", _SIGN_GENS, _SWAP_CLASS),
    ):
        stream = stream_id("psi", label, str(r))
        xs, ys = sample_pairs(r + 1, samples, seed, stream)
        base = psi_batch(xs, ys)
        res = np.zeros(samples)
        for g in gens.values():
            res = np.maximum(res, _class_residual(psi_batch(*g(xs, ys)), base, group))
        reports.append(_report_from_residuals(f"psi[r={r}]", f"exchange:{label}", res, xs, ys, seed, tol))
    return reports


# ----------------------------------------------------------------------- H


def retract_batch(u1: np.ndarray, u2: np.ndarray, t) -> tuple[np.ndarray, np.ndarray]:
    """The deformation retraction onto orthonormal frames, on stacked pairs."""
    c = np.sum(u1 * u2, axis=-1, keepdims=True)
    w1 = (u1 + u2) / np.sqrt(1.0 + c)
    w2 = (u1 - u2) / np.sqrt(1.0 - c)
    v1 = w1 + w2
    v2 = w1 - w2
    t = np.asarray(t, dtype=float)
    if t.ndim:
        t = t[..., None]
    a1 = u1 + t * (v1 - u1)
    a2 = u2 + t * (v2 - u2)
    return a1 / np.linalg.norm(a1, axis=-1, keepdims=True), a2 / np.linalg.norm(a2, axis=-1, keepdims=True)


def retract_H(u1, u2, t: float) -> tuple[UnitVector, UnitVector]:
    """H(u1, u2, t): D4-equivariant deformation retraction of S^r x S^r minus
    {x = +-y} onto the Stiefel manifold of orthonormal 2-frames.

    With c = <u1, u2>:  w1 = (u1+u2)/sqrt(1+c),  w2 = (u1-u2)/sqrt(1-c),
    v1 = w1 + w2,  v2 = w1 - w2,  and  u~_i = nu(u_i + t (v_i - u_i)).
    """
    a, b = np.asarray(u1, dtype=float), np.asarray(u2, dtype=float)
    if a.shape != b.shape:
        raise geo.DimensionMismatch("retract_H needs vectors of equal length")
    if abs(float(a @ b)) >= 1.0 - EPS_SEP:
        raise DegeneratePair("retract_H is undefined on pairs with u1 = +-u2")
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    r1, r2 = retract_batch(a, b, t)
    return geo.normalize(r1), geo.normalize(r2)


def _nondegenerate_pairs(ambient, count, seed, stream, max_abs_ip):
    xs = np.empty((count, ambient))
    ys = np.empty((count, ambient))
    for i in range(count):
        rng = sample_rng(seed, i, stream)
        while True:
            x, y = uniform_sphere(rng, ambient), uniform_sphere(rng, ambient)
            if abs(x @ y) <= max_abs_ip:
                break
        xs[i], ys[i] = x, y
    return xs, ys


def retraction_suite(r: int, samples: int = 1000, seed: int = 0, tol: float = TOL,
                     times: Sequence[float] | None = None, max_abs_ip: float = 1 - 1e-6,
                     delta: float = 1e-6) -> list[VerificationReport]:
    """Endpoint, frame, fixed-frame, D4-equivariance and Lipschitz checks for H."""
    times = np.linspace(0.0, 1.0, 11) if times is None else np.asarray(times, dtype=float)
    name = f"H[r={r}]"
    amb = r + 1
    xs, ys = _nondegenerate_pairs(amb, samples, seed, stream_id("H", "pairs", str(r)), max_abs_ip)
    reports = []

    h0 = retract_batch(xs, ys, 0.0)
    res = np.sqrt(np.sum((h0[0] - xs) ** 2, -1) + np.sum((h0[1] - ys) ** 2, -1))
    reports.append(_report_from_residuals(name, "H(.,0)=id", res, xs, ys, seed, min(tol, 1e-12)))

    h1 = retract_batch(xs, ys, 1.0)
    res = np.maximum.reduce([
        np.abs(np.sum(h1[0] * h1[1], -1)),
        np.abs(np.linalg.norm(h1[0], axis=-1) - 1),
        np.abs(np.linalg.norm(h1[1], axis=-1) - 1),
    ])
    reports.append(_report_from_residuals(name, "H(.,1) orthonormal", res, xs, ys, seed, tol))

    fx = np.empty((samples, amb))
    fy = np.empty((samples, amb))
    stream = stream_id("H", "frames", str(r))
    for i in range(samples):
        fx[i], fy[i] = random_frame(sample_rng(seed, i, stream), amb)
    res = np.zeros(samples)
    for t in times:
        a, b = retract_batch(fx, fy, t)
        res = np.maximum(res, np.sqrt(np.sum((a - fx) ** 2, -1) + np.sum((b - fy) ** 2, -1)))
    reports.append(_report_from_residuals(name, "frames fixed", res, fx, fy, seed, tol))

    res = np.zeros(samples)
    d4 = [
        lambda x, y: (-x, -y),
        lambda x, y: (y, x),
        lambda x, y: (-x, y),
    ]
    for t in times:
        a, b = retract_batch(xs, ys, t)
        for g in d4:
            ga, gb = retract_batch(*g(xs, ys), t)
            ea, eb = g(a, b)
            res = np.maximum(res, np.sqrt(np.sum((ga - ea) ** 2, -1) + np.sum((gb - eb) ** 2, -1)))
    reports.append(_report_from_residuals(name, "D4-equivariance", res, xs, ys, seed, tol))

    # Lipschitz surrogate for continuity, away from the excluded locus
    far = np.abs(np.sum(xs * ys, -1)) <= math.cos(0.1)
    px, py = xs[far], ys[far]
    rng = sample_rng(seed, 0, stream_id("H", "perturb", str(r)))
    dx = rng.standard_normal(px.shape)
    dy = rng.standard_normal(py.shape)
    dx *= delta / np.linalg.norm(dx, axis=-1, keepdims=True)
    dy *= delta / np.linalg.norm(dy, axis=-1, keepdims=True)
    qx = px + dx
    qx /= np.linalg.norm(qx, axis=-1, keepdims=True)
    qy = py + dy
    qy /= np.linalg.norm(qy, axis=-1, keepdims=True)
    moved = np.sqrt(np.sum((qx - px) ** 2, -1) + np.sum((qy - py) ** 2, -1))
    ratio = np.zeros(len(px))
    for t in times:
        a, b = retract_batch(px, py, t)
        qa, qb = retract_batch(qx, qy, t)
        out = np.sqrt(np.sum((a - qa) ** 2, -1) + np.sum((b - qb) ** 2, -1))
        ratio = np.maximum(ratio, out / moved)
    reports.append(_report_from_residuals(name, "lipschitz<=1e3", ratio, px, py, seed, 1e3))
    return reports


# --------------------------------------------------- embeddings, Haefliger


@dataclass(frozen=True)
class EmbeddingSpec:
    """A map g from a space to R^d, claimed injective.

    ``evaluator`` acts on (stacks of) covering-sphere representatives and
    must be constant on deck orbits.
    """

    name: str
    source: SpaceDescriptor
    target_dim: int
    evaluator: Callable[[np.ndarray], np.ndarray]

    def __call__(self, p) -> np.ndarray:
        a = p.coords if isinstance(p, SpacePoint) else np.asarray(p, dtype=float)
        return self.evaluator(a)


def hopf_batch(spec: BilinearMapSpec, x: np.ndarray) -> np.ndarray:
    return geo.nu(spec(x, x))


def hopf_embed(spec: BilinearMapSpec, L: SpacePoint) -> UnitVector:
    """P^r -> S^s, [x] -> nu(alpha(x, x)) for a symmetric nonsingular alpha.

    Injective: alpha(x,x) = c^2 alpha(y,y) forces alpha(x - cy, x + cy) = 0.
    """
    if "SYM" not in spec.relation_profile:
        raise Unsupported(f"{spec.name} is not declared symmetric")
    if L.space.kind != "rp" or L.space.r != spec.domain_dim:
        raise geo.DimensionMismatch(f"{spec.name} embeds P^{spec.domain_dim}, got {L.space.tag}")
    return geo.normalize(spec(L.coords, L.coords))


def hopf_embedding(spec: BilinearMapSpec) -> EmbeddingSpec:
    if "SYM" not in spec.relation_profile:
        raise Unsupported(f"{spec.name} is not declared symmetric")
    return EmbeddingSpec(f"hopf[{spec.name}]", SpaceDescriptor.rp(spec.domain_dim), spec.target_dim + 1,
                         lambda x: hopf_batch(spec, x))


def _monomial_exponents(nvars: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for c in combo:
            e[c] += 1
        out.append(tuple(e))
    return out


def lens_veronese_embedding(n: int, m: int) -> EmbeddingSpec:
    """L^(2n+1)(m) -> R^d via z -> (z z^*, all degree-m monomials z^a).

    The Hermitian matrix z z^* fixes z up to a phase lambda; the degree-m
    monomials then fix lambda^m, i.e. lambda up to an m-th root of unity.
    """
    exps = np.array(_monomial_exponents(n + 1, m))
    iu = np.triu_indices(n + 1)

    def g(x):
        z = geo.as_complex(x)
        herm = (z[..., :, None] * np.conj(z[..., None, :]))[..., iu[0], iu[1]]
        mono = np.prod(z[..., None, :] ** exps, axis=-1)
        return np.concatenate([geo.from_complex(herm), geo.from_complex(mono)], axis=-1)

    d = 2 * len(iu[0]) + 2 * len(exps)
    return EmbeddingSpec(f"veronese[{n},{m}]", SpaceDescriptor.lens(n, m), d, g)


def haefliger_map(g: EmbeddingSpec, pair: OrderedPairConfig) -> UnitVector:
    """(a, b) -> (g(a) - g(b)) / |g(a) - g(b)|; swapping the pair negates it."""
    if pair.space != g.source:
        raise geo.DimensionMismatch(f"{g.name} is defined on {g.source.tag}, not {pair.space.tag}")
    diff = g(pair.first) - g(pair.second)
    n = float(np.linalg.norm(diff))
    if n <= EPS0:
        raise CoincidentImages(f"{g.name} identifies two distinct points")
    return geo.normalize(diff)


def haefliger_pair_map(g: EmbeddingSpec) -> BilinearMapSpec:
    """The Haefliger map of g as a (non-bilinear) map on pairs of covering points."""

    def ev(x, y):
        return g.evaluator(x) - g.evaluator(y)

    torsion = g.source.m if g.source.kind == "lens" else 2
    return BilinearMapSpec(f"haefliger[{g.name}]", g.source.ambient - 1, g.target_dim - 1, ev,
                           frozenset({"EMB"}), torsion=torsion, bilinear=False)


def hopf_suite(spec: BilinearMapSpec, samples: int = 10_000, seed: int = 0, tol: float = TOL,
               min_separation: float = 0.1) -> list[VerificationReport]:
    """Sign independence, sampled injectivity and Haefliger antisymmetry."""
    r = spec.domain_dim
    name = f"hopf[{spec.name}]"
    space = SpaceDescriptor.rp(r)
    stream = stream_id("hopf", spec.name)
    xs = np.empty((samples, r + 1))
    ys = np.empty((samples, r + 1))
    for i in range(samples):
        rng = sample_rng(seed, i, stream)
        while True:
            x, y = uniform_sphere(rng, r + 1), uniform_sphere(rng, r + 1)
            if geo.orbit_distance(space, x, y) >= min_separation:
                break
        xs[i], ys[i] = x, y
    reports = []
    hx = hopf_batch(spec, xs)
    res = np.linalg.norm(hx - hopf_batch(spec, -xs), axis=-1)
    reports.append(_report_from_residuals(name, "sign independence", res, xs, ys, seed, tol))

    hy = hopf_batch(spec, ys)
    sep = np.linalg.norm(hx - hy, axis=-1)
    k = int(np.argmin(sep))
    min_sep = float(sep[k])
    # residual is -(minimum image distance): passes iff every sampled pair
    # keeps its images at least EPS0 apart
    inj = VerificationReport(name, "injectivity", samples, seed, -min_sep, [xs[k].tolist(), ys[k].tolist()],
                             -EPS0, details={"min_image_distance": min_sep,
                                             "min_orbit_distance": min_separation})
    reports.append(inj)

    diff = hx - hy
    h_ab = diff / np.linalg.norm(diff, axis=-1, keepdims=True)
    diff_ba = hy - hx
    h_ba = diff_ba / np.linalg.norm(diff_ba, axis=-1, keepdims=True)
    res = np.max(np.abs(h_ab + h_ba), axis=-1)
    reports.append(_report_from_residuals(f"haefliger[{spec.name}]", "antisymmetry", res, xs, ys, seed, 0.0))
    return reports


def composite_alpha_psi(spec: BilinearMapSpec) -> Callable:
    """Frames (x, y) -> alpha~(Psi(x, y)); D4-equivariant for symmetric axial alpha."""

    def f(p):
        a, b = psi_batch(np.asarray(p[0]), np.asarray(p[1]))
        return spec.sphere(a, b)

    return f


def frame_sampler(ambient: int):
    return lambda rng: random_frame(rng, ambient)


def summarize(reports: Iterable[VerificationReport]) -> bool:
    return all(r.passed for r in reports)
