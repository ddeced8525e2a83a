"""Explicit motion planners on projective spaces, spheres and lens spaces.

Two constructions:

* the rotation planner on P^r driven by a symmetric axial bilinear map
  alpha into R^(s+1): on the open set U_i = {alpha_i(l1, l2) != 0} choose
  representatives with alpha_i(l1, l2) > 0 (this orients the plane spanned
  by the two lines) and rotate L1 to L2 inside that oriented plane.  The
  s+1 sets U_i cover the deleted product, and the rules commute with
  swapping the endpoints, so they are local sections of the symmetric
  evaluation fibration;
* the lift planner t -> nu(t x2 + (1-t) x1) on spheres, P^r and even-torsion
  lens spaces, with x2 the deck image of the second point nearest to x1.
  For even m, -1 is a deck transformation, so the chord never passes
  through the origin.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import NearZeroVector, NoRuleFound, Unsupported, UnverifiedWitness
from .geometry import EPS0, TOL, SpaceDescriptor, SpacePoint
from .maps import BilinearMapSpec, check_relations
from .sampling import sample_rng, stream_id, uniform_sphere

DEFAULT_N = 64


@dataclass(frozen=True)
class PlannerSpec:
    kind: str  # "rotation" or "lift"
    space: SpaceDescriptor
    bilinear: BilinearMapSpec | None = None
    N: int = DEFAULT_N

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("paths need N >= 1 steps")
        if self.kind == "rotation":
            b = self.bilinear
            if b is None:
                raise Unsupported("the rotation planner needs a bilinear map")
            missing = {"SYM", "AXIAL2"} - set(b.relation_profile)
            if missing:
                raise Unsupported(f"{b.name} lacks {sorted(missing)}; the rotation planner needs a symmetric axial map")
            if self.space.kind != "rp" or self.space.r != b.domain_dim:
                raise Unsupported(f"{b.name} plans on P^{b.domain_dim}, not {self.space.tag}")
        elif self.kind == "lift":
            if self.space.kind == "lens" and self.space.m % 2:
                raise Unsupported("the lift planner needs even torsion (antipodal chords otherwise)")
            if self.space.kind == "cp":
                raise Unsupported("no lift planner for CP^n")
        else:
            raise ValueError(f"unknown planner kind {self.kind!r}")

    @property
    def name(self) -> str:
        if self.kind == "rotation":
            return f"rotation[{self.bilinear.name}]@{self.space.tag}"
        return f"lift@{self.space.tag}"


def rotation_planner(spec: BilinearMapSpec, N: int = DEFAULT_N, verify_samples: int = 1000,
                     seed: int = 0, tol: float = TOL) -> PlannerSpec:
    """Rotation planner on P^r, after numerically checking SYM and AXIAL2."""
    planner = PlannerSpec("rotation", SpaceDescriptor.rp(spec.domain_dim), spec, N)
    if verify_samples:
        for rel in ("SYM", "AXIAL2"):
            rep = check_relations(spec, rel, verify_samples, seed, tol)
            if not rep.passed:
                raise UnverifiedWitness(f"{spec.name} fails {rel} (residual {rep.max_residual:.3g})")
    return planner


def lift_planner(space: SpaceDescriptor, N: int = DEFAULT_N) -> PlannerSpec:
    return PlannerSpec("lift", space, None, N)


@dataclass(frozen=True, eq=False)
class DiscretePath:
    """N+1 uniformly spaced samples of a path in a space.

    ``lift`` is the continuous path on the covering sphere; ``reps`` holds
    the canonical representatives of its samples.
    """

    space: SpaceDescriptor
    reps: np.ndarray
    lift: np.ndarray
    rule_id: int | None = None
    deck_index: int | None = None

    @property
    def N(self) -> int:
        return len(self.reps) - 1

    @property
    def samples(self) -> tuple[SpacePoint, ...]:
        return tuple(SpacePoint(self.space, geo.UnitVector(r)) for r in self.reps)

    def steps(self) -> np.ndarray:
        return np.atleast_1d(geo.orbit_distance(self.space, self.reps[:-1], self.reps[1:]))

    def max_step(self) -> float:
        return float(self.steps().max()) if self.N else 0.0

    def to_json(self) -> dict:
        return {"space": self.space.tag, "rule_id": self.rule_id, "samples": self.reps.tolist()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{k}" for k in range(self.reps.shape[1])])
        for k, row in enumerate(self.reps):
            w.writerow([repr(k / self.N if self.N else 0.0)] + [repr(float(v)) for v in row])
        return buf.getvalue()


def reverse(path: DiscretePath) -> DiscretePath:
    return DiscretePath(path.space, path.reps[::-1].copy(), path.lift[::-1].copy(), path.rule_id, path.deck_index)


def _finish(space, lift, p1: SpacePoint, p2: SpacePoint, rule_id=None, deck_index=None) -> DiscretePath:
    reps = geo.canonical_rep(space, lift)
    reps[0] = p1.coords
    reps[-1] = p2.coords
    return DiscretePath(space, reps, lift, rule_id, deck_index)


# ------------------------------------------------------------- rotation


def select_rule(spec: BilinearMapSpec, L1: SpacePoint, L2: SpacePoint, rule: int | None = None):
    """Pick the rule index i (1-based) with the largest |alpha_i(l1, l2)|
    (smallest index on ties) and representatives with alpha_i(l1, l2) > 0.

    With ``rule`` given, use that index if the pair lies in its open set.
    """
    l1 = np.array(L1.coords)
    l2 = np.array(L2.coords)
    vals = spec(l1, l2)
    i = int(np.argmax(np.abs(vals))) if rule is None else rule - 1
    if not abs(vals[i]) > EPS0:
        raise NoRuleFound(f"alpha_{i + 1} vanishes on the pair (|alpha| = {np.abs(vals).max():.3e})")
    if vals[i] < 0:
        l2 = -l2
    return i + 1, l1, l2


def rotation_lift(l1: np.ndarray, l2: np.ndarray, N: int) -> np.ndarray:
    """Rotate l1 to l2 at constant speed inside their oriented plane."""
    theta = geo.angle(l1, l2)
    perp = l2 - (l1 @ l2) * l1
    perp /= np.linalg.norm(perp)
    t = np.arange(N + 1)[:, None] / N
    lift = np.cos(t * theta) * l1 + np.sin(t * theta) * perp
    lift[0] = l1
    lift[-1] = l2
    return lift


def rotation_plan(planner: PlannerSpec, L1, L2, rule: int | None = None) -> DiscretePath:
    if planner.kind != "rotation":
        raise Unsupported("rotation_plan needs a rotation planner")
    pair = geo.make_pair_config(planner.space, L1, L2)
    i, l1, l2 = select_rule(planner.bilinear, pair.first, pair.second, rule)
    return _finish(planner.space, rotation_lift(l1, l2, planner.N), pair.first, pair.second, rule_id=i)


# ----------------------------------------------------------------- lift


def chord_lift(x1: np.ndarray, x2: np.ndarray, N: int) -> np.ndarray:
    t = np.arange(N + 1)[:, None] / N
    chord = t * x2 + (1 - t) * x1
    norms = np.linalg.norm(chord, axis=-1)
    if np.any(norms <= EPS0):
        k = int(np.argmin(norms))
        raise NearZeroVector(f"chord passes through the origin at t = {k / N:g}")
    lift = chord / norms[:, None]
    lift[0] = x1
    lift[-1] = x2
    return lift


def lift_plan(planner: PlannerSpec, P1, P2, deck: int | None = None) -> DiscretePath:
    if planner.kind != "lift":
        raise Unsupported("lift_plan needs a lift planner")
    space = planner.space
    pair = geo.make_pair_config(space, P1, P2)
    x1 = np.array(pair.first.coords)
    if deck is None:
        x2, j = geo.nearest_deck_image(space, x1, pair.second.coords)
    else:
        j = deck
        x2 = geo.deck_apply(space, j, pair.second.coords)
    return _finish(space, chord_lift(x1, x2, planner.N), pair.first, pair.second, deck_index=j)


def plan(planner: PlannerSpec, p1, p2) -> DiscretePath:
    if planner.kind == "rotation":
        return rotation_plan(planner, p1, p2)
    return lift_plan(planner, p1, p2)


def step_bound(planner: PlannerSpec) -> float:
    """Provable bound on the distance between consecutive samples.

    Rotation paths turn through arccos<l1, l2>, which lies in (0, pi) once
    the representatives are fixed by the sign of alpha_i, so the step is at
    most pi/N.  A normalized chord between points at angle phi moves fastest
    at its midpoint, where one step covers 2*atan(tan(phi/2)/N).  On P^r and
    even lens spaces the nearest deck image gives phi <= pi/2, hence steps
    below 2/N < pi/N; on a sphere phi can approach pi and no uniform bound
    exists (inf is returned).
    """
    if planner.kind == "lift" and planner.space.kind == "sphere":
        return math.inf
    return math.pi / planner.N


# -------------------------------------------------------- verification


@dataclass
class SectionReport:
    planner: str
    pairs: int
    seed: int
    tol: float
    N: int
    endpoint_residual: float = 0.0
    max_step: float = 0.0
    step_bound: float = 0.0
    plane_residual: float = 0.0
    symmetry_residual: float = 0.0
    continuity_ratio: float = 0.0
    continuity_bound: float = 1e3
    coverage_failures: int = 0
    singular_failures: int = 0
    rules_used: dict = field(default_factory=dict)

    @property
    def checks(self) -> dict[str, bool]:
        return {
            "endpoints": self.endpoint_residual <= min(self.tol, 1e-12),
            "step": self.max_step <= self.step_bound + 1e-9,
            "plane": self.plane_residual <= self.tol,
            "swap_reversal": self.symmetry_residual <= self.tol,
            "continuity": self.continuity_ratio <= self.continuity_bound,
            "coverage": self.coverage_failures == 0,
            "nonsingular": self.singular_failures == 0,
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {
            "planner": self.planner,
            "pairs": self.pairs,
            "seed": self.seed,
            "tol": self.tol,
            "N": self.N,
            "endpoint_residual": self.endpoint_residual,
            "max_step": self.max_step,
            "step_bound": self.step_bound if math.isfinite(self.step_bound) else None,
            "plane_residual": self.plane_residual,
            "symmetry_residual": self.symmetry_residual,
            "continuity_ratio": self.continuity_ratio,
            "coverage_failures": self.coverage_failures,
            "singular_failures": self.singular_failures,
            "rules_used": {str(k): v for k, v in sorted(self.rules_used.items())},
            "checks": self.checks,
            "pass": self.passed,
        }


def _pathwise_distance(space, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(geo.orbit_distance(space, a, b)))


def _perturb(rng, x: np.ndarray, delta: float) -> np.ndarray:
    d = rng.standard_normal(x.shape)
    y = x + delta * d / np.linalg.norm(d)
    return y / np.linalg.norm(y)


def verify_section(planner: PlannerSpec, pair_count: int = 1000, seed: int = 0, tol: float = TOL,
                   delta: float = 1e-6, min_separation: float = 0.1) -> SectionReport:
    """Sampled checks that the planner behaves as a symmetric local section.

    Endpoints, step size, plane confinement (rotation), swap-reversal,
    rule coverage, singular chords (lift), and a Lipschitz surrogate for
    continuity: for pairs at orbit distance >= ``min_separation``, moving the
    endpoint representatives by ``delta`` inside the same rule moves the path
    by at most 1e3 * delta.
    """
    space = planner.space
    rep = SectionReport(planner.name, pair_count, seed, tol, planner.N, step_bound=step_bound(planner))
    stream = stream_id("section", planner.name)
    for i in range(pair_count):
        rng = sample_rng(seed, i, stream)
        while True:
            x, y = uniform_sphere(rng, space.ambient), uniform_sphere(rng, space.ambient)
            if geo.orbit_distance(space, x, y) > geo.EPS_SEP:
                break
        p1, p2 = geo.canonicalize(space, x), geo.canonicalize(space, y)
        try:
            path = plan(planner, p1, p2)
            back = plan(planner, p2, p1)
        except NoRuleFound:
            rep.coverage_failures += 1
            continue
        except NearZeroVector:
            rep.singular_failures += 1
            continue
        rep.rules_used[path.rule_id] = rep.rules_used.get(path.rule_id, 0) + 1

        end = max(
            float(np.max(np.abs(path.reps[0] - p1.coords))),
            float(np.max(np.abs(path.reps[-1] - p2.coords))),
            float(geo.orbit_distance(space, path.lift[0], p1.coords)),
            float(geo.orbit_distance(space, path.lift[-1], p2.coords)),
        )
        rep.endpoint_residual = max(rep.endpoint_residual, end)
        rep.max_step = max(rep.max_step, path.max_step())
        rep.symmetry_residual = max(rep.symmetry_residual,
                                    _pathwise_distance(space, back.reps, path.reps[::-1]))

        if planner.kind == "rotation":
            l1, l2 = path.lift[0], path.lift[-1]
            basis = np.linalg.qr(np.stack([l1, l2], axis=1))[0]
            proj = path.lift - (path.lift @ basis) @ basis.T
            rep.plane_residual = max(rep.plane_residual, float(np.max(np.linalg.norm(proj, axis=-1))))

        if geo.orbit_distance(space, x, y) >= min_separation:
            a = _perturb(rng, path.lift[0], delta)
            b = _perturb(rng, path.lift[-1], delta)
            moved = math.hypot(np.linalg.norm(a - path.lift[0]), np.linalg.norm(b - path.lift[-1]))
            if planner.kind == "rotation":
                ai = planner.bilinear.component(path.rule_id, a, b)
                if not ai > 0:
                    continue  # perturbation left the rule's open set
                other = rotation_lift(a, b, planner.N)
            else:
                other = chord_lift(a, b, planner.N)
            ratio = _pathwise_distance(space, other, path.lift) / moved
            rep.continuity_ratio = max(rep.continuity_ratio, ratio)
    return rep
