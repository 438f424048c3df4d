'''
φ-epigraphs and geodesic φ-convex subsets of M×ℝ.

Sets are membership predicates: a region of M and a conjunction of constraints, each either
expr(x) ≤ α (a level constraint on the ℝ coordinate α) or expr(x) ≤ c for a constant c. A set B is
geodesic φ-convex when for members (x, α), (y, β) and t ∈ [0, 1] the point
(α_xy(t), α + tφ(β, α)) is again a member.
'''
import dataclasses
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from geoconvex.bifunction import Bifunction, BifunctionProperty, probe
from geoconvex.checker.engine import hypothesis_failed, PairInequality, run_sweep, sweep_report, Thresholds
from geoconvex.checker.function import FunctionOnManifold
from geoconvex.checker.geodesic import check_geodesic_phi_convex, same_manifold
from geoconvex.exceptions import InvalidCheckArguments, NoMemberSamples
from geoconvex.expr import Expression, pointwise_max
from geoconvex.manifold import (antipodal_pairs, curve_array, curve_point, geodesic_between, Point, Region,
                                region_grid)
from geoconvex.models import CheckReport, CheckStatus, ProbePlan, SamplingPlan, Tolerances
from geoconvex.utils import critical_logger


logger = logging.getLogger('geoconvex')


# Levels sampled per base point: active bound + kΛ/LEVEL_STEPS for k = 0…LEVEL_STEPS
LEVEL_STEPS = 4


@dataclasses.dataclass(frozen=True)
class ProductPoint:
    base: Point
    level: float


@dataclasses.dataclass(frozen=True)
class Constraint:
    'expression ≤ level when `bound` is None, else expression ≤ bound'
    expression: Expression
    bound: Optional[float] = None

    @property
    def on_level(self) -> bool:
        return self.bound is None


@dataclasses.dataclass(frozen=True)
class SetSpec:
    region: Region
    constraints: Tuple[Constraint, ...] = ()
    level_range: float = 2.0

    def __post_init__(self):
        if self.level_range < 0:
            raise InvalidCheckArguments('set', 'level_range must be non-negative')
        names = self.region.manifold.coordinate_names
        # declare every constraint over the coordinates; raises UnboundVariable for foreign names
        object.__setattr__(self, 'constraints', tuple(
            Constraint(Expression(c.expression.root, names), c.bound) for c in self.constraints
        ))

    @property
    def manifold(self):
        return self.region.manifold

    @classmethod
    def epigraph(cls, f: FunctionOnManifold, region: Region, level_range: float=2.0) -> 'SetSpec':
        'E(f) = {(x, α) : f(x) ≤ α}'
        same_manifold(f, region)
        return cls(region, (Constraint(f.expression),), level_range)

    @classmethod
    def intersection(cls, specs: Sequence['SetSpec']) -> 'SetSpec':
        if not specs:
            raise InvalidCheckArguments('intersection_closure', 'at least one set is required')
        region = specs[0].region
        if any(s.region != region for s in specs):
            raise InvalidCheckArguments('intersection_closure', 'all sets must share one region')
        constraints = tuple(c for s in specs for c in s.constraints)
        return cls(region, constraints, max(s.level_range for s in specs))

    def _columns(self, coords: np.ndarray) -> dict:
        return self.manifold.columns(coords)

    def excess(self, coords: np.ndarray, levels: np.ndarray) -> np.ndarray:
        '''
        Largest amount by which a constraint is exceeded at each (x, α); ≤ 0 for members.

        Params:
            coords:  Base points, shape (..., d)
            levels:  Levels, shape (...)
        '''
        env = self._columns(coords)
        shape = np.shape(levels)
        result = np.zeros(shape)
        for i, c in enumerate(self.constraints):
            cap = levels if c.on_level else c.bound
            value = np.broadcast_to(c.expression.evaluate_array(env), shape) - cap
            result = value if i == 0 else np.maximum(result, value)
        return result

    def scalar_excess(self, coords: Sequence[float], level: float) -> float:
        binding = dict(zip(self.manifold.coordinate_names, coords))
        values = [
            c.expression.evaluate(binding) - (level if c.on_level else c.bound)  # type: ignore[operator]
            for c in self.constraints
        ]
        return max(values) if values else 0.0

    def contains(self, p: ProductPoint, tolerance: float=1e-9) -> bool:
        return self.region.contains(p.base) and self.scalar_excess(p.base.coords, p.level) <= tolerance

    def member_samples(self, plan: SamplingPlan, tol: Tolerances) -> np.ndarray:
        '''
        Sampled members of the set, shape (M, d + 1) with the level in the last column. Each base
        point of the region grid which satisfies the constant constraints gets the levels
        active + kΛ/4, where active is the smallest level satisfying every level constraint. With no
        level constraint, the levels are spread over [−Λ, Λ].
        '''
        base = region_grid(self.region, plan)
        env = self._columns(base)

        keep = np.ones(len(base), dtype=bool)
        active = None
        for c in self.constraints:
            value = np.broadcast_to(c.expression.evaluate_array(env), (len(base),))
            if c.on_level:
                active = value if active is None else np.maximum(active, value)
            else:
                keep &= value <= c.bound + tol.closed_form  # type: ignore[operator]

        if active is None:
            offsets = np.linspace(-self.level_range, self.level_range, LEVEL_STEPS + 1)
            levels = np.broadcast_to(offsets, (len(base), LEVEL_STEPS + 1))
        else:
            offsets = self.level_range * np.arange(LEVEL_STEPS + 1) / LEVEL_STEPS
            levels = active[:, None] + offsets

        base, levels = base[keep], levels[keep]
        if len(base) == 0:
            raise NoMemberSamples()

        points = np.repeat(base, levels.shape[1], axis=0)
        return np.concatenate([points, levels.reshape(-1, 1)], axis=1)


def epigraph_contains(f: FunctionOnManifold, p: ProductPoint, tolerance: float=1e-9) -> bool:
    'f(x) ≤ α + τ; the epigraph is closed'
    return f.value(p.base) <= p.level + tolerance


class SetPhiConvexity(PairInequality):
    '''
    Membership of (α_xy(t), α + tφ(β, α)) as an inequality: the largest constraint excess at the
    displaced point must not be positive.
    '''
    name = 'set_phi_convex'

    def __init__(self, s: SetSpec, phi: Bifunction):
        self.s = s
        self.phi = phi
        self.spec = s.manifold

    def degenerate(self, X, Y):
        # pairs over one base point
        return np.all(X[:, :-1] == Y[:, :-1], axis=1)

    def sides(self, X, Y, T):
        base = curve_array(self.spec, X[:, :-1], Y[:, :-1], T)
        alpha, beta = X[:, -1:], Y[:, -1:]
        levels = alpha + T * self.phi(beta, alpha)
        lhs = self.s.excess(base, levels)
        return lhs, np.zeros(lhs.shape)

    def scalar_sides(self, x, y, t):
        g = geodesic_between(self.spec, Point(tuple(x[:-1])), Point(tuple(y[:-1])))
        level = x[-1] + t * self.phi.value(y[-1], x[-1])
        return self.s.scalar_excess(curve_point(g, t).coords, level), 0.0

    def skipped(self, X, Y):
        return antipodal_pairs(self.spec, X[:, :-1], Y[:, :-1])


def check_geodesic_phi_convex_set(s: SetSpec, phi: Bifunction, plan: Optional[SamplingPlan]=None,
                                  tol: Optional[Tolerances]=None) -> CheckReport:
    '''
    Sampled check that a set in M×ℝ is geodesic φ-convex. Witnesses carry the level as the last
    coordinate of x and y.
    '''
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()

    members = s.member_samples(plan, tol)
    result = run_sweep(SetPhiConvexity(s, phi), members, plan.t_grid(), Thresholds.from_tolerances(tol))

    notes = list(s.region.notes)
    if not s.constraints:
        notes.append('no constraints: the set is the whole product A×ℝ')
    report = sweep_report('set_phi_convex', result, notes)
    report.measurements['members'] = float(len(members))
    return report


def _disagreement(check: str, function: CheckReport, set_: CheckReport) -> CheckReport:
    'The two verdicts differ; the witness is taken from whichever check was violated'
    witness = function.violation or set_.violation
    report = CheckReport(
        check=check,
        status=CheckStatus.VIOLATED if witness else CheckStatus.INCONCLUSIVE,
        violation=witness,
        notes=[f'function check {function.status.value}, set check {set_.status.value}'],
    )
    return report


def verify_epigraph_characterization(f: FunctionOnManifold, phi: Bifunction, region: Region,
                                     plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None,
                                     probe_plan: Optional[ProbePlan]=None,
                                     level_range: float=2.0) -> CheckReport:
    '''
    For non-decreasing φ, f is geodesic φ-convex exactly when its epigraph is a geodesic φ-convex
    set. Both checks run on the same plan and their statuses must agree.
    '''
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()
    check = 'epigraph_characterization'

    monotone = probe(phi, BifunctionProperty.NONDECREASING, probe_plan)
    if not monotone.holds:
        report = hypothesis_failed(check, f'{phi.name} is not non-decreasing')
        report.probes.append(monotone)
        return report

    with critical_logger(logger):
        function = check_geodesic_phi_convex(f, phi, region, plan, tol)
        set_ = check_geodesic_phi_convex_set(SetSpec.epigraph(f, region, level_range), phi, plan, tol)

    if function.status is set_.status:
        report = CheckReport(
            check=check,
            status=CheckStatus.PASS,
            samples=function.samples + set_.samples,
            notes=[f'function and epigraph checks agree: both {function.status.value}'],
        )
    else:
        report = _disagreement(check, function, set_)

    report.measurements.update({
        'function_worst_margin': function.worst_margin or 0.0,
        'set_worst_margin': set_.worst_margin or 0.0,
    })
    report.probes.append(monotone)
    return report


def check_intersection_closure(specs: Sequence[SetSpec], phi: Bifunction, plan: Optional[SamplingPlan]=None,
                               tol: Optional[Tolerances]=None) -> CheckReport:
    '''
    The intersection of geodesic φ-convex sets is geodesic φ-convex.
    '''
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()
    check = 'intersection_closure'

    intersection = SetSpec.intersection(specs)

    for i, s in enumerate(specs, start=1):
        with critical_logger(logger):
            report = check_geodesic_phi_convex_set(s, phi, plan, tol)
        if report.status is not CheckStatus.PASS:
            return hypothesis_failed(check, f'set {i} is not geodesic φ-convex', report)

    try:
        report = check_geodesic_phi_convex_set(intersection, phi, plan, tol)
    except NoMemberSamples:
        return CheckReport(check=check, status=CheckStatus.INCONCLUSIVE,
                           notes=['the intersection has no sampled members'])

    report.check = check
    report.notes.insert(0, f'hypotheses held on samples: all {len(specs)} sets geodesic φ-convex')
    return report


def sup_via_epigraph(fs: Sequence[FunctionOnManifold], phi: Bifunction, region: Region,
                     plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None,
                     probe_plan: Optional[ProbePlan]=None, level_range: float=2.0) -> CheckReport:
    '''
    For non-decreasing φ, the supremum of a family whose epigraphs are geodesic φ-convex sets is
    geodesic φ-convex, because E(sup fᵢ) = ⋂ E(fᵢ).
    '''
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()
    check = 'sup_via_epigraph'

    if not fs:
        raise InvalidCheckArguments(check, 'the family is empty')

    monotone = probe(phi, BifunctionProperty.NONDECREASING, probe_plan)
    if not monotone.holds:
        report = hypothesis_failed(check, f'{phi.name} is not non-decreasing')
        report.probes.append(monotone)
        return report

    epigraphs = [SetSpec.epigraph(f, region, level_range) for f in fs]
    for i, s in enumerate(epigraphs, start=1):
        with critical_logger(logger):
            report = check_geodesic_phi_convex_set(s, phi, plan, tol)
        if report.status is not CheckStatus.PASS:
            return hypothesis_failed(check, f'the epigraph of member {i} is not geodesic φ-convex', report)

    spec = region.manifold
    sup = FunctionOnManifold(spec, pointwise_max([f.expression for f in fs], spec.coordinate_names))

    base = region_grid(region, plan)
    sup_values = sup.values(base)
    upper = float(np.max(sup_values))

    # epigraph identity on product points spanning the sampled values of the supremum
    levels = np.linspace(float(np.min(sup_values)) - level_range, upper + level_range, 9)
    coords = np.repeat(base, len(levels), axis=0)
    alphas = np.tile(levels, len(base))
    in_sup = SetSpec.epigraph(sup, region).excess(coords, alphas) <= tol.closed_form
    in_all = SetSpec.intersection(epigraphs).excess(coords, alphas) <= tol.closed_form
    mismatches = int(np.sum(in_sup != in_all))

    with critical_logger(logger):
        conclusion = check_geodesic_phi_convex(sup, phi, region, plan, tol)

    conclusion.check = check
    conclusion.notes[:0] = [
        f'hypotheses held on samples: {phi.name} non-decreasing; all {len(fs)} epigraphs geodesic '
        f'φ-convex; family bounded above by {upper:.6g} on samples',
        f'E(sup fᵢ) = ⋂ E(fᵢ) on {len(coords)} sampled product points'
        if mismatches == 0 else f'E(sup fᵢ) and ⋂ E(fᵢ) differ on {mismatches} sampled product points',
    ]
    conclusion.measurements['identity_mismatches'] = float(mismatches)
    conclusion.probes.append(monotone)
    return conclusion
