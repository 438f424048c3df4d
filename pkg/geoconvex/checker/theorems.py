'''
Closure theorems for geodesic φ-convex functions. Every check here verifies the hypotheses on
samples first and reports "hypothesis-failed" without testing the conclusion when one of them fails.
'''
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from geoconvex.bifunction import Bifunction, BifunctionProperty, probe
from geoconvex.checker.engine import hypothesis_failed, PairInequality, sweep_report
from geoconvex.checker.function import FunctionOnManifold, RealFunction
from geoconvex.checker.geodesic import (check_geodesic_convex, check_geodesic_phi_convex, geodesic_problem,
                                        same_manifold)
from geoconvex.checker.interval import check_g_preinvex, check_phi_convex_interval
from geoconvex.exceptions import InvalidCheckArguments, NoHypothesesToCheck
from geoconvex.expr import compose, Expression, pointwise_max, substitute, total, weighted_sum
from geoconvex.manifold import (antipodal_pairs, circular_distance, curve_array, curve_point, geodesic_between,
                                Point, Region, region_grid)
from geoconvex.models import CheckReport, CheckStatus, ProbePlan, SamplingPlan, Tolerances
from geoconvex.utils import critical_logger


logger = logging.getLogger('geoconvex')


# Each member of a bifunction family costs a full geodesic sweep
MAX_FAMILY_COUNT = 500


def _conclude(check: str, report: CheckReport, hypotheses: List[str]) -> CheckReport:
    'Relabel the conclusion report of a theorem check'
    report.check = check
    report.notes.insert(0, 'hypotheses held on samples: ' + '; '.join(hypotheses))
    logger.debug('%s: hypotheses held, conclusion %s', check, report.status.value)
    return report


def _each_passes(check: str, fs: Sequence[FunctionOnManifold], phi: Bifunction, region: Region,
                 plan: SamplingPlan, tol: Tolerances) -> Optional[CheckReport]:
    'Returns a hypothesis-failed report for the first member of the family which does not pass'
    for i, f in enumerate(fs, start=1):
        with critical_logger(logger):
            report = check_geodesic_phi_convex(f, phi, region, plan, tol)
        if report.status is not CheckStatus.PASS:
            return hypothesis_failed(check, f'member {i} ({f}) is not geodesic φ-convex', report)
    return None


def sampled_range(f: FunctionOnManifold, region: Region, plan: SamplingPlan) -> Tuple[float, float]:
    'Smallest and largest value of f on the region grid'
    values = f.values(region_grid(region, plan))
    return float(np.min(values)), float(np.max(values))


def nondecreasing_failure(g: RealFunction, lower: float, upper: float, plan: SamplingPlan,
                          tol: Tolerances) -> Optional[str]:
    '''
    Pairwise check that g(u₁) ≤ g(u₂) + τ for sampled u₁ ≤ u₂ in [lower, upper]. Returns a
    description of the worst decrease, or None.
    '''
    if upper - lower <= tol.closed_form:
        return None
    u = np.linspace(lower, upper, plan.line_count)
    gu = g.values(u)
    # largest drop from any earlier sample
    drop = np.maximum.accumulate(gu) - gu
    j = int(np.argmax(drop))
    if drop[j] <= tol.closed_form:
        return None
    i = int(np.argmax(gu[:j + 1]))
    return f'g decreases from g({u[i]:.6g})={gu[i]:.6g} to g({u[j]:.6g})={gu[j]:.6g}'


def check_composition(f: FunctionOnManifold, g: RealFunction, phi: Bifunction, region: Region,
                      plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None,
                      strict: bool=False) -> CheckReport:
    '''
    If f is geodesic convex and g is non-decreasing and φ-convex on the range of f, then g∘f is
    geodesic φ-convex. With `strict`, g must be strictly φ-convex and so is the conclusion.
    '''
    same_manifold(f, region)
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()
    check = 'composition'

    with critical_logger(logger):
        convex = check_geodesic_convex(f, region, plan, tol)
    if convex.status is not CheckStatus.PASS:
        return hypothesis_failed(check, 'f is not geodesic convex on the region', convex)

    lower, upper = sampled_range(f, region, plan)
    hypotheses = ['f geodesic convex']

    failure = nondecreasing_failure(g, lower, upper, plan, tol)
    if failure:
        return hypothesis_failed(check, f'g is not non-decreasing on the range of f: {failure}')
    hypotheses.append(f'g non-decreasing on [{lower:.6g}, {upper:.6g}]')

    if upper - lower > tol.closed_form:
        with critical_logger(logger):
            outer = check_phi_convex_interval(g, phi, (lower, upper), plan, tol, strict=strict)
        if outer.status is not CheckStatus.PASS:
            return hypothesis_failed(check, 'g is not φ-convex on the range of f', outer)
        hypotheses.append('g strictly φ-convex on the range' if strict else 'g φ-convex on the range')
    else:
        hypotheses.append('range of f is a single value; g φ-convexity not sampled')

    gf = FunctionOnManifold(
        f.manifold, compose(g.over('u'), {'u': f.expression}, f.manifold.coordinate_names)
    )
    return _conclude(check, check_geodesic_phi_convex(gf, phi, region, plan, tol, strict=strict),
                     hypotheses)


def check_weighted_sum(fs: Sequence[FunctionOnManifold], weights: Sequence[float], phi: Bifunction,
                       region: Region, plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None,
                       probe_plan: Optional[ProbePlan]=None) -> CheckReport:
    '''
    For nonnegatively linear φ, a nonnegative combination of geodesic φ-convex functions is
    geodesic φ-convex.
    '''
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()
    check = 'weighted_sum'

    if not fs or len(fs) != len(weights):
        raise InvalidCheckArguments(check, 'one weight per function is required')
    for f in fs:
        same_manifold(f, region)

    if any(w < 0 for w in weights):
        return hypothesis_failed(check, f'weights {list(weights)} are not all nonnegative')

    linear = probe(phi, BifunctionProperty.NONNEG_LINEAR, probe_plan)
    if not linear.holds:
        report = hypothesis_failed(check, f'{phi.name} is not nonnegatively linear')
        report.probes.append(linear)
        return report

    failed = _each_passes(check, fs, phi, region, plan, tol)
    if failed:
        return failed

    spec = fs[0].manifold
    combined = FunctionOnManifold(
        spec, weighted_sum([f.expression for f in fs], weights, spec.coordinate_names)
    )
    report = _conclude(check, check_geodesic_phi_convex(combined, phi, region, plan, tol),
                       [f'{phi.name} nonnegatively linear', f'all {len(fs)} members geodesic φ-convex'])
    report.probes.append(linear)
    return report


class PushforwardInequality(PairInequality):
    '''
    h(F(α_xy(t))) ≤ h(F(x)) + tφ(h(F(y)), h(F(x))) with h = f∘F⁻¹, along the image curve F∘α_xy.
    '''
    name = 'pushforward'

    def __init__(self, f: FunctionOnManifold, phi: Bifunction, F: Sequence[Expression],
                 F_inv: Sequence[Expression]):
        self.spec = f.manifold
        self.phi = phi
        self.F = F
        names = self.spec.coordinate_names
        self.h = FunctionOnManifold(
            self.spec, compose(f.expression, dict(zip(names, F_inv)), names)
        )

    def image(self, coords: np.ndarray) -> np.ndarray:
        env = self.spec.columns(coords)
        mapped = np.stack([np.broadcast_to(e.evaluate_array(env), coords.shape[:-1]) for e in self.F], axis=-1)
        return self.spec.normalize(mapped)

    def sides(self, X, Y, T):
        lhs = self.h.values(self.image(curve_array(self.spec, X, Y, T)))
        hx = self.h.values(self.image(X))[:, None]
        hy = self.h.values(self.image(Y))[:, None]
        return lhs, np.broadcast_to(hx + T * self.phi(hy, hx), lhs.shape)

    def scalar_sides(self, x, y, t):
        g = geodesic_between(self.spec, Point(tuple(x)), Point(tuple(y)))

        def h_of_image(coords):
            binding = dict(zip(self.spec.coordinate_names, coords))
            return self.h.value(self.spec.point(*(e.evaluate(binding) for e in self.F)))

        hx, hy = h_of_image(x), h_of_image(y)
        return h_of_image(curve_point(g, t).coords), hx + t * self.phi.value(hy, hx)

    def skipped(self, X, Y):
        return antipodal_pairs(self.spec, X, Y)


def check_pushforward(f: FunctionOnManifold, phi: Bifunction, F: Sequence[Expression],
                      F_inv: Sequence[Expression], region: Region, plan: Optional[SamplingPlan]=None,
                      tol: Optional[Tolerances]=None) -> CheckReport:
    '''
    If f is geodesic φ-convex on A and F is a diffeomorphism with inverse F_inv, then f∘F⁻¹ is
    geodesic φ-convex on F(A) along the image geodesics F∘α_xy.

    Both maps are given per coordinate, as expressions over the coordinate names.
    '''
    same_manifold(f, region)
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()
    check = 'pushforward'
    spec = f.manifold
    names = spec.coordinate_names

    if len(F) != spec.dimension or len(F_inv) != spec.dimension:
        raise InvalidCheckArguments(check, f'F and F_inv need {spec.dimension} components')
    F = [Expression(e.root, names) for e in F]
    F_inv = [Expression(e.root, names) for e in F_inv]

    ineq = PushforwardInequality(f, phi, F, F_inv)

    points = region_grid(region, plan)
    roundtrip = spec.normalize(np.stack([
        np.broadcast_to(e.evaluate_array(spec.columns(ineq.image(points))), (len(points),)) for e in F_inv
    ], axis=-1))
    errors = np.array([circular_distance(p, q, spec) for p, q in zip(points, roundtrip)])
    j = int(np.argmax(errors))
    if errors[j] > tol.identity:
        return hypothesis_failed(
            check, f'F_inv∘F is not the identity: {points[j].tolist()} maps to {roundtrip[j].tolist()}'
        )

    with critical_logger(logger):
        source = check_geodesic_phi_convex(f, phi, region, plan, tol)
    if source.status is not CheckStatus.PASS:
        return hypothesis_failed(check, 'f is not geodesic φ-convex on the region', source)

    problem = geodesic_problem(ineq, region, plan, tol)
    report = sweep_report(check, problem.sweep(), problem.notes)
    report.measurements['max_inverse_error'] = float(errors[j])
    return _conclude(check, report, ['F_inv∘F = identity on samples', 'f geodesic φ-convex'])


def check_sup_family(fs: Sequence[FunctionOnManifold], phi: Bifunction, region: Region,
                     plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None,
                     probe_plan: Optional[ProbePlan]=None) -> CheckReport:
    '''
    For sequentially upper bounded φ, the pointwise supremum of a family of geodesic φ-convex
    functions is geodesic φ-convex.
    '''
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()
    check = 'sup_family'

    if not fs:
        raise InvalidCheckArguments(check, 'the family is empty')
    for f in fs:
        same_manifold(f, region)

    bounded = probe(phi, BifunctionProperty.SEQ_UPPER_BOUNDED, probe_plan)
    if not bounded.holds:
        report = hypothesis_failed(check, f'{phi.name} is not sequentially upper bounded')
        report.probes.append(bounded)
        return report

    failed = _each_passes(check, fs, phi, region, plan, tol)
    if failed:
        return failed

    spec = fs[0].manifold
    sup = FunctionOnManifold(spec, pointwise_max([f.expression for f in fs], spec.coordinate_names))
    report = _conclude(check, check_geodesic_phi_convex(sup, phi, region, plan, tol),
                       [f'{phi.name} sequentially upper bounded', f'all {len(fs)} members geodesic φ-convex'])
    report.probes.append(bounded)
    return report


def check_phi_limit(f: FunctionOnManifold, family: Expression, mode: str, count: int, phi_limit: Bifunction,
                    region: Region, plan: Optional[SamplingPlan]=None,
                    tol: Optional[Tolerances]=None) -> CheckReport:
    '''
    If f is geodesic φₙ-convex for every n and φₙ → φ (mode "pointwise"), or the partial sums of
    Σφₙ converge to φ (mode "series"), then f is geodesic φ-convex. The hypotheses are checked for
    n = 1…count.

    Params:
        family:  Expression over u, v and the index n
        mode:    "pointwise" or "series"
        count:   Number of members N to check
    '''
    same_manifold(f, region)
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()
    check = 'phi_limit'

    if count < 1:
        raise NoHypothesesToCheck()
    if count > MAX_FAMILY_COUNT:
        raise InvalidCheckArguments(check, f'count must be at most {MAX_FAMILY_COUNT}')
    if mode not in ('pointwise', 'series'):
        raise InvalidCheckArguments(check, f'unknown mode "{mode}"')

    family = Expression(family.root, ('u', 'v', 'n'))
    members = [substitute(family, {'n': n}) for n in range(1, count + 1)]

    phi_n = None
    for n in range(1, count + 1):
        expression = members[n - 1] if mode == 'pointwise' else total(members[:n], ('u', 'v'))
        phi_n = Bifunction(f'{mode}_{n}', expression)

        with critical_logger(logger):
            report = check_geodesic_phi_convex(f, phi_n, region, plan, tol)
        if report.status is not CheckStatus.PASS:
            return hypothesis_failed(check, f'f is not geodesic φ-convex for n={n}', report)

    lower, upper = sampled_range(f, region, plan)
    u = np.linspace(lower, upper, 17)
    U, V = np.meshgrid(u, u, indexing='ij')
    deviation = float(np.max(np.abs(phi_n(U, V) - phi_limit(U, V))))  # type: ignore[misc]

    report = _conclude(check, check_geodesic_phi_convex(f, phi_limit, region, plan, tol),
                       [f'f geodesic φₙ-convex for n = 1…{count} ({mode})'])
    report.measurements['max_deviation'] = deviation
    report.notes.append(f'max |φ_N − φ| on sampled values of f is {deviation:.6g} for N={count}')
    return report


def check_g_preinvex_composition(f: FunctionOnManifold, g: RealFunction, phi: Bifunction, psi: Bifunction,
                                 region: Region, plan: Optional[SamplingPlan]=None,
                                 tol: Optional[Tolerances]=None) -> CheckReport:
    '''
    If f is geodesic φ-convex and g is non-decreasing and G-preinvex with respect to φ and ψ on the
    range of f, then g∘f is geodesic ψ-convex.
    '''
    same_manifold(f, region)
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()
    check = 'g_preinvex_composition'

    with critical_logger(logger):
        inner = check_geodesic_phi_convex(f, phi, region, plan, tol)
    if inner.status is not CheckStatus.PASS:
        return hypothesis_failed(check, 'f is not geodesic φ-convex on the region', inner)

    lower, upper = sampled_range(f, region, plan)
    hypotheses = ['f geodesic φ-convex']

    failure = nondecreasing_failure(g, lower, upper, plan, tol)
    if failure:
        return hypothesis_failed(check, f'g is not non-decreasing on the range of f: {failure}')
    hypotheses.append(f'g non-decreasing on [{lower:.6g}, {upper:.6g}]')

    if upper - lower > tol.closed_form:
        with critical_logger(logger):
            preinvex = check_g_preinvex(g, phi, psi, (lower, upper), plan, tol)
        if preinvex.status is not CheckStatus.PASS:
            return hypothesis_failed(check, 'g is not G-preinvex on the range of f', preinvex)
        hypotheses.append('g G-preinvex on the range')

    gf = FunctionOnManifold(
        f.manifold, compose(g.over('u'), {'u': f.expression}, f.manifold.coordinate_names)
    )
    return _conclude(check, check_geodesic_phi_convex(gf, psi, region, plan, tol), hypotheses)
