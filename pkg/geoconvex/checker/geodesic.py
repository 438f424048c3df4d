'''
Checks of functions along the geodesics of a catalog manifold.
'''
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from geoconvex.bifunction import Bifunction, BifunctionProperty, probe
from geoconvex.checker.engine import (hypothesis_failed, PairInequality, SweepProblem,
                                      sweep_report, Thresholds)
from geoconvex.checker.function import FunctionOnManifold
from geoconvex.exceptions import InvalidCheckArguments, StencilOutOfDomain
from geoconvex.manifold import (antipodal_pairs, curve_array, curve_point, FactorKind, geodesic_between,
                                Point, Region, region_grid)
from geoconvex.models import CheckReport, CheckStatus, ProbePlan, SamplingPlan, Tolerances, Violation
from geoconvex.utils import critical_logger, worst_index
from geoconvex.utils.decorators import shrink_step_retry


logger = logging.getLogger('geoconvex')


class GeodesicInequality(PairInequality):
    '''
    f(α_xy(t)) ≤ bound(x, y, t), where α_xy is the closed-form geodesic from x to y.
    '''
    def __init__(self, f: FunctionOnManifold):
        self.f = f
        self.spec = f.manifold

    def bound(self, fx, fy, T):
        raise NotImplementedError

    def scalar_bound(self, fx: float, fy: float, t: float) -> float:
        raise NotImplementedError

    def sides(self, X, Y, T):
        lhs = self.f.values(curve_array(self.spec, X, Y, T))
        fx, fy = self.f.values(X)[:, None], self.f.values(Y)[:, None]
        return lhs, np.broadcast_to(self.bound(fx, fy, T), lhs.shape)

    def scalar_sides(self, x, y, t):
        g = geodesic_between(self.spec, Point(tuple(x)), Point(tuple(y)))
        return self.f.value(curve_point(g, t)), self.scalar_bound(self.f.value(x), self.f.value(y), t)

    def skipped(self, X, Y):
        return antipodal_pairs(self.spec, X, Y)


class GeodesicPhiConvexity(GeodesicInequality):
    'f(α_xy(t)) ≤ f(x) + tφ(f(y), f(x))'
    name = 'geodesic_phi_convex'

    def __init__(self, f: FunctionOnManifold, phi: Bifunction):
        super().__init__(f)
        self.phi = phi

    def bound(self, fx, fy, T):
        return fx + T * self.phi(fy, fx)

    def scalar_bound(self, fx, fy, t):
        return fx + t * self.phi.value(fy, fx)


class GeodesicChordConvexity(GeodesicInequality):
    'f(α_xy(t)) ≤ (1 − t)f(x) + tf(y)'
    name = 'geodesic_convex'

    def bound(self, fx, fy, T):
        return (1 - T) * fx + T * fy

    def scalar_bound(self, fx, fy, t):
        return (1 - t) * fx + t * fy


def region_cells(region: Region, plan: SamplingPlan) -> np.ndarray:
    return np.array([
        region.cell_size(i, plan.count_for(i, f.kind)) for i, f in enumerate(region.manifold.factors)
    ])


def geodesic_problem(ineq: PairInequality, region: Region, plan: SamplingPlan, tol: Tolerances,
                     strict: bool=False, fd: bool=False, ts: Optional[np.ndarray]=None) -> SweepProblem:
    return SweepProblem(
        ineq=ineq,
        points=region_grid(region, plan),
        ts=plan.t_grid() if ts is None else ts,
        thresholds=Thresholds.from_tolerances(tol, strict=strict, fd=fd),
        clip=region.clip,
        cells=region_cells(region, plan),
        notes=region.notes,
    )


def same_manifold(f: FunctionOnManifold, region: Region):
    if f.manifold != region.manifold:
        raise InvalidCheckArguments('region', 'the region belongs to a different manifold')


def check_geodesic_phi_convex(f: FunctionOnManifold, phi: Bifunction, region: Region,
                              plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None,
                              strict: bool=False) -> CheckReport:
    '''
    Sampled check of f(α_xy(t)) ≤ f(x) + tφ(f(y), f(x)) over every ordered pair of region grid
    points and every t on the t-grid.

    Params:
        f:       Function on the region's manifold
        phi:     Bifunction
        region:  Sampled region
        plan:    Endpoint and t grids
        tol:     Tolerances
        strict:  Require margin < −τ_strict at interior t for x ≠ y
    '''
    same_manifold(f, region)
    problem = geodesic_problem(GeodesicPhiConvexity(f, phi), region, plan or SamplingPlan(),
                               tol or Tolerances(), strict=strict)
    return sweep_report('geodesic_phi_convex', problem.sweep(), problem.notes)


def check_geodesic_convex(f: FunctionOnManifold, region: Region, plan: Optional[SamplingPlan]=None,
                          tol: Optional[Tolerances]=None, strict: bool=False) -> CheckReport:
    'Sampled check of the chord bound f(α_xy(t)) ≤ (1 − t)f(x) + tf(y)'
    same_manifold(f, region)
    problem = geodesic_problem(GeodesicChordConvexity(f), region, plan or SamplingPlan(),
                               tol or Tolerances(), strict=strict)
    return sweep_report('geodesic_convex', problem.sweep(), problem.notes)


class DifferentialInequality(PairInequality):
    '''
    df_x α̇_xy(0) ≤ φ(f(y), f(x)), the derivative taken as a central difference of t ↦ f(α_xy(t))
    at t = 0. The stencil extrapolates the geodesic formula to t = ±h.
    '''
    name = 'differential_criterion'

    def __init__(self, f: FunctionOnManifold, phi: Bifunction, step: float):
        self.f = f
        self.phi = phi
        self.step = step

    @shrink_step_retry()
    def _derivative(self, X, Y, *, step: float) -> np.ndarray:
        stencil = np.broadcast_to(np.array([-step, step]), (len(X), 2))
        values = self.f.values(curve_array(self.f.manifold, X, Y, stencil))
        return (values[:, 1] - values[:, 0]) / (2 * step)

    @shrink_step_retry()
    def _scalar_derivative(self, x, y, *, step: float) -> float:
        g = geodesic_between(self.f.manifold, Point(tuple(x)), Point(tuple(y)))
        return (self.f.value(curve_point(g, step)) - self.f.value(curve_point(g, -step))) / (2 * step)

    def sides(self, X, Y, T):
        lhs = self._derivative(X, Y, step=self.step)[:, None]
        rhs = self.phi(self.f.values(Y), self.f.values(X))[:, None]
        return np.broadcast_to(lhs, T.shape), np.broadcast_to(rhs, T.shape)

    def scalar_sides(self, x, y, t):
        return (self._scalar_derivative(x, y, step=self.step),
                self.phi.value(self.f.value(y), self.f.value(x)))

    def skipped(self, X, Y):
        return antipodal_pairs(self.f.manifold, X, Y)


def check_differential_criterion(f: FunctionOnManifold, phi: Bifunction, region: Region,
                                 plan: Optional[SamplingPlan]=None,
                                 tol: Optional[Tolerances]=None) -> CheckReport:
    '''
    Sampled check of the first-order criterion df_x α̇_xy ≤ φ(f(y), f(x)), compared with the
    finite-difference tolerance.
    '''
    same_manifold(f, region)
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()

    problem = geodesic_problem(DifferentialInequality(f, phi, tol.fd_step), region, plan, tol,
                               fd=True, ts=np.array([0.0]))
    try:
        result = problem.sweep()
    except StencilOutOfDomain as e:
        return CheckReport(check='differential_criterion', status=CheckStatus.INCONCLUSIVE,
                           notes=[m for m in (str(e), e.extra_message) if m])

    return sweep_report('differential_criterion', result, problem.notes)


def verify_restriction_equivalence(f: FunctionOnManifold, phi: Bifunction, region: Region,
                                   plan: Optional[SamplingPlan]=None,
                                   tol: Optional[Tolerances]=None) -> CheckReport:
    '''
    For every sampled pair x ≠ y compare two verdicts on the segment α_xy, sampled at the t-grid
    parameters s:

      - the interval check of g = f∘α_xy on [0, 1];
      - the manifold check on the sub-pairs (α_xy(s_a), α_xy(s_b)), using geodesics constructed
        afresh between those points.

    The function is geodesic φ-convex exactly when every restriction g is φ-convex, so the verdicts
    must agree pair by pair. Antipodal pairs are skipped: their reversed sub-geodesics turn the
    other way round the circle.
    '''
    same_manifold(f, region)
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()
    spec = f.manifold

    points = region_grid(region, plan)
    s = plan.t_grid()
    ts = plan.t_grid()
    n, m, k = len(points), len(s), len(ts)

    a_idx, b_idx = (v.ravel() for v in np.meshgrid(np.arange(m), np.arange(m), indexing='ij'))
    sa, sb = s[a_idx], s[b_idx]
    distinct_sub = (a_idx != b_idx)[:, None]
    T = np.broadcast_to(ts, (m * m, k))
    U = (1 - T) * sa[:, None] + T * sb[:, None]

    pairs = disagreements = violated_pairs = skipped = 0
    worst_gap = 0.0
    first: Optional[Violation] = None

    for i in range(n):
        X = np.broadcast_to(points[i], points.shape)
        keep = np.any(points != points[i], axis=1) & ~antipodal_pairs(spec, X, points)
        skipped += int(np.sum(np.any(points != points[i], axis=1)) - keep.sum())
        if not keep.any():
            continue

        X, Y = X[keep], points[keep]
        p = len(X)

        # interval check of g(s) = f(α_xy(s))
        G = f.values(curve_array(spec, X, Y, np.broadcast_to(s, (p, m))))
        lhs_i = f.values(curve_array(spec, X, Y, np.broadcast_to(U.ravel(), (p, m * m * k))))
        lhs_i = lhs_i.reshape(p, m * m, k)
        ga, gb = G[:, a_idx][..., None], G[:, b_idx][..., None]
        margin_i = lhs_i - (ga + T * phi(gb, ga))

        # manifold check on the sub-pairs, with independently built geodesics
        S = curve_array(spec, X, Y, np.broadcast_to(s, (p, m)))
        P, Q = S[:, a_idx, :].reshape(-1, spec.dimension), S[:, b_idx, :].reshape(-1, spec.dimension)
        lhs_m = f.values(curve_array(spec, P, Q, np.broadcast_to(ts, (len(P), k)))).reshape(p, m * m, k)
        fp, fq = f.values(P).reshape(p, m * m, 1), f.values(Q).reshape(p, m * m, 1)
        margin_m = lhs_m - (fp + T * phi(fq, fp))

        valid = np.broadcast_to(distinct_sub, margin_i.shape)
        viol_i = np.any((margin_i > tol.closed_form) & valid, axis=(1, 2))
        viol_m = np.any((margin_m > tol.closed_form) & valid, axis=(1, 2))

        pairs += p
        violated_pairs += int(np.sum(viol_i & viol_m))
        differ = viol_i != viol_m
        disagreements += int(differ.sum())

        if differ.any() and first is None:
            j = int(np.flatnonzero(differ)[0])
            wi = float(np.max(np.where(valid[j], margin_i[j], -np.inf)))
            wm = float(np.max(np.where(valid[j], margin_m[j], -np.inf)))
            first = Violation(x=X[j].tolist(), y=Y[j].tolist(), t=0.0, lhs=wi, rhs=wm,
                              margin=abs(wi - wm), threshold=0.0)

        worst_gap = max(worst_gap, float(np.max(np.abs(np.where(valid, margin_i - margin_m, 0.0)))))

    report = CheckReport(
        check='restriction_equivalence',
        status=CheckStatus.PASS if disagreements == 0 else CheckStatus.VIOLATED,
        samples=pairs,
        violation=first,
        notes=list(region.notes),
        measurements={
            'pairs': float(pairs),
            'disagreements': float(disagreements),
            'violated_pairs': float(violated_pairs),
            'max_margin_difference': worst_gap,
        },
    )
    if skipped:
        report.notes.append(f'{skipped} antipodal pairs skipped')
    if violated_pairs:
        report.notes.append(f'both checks violated on {violated_pairs} pairs')
    return report


def interior(region: Region, point: Sequence[float]) -> bool:
    for i, (factor, bound, value) in enumerate(zip(region.manifold.factors, region.bounds, point)):
        if bound.whole:
            continue
        if factor.kind is FactorKind.CIRCLE:
            value = float(region._unwrap(i, value))  # pylint: disable=protected-access
        if not bound.lower < value < bound.upper:  # type: ignore[operator]
            return False
    return True


def check_local_min_criterion(f: FunctionOnManifold, phi: Bifunction, x0: Sequence[float],
                              region: Region, plan: Optional[SamplingPlan]=None,
                              tol: Optional[Tolerances]=None, radius: float=0.25) -> CheckReport:
    '''
    If x₀ is a local minimum of a geodesic φ-convex f, then φ(f(x), f(x₀)) ≥ 0 for every x.

    Local minimality is confirmed on a grid of the max-norm ball of `radius` about x₀ first.
    '''
    same_manifold(f, region)
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()

    x0_ = f.manifold.point(*x0)
    if not interior(region, x0_.coords):
        raise InvalidCheckArguments('local_min', 'x0 must lie in the interior of the region')

    f0 = f.value(x0_)
    offsets = np.linspace(-radius, radius, 9)
    mesh = np.meshgrid(*[offsets] * f.manifold.dimension, indexing='ij')
    ball = region.clip(x0_.as_array() + np.stack([m.ravel() for m in mesh], axis=-1))

    drop = f0 - f.values(ball)
    if np.max(drop) > tol.closed_form:
        j = int(np.argmax(drop))
        return hypothesis_failed(
            'local_min', f'x0 is not a local minimum: f={f.value(ball[j]):.6g} < f(x0)={f0:.6g} '
            f'at {ball[j].tolist()}'
        )

    points = region_grid(region, plan)
    values = -phi(f.values(points), f0)
    i = worst_index(values, points)

    report = CheckReport(
        check='local_min',
        status=CheckStatus.PASS,
        samples=int(len(points)),
        worst_margin=float(values[i]),
        notes=[f'local minimum confirmed on {len(ball)} samples within {radius} of x0'],
    )
    if values[i] > tol.closed_form:
        lhs = -phi.value(f.value(points[i]), f0)
        report.status = CheckStatus.VIOLATED
        report.violation = Violation(x=points[i].tolist(), y=list(x0_.coords), t=0.0, lhs=lhs, rhs=0.0,
                                     margin=lhs, threshold=tol.closed_form)
    return report


class EndpointDerivativeGap(PairInequality):
    '''
    Derivatives of t ↦ f(α_xy(t)) at both ends of the segment must differ: −|d₀ − d₁| ≤ −τ_fd.
    '''
    name = 'endpoint_derivatives'
    skip_reason = 'pairs with x = y'

    def __init__(self, f: FunctionOnManifold, step: float, gap: float):
        self.f = f
        self.step = step
        self.gap = gap

    @shrink_step_retry()
    def derivatives(self, X, Y, *, step: float) -> Tuple[np.ndarray, np.ndarray]:
        stencil = np.broadcast_to(np.array([-step, step, 1 - step, 1 + step]), (len(X), 4))
        v = self.f.values(curve_array(self.f.manifold, X, Y, stencil))
        return (v[:, 1] - v[:, 0]) / (2 * step), (v[:, 3] - v[:, 2]) / (2 * step)

    def sides(self, X, Y, T):
        d0, d1 = self.derivatives(X, Y, step=self.step)
        lhs = -np.abs(d0 - d1)[:, None]
        return np.broadcast_to(lhs, T.shape), np.full(T.shape, -self.gap)

    def scalar_sides(self, x, y, t):
        g = geodesic_between(self.f.manifold, Point(tuple(x)), Point(tuple(y)))
        h = self.step

        def derivative(t0):
            return (self.f.value(curve_point(g, t0 + h)) - self.f.value(curve_point(g, t0 - h))) / (2 * h)

        return -abs(derivative(0.0) - derivative(1.0)), -self.gap

    def skipped(self, X, Y):
        return np.all(X == Y, axis=1)


def audit_endpoint_derivatives(f: FunctionOnManifold, phi: Bifunction, region: Region,
                               plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None,
                               probe_plan: Optional[ProbePlan]=None) -> CheckReport:
    '''
    For strictly geodesic φ-convex f and antisymmetric φ, the derivatives of f along α_xy at the
    two ends differ for x ≠ y.
    '''
    same_manifold(f, region)
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()

    antisymmetric = probe(phi, BifunctionProperty.ANTISYMMETRIC, probe_plan)
    if not antisymmetric.holds:
        report = hypothesis_failed('endpoint_derivatives', f'{phi.name} is not antisymmetric')
        report.probes.append(antisymmetric)
        return report

    with critical_logger(logger):
        strict = check_geodesic_phi_convex(f, phi, region, plan, tol, strict=True)
    if strict.status is not CheckStatus.PASS:
        return hypothesis_failed('endpoint_derivatives', 'f is not strictly geodesic φ-convex', strict)

    problem = geodesic_problem(EndpointDerivativeGap(f, tol.fd_step, tol.fd), region, plan,
                               tol, ts=np.array([0.0]))
    problem.thresholds = Thresholds(tolerance=0.0)

    try:
        result = problem.sweep()
    except StencilOutOfDomain as e:
        return CheckReport(check='endpoint_derivatives', status=CheckStatus.INCONCLUSIVE,
                           notes=[m for m in (str(e), e.extra_message) if m])

    report = sweep_report('endpoint_derivatives', result, problem.notes)
    report.probes.append(antisymmetric)
    return report
