'''
Checks of functions on real intervals and boxes in ℝⁿ: φ-convexity, the slope inequality, the
mean-value and three-point audits, the continuity bound, and φ-preinvexity.
'''
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from geoconvex.bifunction import Bifunction
from geoconvex.checker.engine import (hypothesis_failed, PairInequality, SweepProblem,
                                      sweep_report, Thresholds)
from geoconvex.checker.function import RealFunction
from geoconvex.exceptions import GridTooCoarse, InvalidCheckArguments, InvalidRegion
from geoconvex.expr import compose, Expression, parse
from geoconvex.manifold import FactorKind
from geoconvex.models import CheckReport, CheckStatus, SamplingPlan, Tolerances, Violation
from geoconvex.utils import worst_index


logger = logging.getLogger('geoconvex')


Box = Sequence[Tuple[float, float]]


def box_grid(box: Box, plan: SamplingPlan) -> Tuple[np.ndarray, np.ndarray]:
    '''
    Tensor-product grid over a box in ℝⁿ, first coordinate varying slowest.

    Returns:
        Points of shape (N, n), and the grid spacing per coordinate
    '''
    grids, cells = [], []
    for i, (lower, upper) in enumerate(box):
        if not lower < upper:
            raise InvalidRegion(f'interval [{lower}, {upper}] is empty')
        count = plan.count_for(i, FactorKind.LINE)
        if count < 2:
            raise InvalidCheckArguments('grid', f'coordinate {i + 1} needs at least 2 grid points')
        grids.append(np.linspace(lower, upper, count))
        cells.append((upper - lower) / (count - 1))

    mesh = np.meshgrid(*grids, indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=-1), np.array(cells)


def box_clip(box: Box):
    lower = np.array([b[0] for b in box], dtype=float)
    upper = np.array([b[1] for b in box], dtype=float)
    return lambda coords: np.clip(coords, lower, upper)


class IntervalPhiConvexity(PairInequality):
    'f(tx + (1−t)y) ≤ f(y) + tφ(f(x), f(y))'
    name = 'phi_convex_interval'

    def __init__(self, f: RealFunction, phi: Bifunction):
        self.f = f
        self.phi = phi

    def sides(self, X, Y, T):
        x, y = X[:, :1], Y[:, :1]
        lhs = self.f.values(T * x + (1 - T) * y)
        fx, fy = self.f.values(x), self.f.values(y)
        rhs = fy + T * self.phi(fx, fy)
        return lhs, np.broadcast_to(rhs, lhs.shape)

    def scalar_sides(self, x, y, t):
        fx, fy = self.f.value(x[0]), self.f.value(y[0])
        return self.f.value(t * x[0] + (1 - t) * y[0]), fy + t * self.phi.value(fx, fy)


def interval_problem(f: RealFunction, phi: Bifunction, interval: Tuple[float, float],
                     plan: SamplingPlan, tol: Tolerances, strict: bool=False) -> SweepProblem:
    box = [tuple(interval)]
    points, cells = box_grid(box, plan)
    return SweepProblem(
        ineq=IntervalPhiConvexity(f, phi),
        points=points,
        ts=plan.t_grid(),
        thresholds=Thresholds.from_tolerances(tol, strict=strict),
        clip=box_clip(box),
        cells=cells,
    )


def check_phi_convex_interval(f: RealFunction, phi: Bifunction, interval: Tuple[float, float],
                              plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None,
                              strict: bool=False) -> CheckReport:
    '''
    Sampled check of f(tx + (1−t)y) ≤ f(y) + tφ(f(x), f(y)) on an interval

    Params:
        f:         Function of one variable
        phi:       Bifunction
        interval:  (a, b) with a < b
        plan:      Endpoint and t grids
        tol:       Tolerances
        strict:    Require strict inequality at interior t for x ≠ y
    '''
    problem = interval_problem(f, phi, interval, plan or SamplingPlan(), tol or Tolerances(), strict)
    return sweep_report('phi_convex_interval', problem.sweep())


def check_slope_inequality(f: RealFunction, phi: Bifunction, interval: Tuple[float, float],
                           plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None,
                           gap: float=0.0) -> CheckReport:
    '''
    Sampled check of (f(x₂) − f(x))/(x₂ − x) ≥ φ(f(x₁), f(x₂))/(x₁ − x₂) over grid triples
    x₁ < x < x₂ whose consecutive gaps are at least `gap`.

    The witness maps x₁ to x, x₂ to y, and the middle point to t = (x − x₁)/(x₂ − x₁).
    '''
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()

    grid = box_grid([tuple(interval)], plan)[0][:, 0]
    I, J, K = np.meshgrid(grid, grid, grid, indexing='ij')
    usable = (J - I >= max(gap, 0)) & (K - J >= max(gap, 0)) & (I < J) & (J < K)
    if not usable.any():
        raise GridTooCoarse(gap)

    x1, x, x2 = I[usable], J[usable], K[usable]
    f1, fm, f2 = f.values(x1), f.values(x), f.values(x2)

    lhs = phi(f1, f2) / (x1 - x2)
    rhs = (f2 - fm) / (x2 - x)
    margin = lhs - rhs

    ts = (x - x1) / (x2 - x1)
    i = worst_index(margin, np.stack([x1, x2, ts], axis=-1))

    report = CheckReport(
        check='slope_inequality',
        status=CheckStatus.PASS,
        samples=int(len(margin)),
        worst_margin=float(margin[i]),
    )

    if margin[i] > tol.closed_form:
        a, m, b = float(x1[i]), float(x[i]), float(x2[i])
        fa, fb = f.value(a), f.value(b)
        lhs_s = phi.value(fa, fb) / (a - b)
        rhs_s = (fb - f.value(m)) / (b - m)
        if lhs_s - rhs_s > tol.closed_form:
            report.status = CheckStatus.VIOLATED
            report.violation = Violation(
                x=[a], y=[b], t=float(ts[i]), lhs=lhs_s, rhs=rhs_s, margin=lhs_s - rhs_s,
                threshold=tol.closed_form,
            )
        else:
            report.status = CheckStatus.INCONCLUSIVE
            report.notes.append('worst sample did not re-validate on the scalar evaluation path')
    else:
        report.notes.append('passes on samples only; this is not a proof')

    return report


def audit_mean_value(f: RealFunction, phi: Bifunction, x1: float, x2: float,
                     plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None) -> CheckReport:
    '''
    Search the interior of (x₁, x₂) for ξ, η satisfying

        f′(ξ) ≥ [φ(f(x₁), f(x₂)) / (f(x₁) − f(x₂))]·f′(η) ≥ f′(η)

    This is an existence claim: finding a pair confirms it on samples, not finding one is
    inconclusive. The chain is only meaningful when f(x₁) ≠ f(x₂).
    '''
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()

    if not x1 < x2:
        raise InvalidCheckArguments('mean_value', 'x1 < x2 is required')

    f1, f2 = f.value(x1), f.value(x2)
    if abs(f1 - f2) <= tol.closed_form:
        return hypothesis_failed('mean_value', f'f(x1) = f(x2) = {f1:.6g}; the ratio is undefined')

    ratio = phi.value(f1, f2) / (f1 - f2)

    interior = plan.interval_grid(x1, x2)[1:-1]
    if len(interior) == 0:
        raise InvalidCheckArguments('mean_value', 'the grid has no interior points')

    d = f.derivatives(interior, step=tol.fd_step)

    XI, ETA = np.meshgrid(interior, interior, indexing='ij')
    DXI, DETA = np.meshgrid(d, d, indexing='ij')

    # smallest slack in either link of the chain; a pair is found when it clears −τ_fd
    slack = np.minimum(DXI - ratio * DETA, ratio * DETA - DETA)
    i = worst_index(slack.ravel(), np.stack([XI.ravel(), ETA.ravel()], axis=-1))

    report = CheckReport(
        check='mean_value',
        status=CheckStatus.INCONCLUSIVE,
        samples=int(slack.size),
        measurements={'ratio': ratio},
    )

    best = float(slack.ravel()[i])
    if best >= -tol.fd:
        report.status = CheckStatus.PASS
        report.measurements.update({
            'xi': float(XI.ravel()[i]),
            'eta': float(ETA.ravel()[i]),
            'slack': best,
        })
        report.notes.append('chain satisfied at a sampled (ξ, η)')
    else:
        report.notes.append(
            'no sampled (ξ, η) satisfies the chain; existence claims cannot be falsified by sampling'
        )
    return report


def audit_three_point(f: RealFunction, phi: Bifunction, x: float, y: float, z: float,
                      tol: Optional[Tolerances]=None) -> CheckReport:
    '''
    For x < y < z evaluate three statements with P = φ(f(x), f(y)) + φ(f(y), f(z)):

      intermediate:  f′(y)(x − y) + f′(z)(y − z) ≤ P
      displayed:     f′(y) + f′(z) ≤ P/(x − z)
      corrected:     f′(y) + f′(z) ≥ P/(x − z)

    Dividing the intermediate statement by x − z < 0 reverses it, so only the intermediate and
    corrected statements follow from φ-convexity. The status reflects the intermediate statement.
    '''
    tol = tol or Tolerances()

    if not x < y < z:
        raise InvalidCheckArguments('three_point', 'x < y < z is required')

    dy, dz = (float(v) for v in f.derivatives([y, z], step=tol.fd_step))
    fx, fy, fz = f.value(x), f.value(y), f.value(z)
    p = phi.value(fx, fy) + phi.value(fy, fz)

    sides = {
        'intermediate': (dy * (x - y) + dz * (y - z), p),
        'displayed': (dy + dz, p / (x - z)),
        # ≥, so the sides swap
        'corrected': (p / (x - z), dy + dz),
    }

    report = CheckReport(check='three_point', status=CheckStatus.PASS, samples=1)
    for statement, (lhs, rhs) in sides.items():
        report.measurements[f'{statement}_lhs'] = lhs
        report.measurements[f'{statement}_rhs'] = rhs
        if statement != 'intermediate':
            verdict = 'violated' if lhs - rhs > tol.fd else 'holds'
            report.notes.append(f'{statement} statement {verdict} (margin {lhs - rhs:.6g})')

    lhs, rhs = sides['intermediate']
    report.worst_margin = lhs - rhs
    if lhs - rhs > tol.fd:
        report.status = CheckStatus.VIOLATED
        report.violation = Violation(
            x=[x], y=[z], t=(y - x) / (z - x), lhs=lhs, rhs=rhs, margin=lhs - rhs, threshold=tol.fd,
        )
    return report


def _ball(center: np.ndarray, radius: float, count: int) -> np.ndarray:
    'Grid points of the closed Euclidean ball about `center`'
    axes = [np.linspace(c - radius, c + radius, count) for c in center]
    points = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing='ij')], axis=-1)
    return points[np.linalg.norm(points - center, axis=1) <= radius * (1 + 1e-12)]


def check_lipschitz_bound(f: Expression, phi: Bifunction, center: Sequence[float], h: float, r: float,
                          eps: float, plan: Optional[SamplingPlan]=None,
                          tol: Optional[Tolerances]=None) -> CheckReport:
    '''
    Local Lipschitz bound of a φ-convex function: with M_φ an upper bound of φ on f(B)×f(B) for
    B = B(a, h), every x, y in the closed ball B̄(a, r) with r + ε < h satisfy

        |f(x) − f(y)| ≤ (M_φ/ε)·‖x − y‖

    M_φ is estimated from samples of the closure of B, whose supremum it shares for continuous f.
    The variables of `f` are the coordinates, in declared order.
    '''
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()

    center_ = np.atleast_1d(np.asarray(center, dtype=float))
    names = f.variables or ('x',)
    if len(names) != len(center_):
        raise InvalidCheckArguments('lipschitz_bound', f'center needs {len(names)} coordinates')
    if not (eps > 0 and r > 0 and r + eps < h):
        raise InvalidCheckArguments('lipschitz_bound', 'need r > 0, eps > 0 and r + eps < h')

    def values(points):
        env = {n: points[:, i] for i, n in enumerate(names)}
        return np.broadcast_to(Expression(f.root, names).evaluate_array(env), points.shape[:1])

    count = plan.count_for(0, FactorKind.LINE)
    outer = values(_ball(center_, h, count))
    U, V = np.meshgrid(outer, outer, indexing='ij')
    m_phi = float(np.max(phi(U, V)))
    # a non-positive bound of φ leaves only constant f
    k = max(m_phi, 0.0) / eps

    inner = _ball(center_, r, count)
    fi = values(inner)
    i_idx, j_idx = np.nonzero(~np.eye(len(inner), dtype=bool))
    distance = np.linalg.norm(inner[i_idx] - inner[j_idx], axis=1)
    change = np.abs(fi[i_idx] - fi[j_idx])

    margin = change - k * distance
    quotient = change / distance
    w = worst_index(margin, np.concatenate([inner[i_idx], inner[j_idx]], axis=1))

    report = CheckReport(
        check='lipschitz_bound',
        status=CheckStatus.PASS,
        samples=int(len(margin)),
        worst_margin=float(margin[w]),
        measurements={'M_phi': m_phi, 'K': k, 'max_quotient': float(np.max(quotient))},
    )
    if m_phi <= 0:
        report.notes.append(f'estimated M_phi = {m_phi:.6g} is not positive; f must be constant on the ball')

    if margin[w] > tol.closed_form:
        report.status = CheckStatus.VIOLATED
        report.violation = Violation(
            x=[float(v) for v in inner[i_idx[w]]], y=[float(v) for v in inner[j_idx[w]]], t=0.0,
            lhs=float(change[w]), rhs=float(k * distance[w]), margin=float(margin[w]),
            threshold=tol.closed_form,
        )
    else:
        report.notes.append('passes on samples only; this is not a proof')
    return report


def point_names(n: int) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    '''
    Variable names of the two points of a displacement map η(x, y): x and y on the line, else
    x1…xn and y1…yn.
    '''
    if n == 1:
        return ('x',), ('y',)
    return tuple(f'x{i}' for i in range(1, n + 1)), tuple(f'y{i}' for i in range(1, n + 1))


class DisplacementInequality(PairInequality):
    'f(y + tη(x, y)) ≤ f(y) + tφ(f(x), f(y)) on ℝⁿ'
    name = 'phi_preinvex'

    def __init__(self, f: Expression, eta: Sequence[Expression], phi: Bifunction):
        self.f = f
        self.eta = list(eta)
        self.phi = phi
        self.xs, self.ys = point_names(len(self.eta))

    def _f(self, coords: np.ndarray) -> np.ndarray:
        return self.f.evaluate_array({n: coords[..., i] for i, n in enumerate(self.xs)})

    def displaced(self, X: np.ndarray, Y: np.ndarray, T: np.ndarray) -> np.ndarray:
        'y + tη(x, y), shape (P, K, n)'
        env = {**{n: X[:, i] for i, n in enumerate(self.xs)}, **{n: Y[:, i] for i, n in enumerate(self.ys)}}
        E = np.stack([np.broadcast_to(e.evaluate_array(env), (len(X),)) for e in self.eta], axis=-1)
        return Y[:, None, :] + T[..., None] * E[:, None, :]

    def sides(self, X, Y, T):
        lhs = self._f(self.displaced(X, Y, T))
        fx, fy = self._f(X)[:, None], self._f(Y)[:, None]
        rhs = fy + T * self.phi(fx, fy)
        return lhs, np.broadcast_to(rhs, lhs.shape)

    def scalar_sides(self, x, y, t):
        binding = {**dict(zip(self.xs, x)), **dict(zip(self.ys, y))}
        z = [b + t * e.evaluate(binding) for b, e in zip(y, self.eta)]
        fx = self.f.evaluate(dict(zip(self.xs, x)))
        fy = self.f.evaluate(dict(zip(self.xs, y)))
        return self.f.evaluate(dict(zip(self.xs, z))), fy + t * self.phi.value(fx, fy)


def preinvex_problem(f: Expression, phi: Bifunction, eta: Sequence[Expression], box: Box,
                     plan: SamplingPlan, tol: Tolerances) -> SweepProblem:
    '''
    Params:
        f:    Function over x (n = 1) or x1…xn; a one-variable f may use any variable name
        eta:  One expression per coordinate, over x, y (n = 1) or x1…xn, y1…yn
        box:  One (lower, upper) per coordinate
    '''
    if len(eta) != len(box):
        raise InvalidCheckArguments('phi_preinvex', f'η needs {len(box)} components, got {len(eta)}')

    xs, ys = point_names(len(box))
    if len(box) == 1 and len(f.variables) == 1 and f.variables != xs:
        f = compose(f, {f.variables[0]: parse(xs[0])}, xs)
    else:
        f = Expression(f.root, xs)
    eta = [Expression(e.root, xs + ys) for e in eta]

    points, cells = box_grid(box, plan)
    return SweepProblem(
        ineq=DisplacementInequality(f, eta, phi),
        points=points,
        ts=plan.t_grid(),
        thresholds=Thresholds.from_tolerances(tol),
        clip=box_clip(box),
        cells=cells,
    )


def invexity_failure(problem: SweepProblem, box: Box, tol: Tolerances) -> Optional[str]:
    '''
    Check that y + tη(x, y) stays in the box for every sampled (x, y, t). Returns a description of
    the first escaping sample, or None.
    '''
    ineq = problem.ineq
    assert isinstance(ineq, DisplacementInequality)

    lower = np.array([b[0] for b in box]) - tol.closed_form
    upper = np.array([b[1] for b in box]) + tol.closed_form
    n = len(problem.points)
    T = np.broadcast_to(problem.ts, (n, len(problem.ts)))

    for i in range(n):
        X = np.broadcast_to(problem.points[i], problem.points.shape)
        Z = ineq.displaced(X, problem.points, T)
        outside = np.any((Z < lower) | (Z > upper), axis=-1)
        if outside.any():
            j, k = (int(v[0]) for v in np.nonzero(outside))
            return (
                f'the box is not invex with respect to η: y + tη(x, y) = {Z[j, k].tolist()} leaves '
                f'it at x={problem.points[i].tolist()} y={problem.points[j].tolist()} t={T[j, k]:.6g}'
            )
    return None


def check_phi_preinvex(f: Expression, phi: Bifunction, eta: Sequence[Expression], box: Box,
                       plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None,
                       check: str='phi_preinvex') -> CheckReport:
    '''
    Sampled check of f(y + tη(x, y)) ≤ f(y) + tφ(f(x), f(y)) on a box K ⊂ ℝⁿ, after confirming on
    the same samples that K is invex with respect to η. With φ = diff this is η-preinvexity.
    '''
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()

    problem = preinvex_problem(f, phi, eta, box, plan, tol)

    failure = invexity_failure(problem, box, tol)
    if failure:
        return hypothesis_failed(check, failure)

    return sweep_report(check, problem.sweep(), ['invexity of the box held on samples'])


def g_preinvex_problem(g: RealFunction, phi: Bifunction, psi: Bifunction,
                       interval: Tuple[float, float]) -> Tuple[Expression, Bifunction, List[Expression], Box]:
    '''
    g(b + tφ(a, b)) ≤ g(b) + tψ(g(a), g(b)) is the displacement inequality with η(x, y) = φ(x, y)
    and bifunction ψ.
    '''
    eta = compose(phi.expression, {'u': parse('x'), 'v': parse('y')}, ('x', 'y'))
    return g.over('x'), psi, [eta], [tuple(interval)]


def check_g_preinvex(g: RealFunction, phi: Bifunction, psi: Bifunction, interval: Tuple[float, float],
                     plan: Optional[SamplingPlan]=None, tol: Optional[Tolerances]=None) -> CheckReport:
    '''
    Sampled check that g is G-preinvex on an interval with respect to φ and ψ:
    g(b + tφ(a, b)) ≤ g(b) + tψ(g(a), g(b)).
    '''
    f, bifunction, eta, box = g_preinvex_problem(g, phi, psi, interval)
    return check_phi_preinvex(f, bifunction, eta, box, plan, tol, check='g_preinvex')
