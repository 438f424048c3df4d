'''
Sampled inequality sweeps.

A `PairInequality` states lhs(x, y, t) ≤ rhs(x, y, t) for endpoint pairs (x, y) and a parameter t.
`run_sweep` evaluates it over every ordered pair of grid points and every t on the t-grid, and
reduces the margins lhs − rhs to a single worst sample. `refine` re-grids around that sample to
look for larger margins.

The reduction is deterministic: the largest excess over the threshold wins, ties going to the
lexicographically smallest (x, y, t). Witnesses are re-evaluated with `PairInequality.scalar_sides`,
which uses scalar expression evaluation and `manifold.curve_point`, never the vectorised path.
'''
import abc
import dataclasses
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from geoconvex.models import CheckReport, CheckStatus, Tolerances, Violation
from geoconvex.utils import worst_index


logger = logging.getLogger('geoconvex')


# Points per dimension of each local refinement grid
REFINE_POINTS = 5


class PairInequality(abc.ABC):
    '''
    lhs(x, y, t) ≤ rhs(x, y, t), evaluated in bulk by `sides` and one sample at a time by
    `scalar_sides`.
    '''
    #: Short identifier used in report notes
    name: str = ''
    #: Describes the pairs left out by `skipped`
    skip_reason: str = 'antipodal pairs'

    @abc.abstractmethod
    def sides(self, X: np.ndarray, Y: np.ndarray, T: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        '''
        Params:
            X:  Start points, shape (P, d)
            Y:  End points, shape (P, d)
            T:  Parameters, shape (P, K)
        Returns:
            (lhs, rhs), each of shape (P, K)
        '''

    @abc.abstractmethod
    def scalar_sides(self, x: Sequence[float], y: Sequence[float], t: float) -> Tuple[float, float]:
        'Fresh evaluation of a single sample'

    def skipped(self, X: np.ndarray, Y: np.ndarray) -> Optional[np.ndarray]:  # pylint: disable=unused-argument
        'Optional boolean mask of shape (P,) of pairs to leave out of the sweep'
        return None

    def degenerate(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        'Boolean mask of shape (P,) of pairs treated as x = y'
        return np.all(X == Y, axis=1)


@dataclasses.dataclass
class Thresholds:
    '''
    Violation thresholds on the margin lhs − rhs. Strict inequalities use −strict at interior t for
    distinct endpoints, and `tolerance` elsewhere.
    '''
    tolerance: float
    strict: Optional[float] = None

    @classmethod
    def from_tolerances(cls, tol: Tolerances, strict: bool=False, fd: bool=False) -> 'Thresholds':
        return cls(tolerance=tol.fd if fd else tol.closed_form, strict=tol.strict if strict else None)

    def array(self, T: np.ndarray, distinct: np.ndarray) -> np.ndarray:
        threshold = np.full(T.shape, self.tolerance)
        if self.strict is not None:
            interior = (T > 0) & (T < 1) & distinct[:, None]
            threshold = np.where(interior, -self.strict, threshold)
        return threshold

    def scalar(self, t: float, distinct: bool) -> float:
        if self.strict is not None and 0 < t < 1 and distinct:
            return -self.strict
        return self.tolerance


@dataclasses.dataclass
class Sample:
    x: Tuple[float, ...]
    y: Tuple[float, ...]
    t: float
    margin: float
    excess: float

    @property
    def key(self) -> tuple:
        return (*self.x, *self.y, self.t)

    def beats(self, other: Optional['Sample']) -> bool:
        if other is None:
            return True
        return self.excess > other.excess or (self.excess == other.excess and self.key < other.key)


@dataclasses.dataclass
class SweepResult:
    samples: int = 0
    worst_margin: Optional[float] = None
    worst: Optional[Sample] = None
    pathologies: int = 0
    skipped_pairs: int = 0
    skip_reason: str = ''
    violation: Optional[Violation] = None
    unsound: bool = False
    margin_history: List[float] = dataclasses.field(default_factory=list)

    @property
    def violated(self) -> bool:
        return self.violation is not None


def _evaluate_batch(ineq: PairInequality, X: np.ndarray, Y: np.ndarray, T: np.ndarray,
                    thresholds: Thresholds):
    '''
    Evaluate one batch. Degenerate samples with x = y whose margin exceeds the tolerance are
    pathologies of φ (φ(c, c) < 0) and are excluded from the counts.
    '''
    lhs, rhs = ineq.sides(X, Y, T)
    margin = lhs - rhs

    distinct = ~ineq.degenerate(X, Y)
    excess = margin - thresholds.array(T, distinct)

    skip = ineq.skipped(X, Y)
    kept = np.ones(len(X), dtype=bool) if skip is None else ~skip

    pathology = (~distinct & kept)[:, None] & (margin > thresholds.tolerance)
    valid = kept[:, None] & ~pathology

    return margin, excess, valid, int(pathology.sum())


def _best_in_batch(X, Y, T, margin, excess, valid) -> Optional[Sample]:
    if not valid.any():
        return None

    rows, cols = np.nonzero(valid)
    flat_excess = excess[rows, cols]

    keys = np.concatenate([X[rows], Y[rows], T[rows, cols][:, None]], axis=1)
    i = worst_index(flat_excess, keys)
    r, c = rows[i], cols[i]

    return Sample(
        x=tuple(float(v) for v in X[r]),
        y=tuple(float(v) for v in Y[r]),
        t=float(T[r, c]),
        margin=float(margin[r, c]),
        excess=float(flat_excess[i]),
    )


def run_sweep(ineq: PairInequality, points: np.ndarray, ts: np.ndarray,
              thresholds: Thresholds) -> SweepResult:
    '''
    Evaluate `ineq` on every ordered pair of `points` (shape (N, d)) and every t in `ts`.
    '''
    result = SweepResult(skip_reason=ineq.skip_reason)
    n = len(points)
    T = np.broadcast_to(np.asarray(ts, dtype=float), (n, len(ts)))

    for i in range(n):
        X = np.broadcast_to(points[i], points.shape)
        Y = points

        margin, excess, valid, pathologies = _evaluate_batch(ineq, X, Y, T, thresholds)
        result.pathologies += pathologies

        skip = ineq.skipped(X, Y)
        if skip is not None:
            result.skipped_pairs += int(skip.sum())

        if not valid.any():
            continue

        result.samples += int(valid.sum())
        top = float(margin[valid].max())
        result.worst_margin = top if result.worst_margin is None else max(result.worst_margin, top)

        best = _best_in_batch(X, Y, T, margin, excess, valid)
        if best and best.beats(result.worst):
            result.worst = best

    if result.worst_margin is not None:
        result.margin_history.append(result.worst_margin)

    _confirm(ineq, result, thresholds)
    return result


def _confirm(ineq: PairInequality, result: SweepResult, thresholds: Thresholds):
    '''
    Turn the worst sample into a Violation when it exceeds its threshold, re-evaluating it on the
    scalar path first.
    '''
    worst = result.worst
    if worst is None or worst.excess <= 0:
        return

    lhs, rhs = ineq.scalar_sides(worst.x, worst.y, worst.t)
    margin = lhs - rhs
    threshold = thresholds.scalar(
        worst.t, not ineq.degenerate(np.array([worst.x]), np.array([worst.y]))[0]
    )

    if margin > threshold:
        result.violation = Violation(
            x=list(worst.x), y=list(worst.y), t=worst.t,
            lhs=lhs, rhs=rhs, margin=margin, threshold=threshold,
        )
    else:
        logger.warning('Witness at x=%s y=%s t=%s did not re-validate (margin %g)',
                       worst.x, worst.y, worst.t, margin)
        result.unsound = True


@dataclasses.dataclass
class SweepProblem:
    '''
    Everything needed to sweep an inequality and refine around its worst sample.

    `clip` maps an array of points (shape (M, d)) back into the sampled domain and `cells` gives
    the grid spacing per coordinate.
    '''
    ineq: PairInequality
    points: np.ndarray
    ts: np.ndarray
    thresholds: Thresholds
    clip: Callable[[np.ndarray], np.ndarray]
    cells: np.ndarray
    notes: List[str] = dataclasses.field(default_factory=list)

    def sweep(self) -> SweepResult:
        return run_sweep(self.ineq, self.points, self.ts, self.thresholds)


def refine(problem: SweepProblem, result: SweepResult, rounds: int, zoom: float) -> SweepResult:
    '''
    Local re-gridding in (x, y, t) around the worst sample. Each round samples REFINE_POINTS values
    per coordinate within the current half-widths, then shrinks the half-widths by `zoom`. The
    maximal margin of each round is appended to `margin_history`.
    '''
    if result.worst is None:
        return result

    d = problem.points.shape[1]
    t_cell = 1.0 / max(len(problem.ts) - 1, 1)
    widths = np.concatenate([problem.cells, problem.cells, [t_cell]]).astype(float)

    for round_ in range(1, rounds + 1):
        center = np.array(result.worst.key, dtype=float)
        axes = [np.linspace(c - w, c + w, REFINE_POINTS) for c, w in zip(center, widths)]
        mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing='ij')], axis=-1)

        X = problem.clip(mesh[:, :d])
        Y = problem.clip(mesh[:, d:2 * d])
        T = np.clip(mesh[:, -1:], 0.0, 1.0)

        margin, excess, valid, _ = _evaluate_batch(problem.ineq, X, Y, T, problem.thresholds)
        if valid.any():
            result.margin_history.append(float(margin[valid].max()))
            best = _best_in_batch(X, Y, T, margin, excess, valid)
            if best and best.beats(result.worst):
                result.worst = best
                result.worst_margin = max(result.worst_margin or best.margin, best.margin)

        logger.debug('Refinement round %d: worst margin %s at %s', round_, result.worst.margin,
                     result.worst.key)
        widths = widths / zoom

    result.violation = None
    result.unsound = False
    _confirm(problem.ineq, result, problem.thresholds)
    return result


def sweep_report(check: str, result: SweepResult, notes: Optional[List[str]]=None) -> CheckReport:
    report = CheckReport(
        check=check,
        status=CheckStatus.VIOLATED if result.violated else CheckStatus.PASS,
        samples=result.samples,
        worst_margin=result.worst_margin,
        violation=result.violation,
        notes=list(notes or []),
        margin_history=list(result.margin_history) if len(result.margin_history) > 1 else [],
    )

    if result.pathologies:
        report.notes.append(
            f'{result.pathologies} samples with x = y exceed the tolerance because φ(c, c) < 0; '
            'excluded from the verdict'
        )
    if result.skipped_pairs:
        report.notes.append(f'{result.skipped_pairs} {result.skip_reason} skipped')
    if result.unsound:
        report.status = CheckStatus.INCONCLUSIVE
        report.notes.append('worst sample did not re-validate on the scalar evaluation path')
    if report.status is CheckStatus.PASS:
        report.notes.append('passes on samples only; this is not a proof')

    return report


def hypothesis_failed(check: str, reason: str, evidence: Optional[CheckReport]=None) -> CheckReport:
    '''
    Report for a theorem check whose hypotheses did not hold on samples. The conclusion is not
    tested.
    '''
    report = CheckReport(check=check, status=CheckStatus.HYPOTHESIS_FAILED, notes=[reason])
    if evidence is not None:
        report.notes.append(f'hypothesis check "{evidence.check}" was {evidence.status.value}')
        report.violation = None
        report.measurements = dict(evidence.measurements)
        if evidence.violation:
            v = evidence.violation
            report.notes.append(f'hypothesis witness x={v.x} y={v.y} t={v.t} margin={v.margin:.6g}')
    return report
