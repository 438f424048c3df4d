'''
Bifunctions φ(u, v) and sampled probes of the algebraic properties which the convexity theorems take
as hypotheses.

Probes are falsifiers: "holds-on-samples" means no sample contradicted the property, not that it
holds. Every "violated" verdict carries a witness which `witness_margin` re-evaluates on the scalar
evaluation path.
'''
import dataclasses
import enum
import logging
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional

import numpy as np

from geoconvex.exceptions import InvalidBifunction, InvalidSamplingPlan, UnknownBifunction
from geoconvex.expr import Expression, parse
from geoconvex.models import ProbePlan, ProbeReport, ProbeVerdict
from geoconvex.utils import worst_index


logger = logging.getLogger('geoconvex')


class BifunctionProperty(enum.Enum):
    NONNEG_HOMOGENEOUS = 'nonneg_homogeneous'
    ADDITIVE = 'additive'
    NONNEG_LINEAR = 'nonneg_linear'
    ANTISYMMETRIC = 'antisymmetric'
    NONDECREASING = 'nondecreasing'
    SEQ_UPPER_BOUNDED = 'seq_upper_bounded'


@dataclasses.dataclass(frozen=True)
class Bifunction:
    name: str
    expression: Expression
    declared: FrozenSet[BifunctionProperty] = dataclasses.field(default=frozenset())

    def __post_init__(self):
        if self.expression.variables != ('u', 'v'):
            raise InvalidBifunction(self.name, self.expression.variables)

    @classmethod
    def from_text(cls, name: str, text: str) -> 'Bifunction':
        return cls(name, parse(text, ('u', 'v')))

    def __call__(self, u, v) -> np.ndarray:
        'Vectorised evaluation'
        return self.expression.evaluate_array({'u': u, 'v': v})

    def value(self, u: float, v: float) -> float:
        'Scalar evaluation, independent of the vectorised path'
        return self.expression.evaluate({'u': u, 'v': v})

    def __str__(self):
        return f'{self.name}(u, v) = {self.expression}'


P = BifunctionProperty

# Declared properties follow the literature; `prod` is declared sequentially upper bounded, a claim
# the probe contradicts for negative sequences
CATALOG: Dict[str, tuple] = {
    'diff': ('u - v', {P.NONNEG_HOMOGENEOUS, P.ADDITIVE, P.NONNEG_LINEAR, P.ANTISYMMETRIC, P.SEQ_UPPER_BOUNDED}),
    'sum': ('u + v', {P.NONNEG_HOMOGENEOUS, P.ADDITIVE, P.NONNEG_LINEAR, P.NONDECREASING, P.SEQ_UPPER_BOUNDED}),
    'prod': ('u * v', {P.SEQ_UPPER_BOUNDED}),
    'cube_diff': ('u^3 - v^3', {P.ANTISYMMETRIC}),
}


def catalog(name: str) -> Bifunction:
    try:
        text, declared = CATALOG[name]
    except KeyError:
        raise UnknownBifunction(name, list(CATALOG))
    return Bifunction(name, parse(text, ('u', 'v')), frozenset(declared))


def resolve(name: str, definitions: Optional[Mapping[str, str]]=None) -> Bifunction:
    '''
    Resolve a bifunction by name, preferring definitions from a run config over the catalog.
    '''
    if definitions and name in definitions:
        return Bifunction.from_text(name, definitions[name])
    return catalog(name)


def _finish(prop: BifunctionProperty, margins: np.ndarray, columns: Dict[str, np.ndarray],
            plan: ProbePlan, notes: Optional[List[str]]=None) -> ProbeReport:
    '''
    Reduce per-sample margins to a report. A margin above tolerance is a violation. The worst
    sample is chosen deterministically, ties going to the lexicographically smallest witness.
    '''
    margins = margins.ravel()
    flat = {k: v.reshape(len(margins), -1) for k, v in columns.items()}
    keys = np.concatenate(list(flat.values()), axis=1)

    i = worst_index(margins, keys)
    worst = float(margins[i])

    report = ProbeReport(
        property=prop.value,
        verdict=ProbeVerdict.VIOLATED if worst > plan.tolerance else ProbeVerdict.HOLDS,
        samples=int(len(margins)),
        margin=worst,
        notes=list(notes or []),
    )
    if not report.holds:
        report.witness = {k: [float(x) for x in v[i]] for k, v in flat.items()}
    else:
        report.notes.append('holds on samples only; this is not a proof')

    logger.debug('Probe %s: %s (worst margin %g over %d samples)', prop.value, report.verdict.value,
                 worst, report.samples)
    return report


def probe_nonneg_homogeneous(phi: Bifunction, plan: ProbePlan) -> ProbeReport:
    'Checks |φ(λu, λv) − λφ(u, v)| ≤ τ for λ ≥ 0'
    values = plan.values()
    L, U, V = np.meshgrid(np.asarray(plan.lambdas, dtype=float), values, values, indexing='ij')
    margins = np.abs(phi(L * U, L * V) - L * phi(U, V))
    return _finish(P.NONNEG_HOMOGENEOUS, margins, {'lambda': L, 'u': U, 'v': V}, plan)


def probe_additive(phi: Bifunction, plan: ProbePlan) -> ProbeReport:
    'Checks |φ(u₁+u₂, v₁+v₂) − φ(u₁, v₁) − φ(u₂, v₂)| ≤ τ'
    values = plan.values()
    U1, V1, U2, V2 = np.meshgrid(values, values, values, values, indexing='ij')
    margins = np.abs(phi(U1 + U2, V1 + V2) - phi(U1, V1) - phi(U2, V2))
    return _finish(P.ADDITIVE, margins, {'u1': U1, 'v1': V1, 'u2': U2, 'v2': V2}, plan)


def probe_nonneg_linear(phi: Bifunction, plan: ProbePlan) -> ProbeReport:
    '''
    Nonnegatively linear means both nonnegatively homogeneous and additive, on the same samples.
    '''
    homogeneous = probe_nonneg_homogeneous(phi, plan)
    additive = probe_additive(phi, plan)

    for component in (homogeneous, additive):
        if not component.holds:
            return dataclasses.replace(
                component,
                property=P.NONNEG_LINEAR.value,
                samples=homogeneous.samples + additive.samples,
                notes=[f'{component.property} probe violated'],
            )

    return ProbeReport(
        property=P.NONNEG_LINEAR.value,
        verdict=ProbeVerdict.HOLDS,
        samples=homogeneous.samples + additive.samples,
        margin=max(homogeneous.margin, additive.margin),
        notes=['holds on samples only; this is not a proof'],
    )


def probe_antisymmetric(phi: Bifunction, plan: ProbePlan) -> ProbeReport:
    'Checks |φ(u, v) + φ(v, u)| ≤ τ'
    values = plan.values()
    U, V = np.meshgrid(values, values, indexing='ij')
    margins = np.abs(phi(U, V) + phi(V, U))
    return _finish(P.ANTISYMMETRIC, margins, {'u': U, 'v': V}, plan)


def probe_nondecreasing(phi: Bifunction, plan: ProbePlan) -> ProbeReport:
    'Checks φ(u₁, v₁) ≤ φ(u₂, v₂) + τ whenever u₁ ≤ u₂ and v₁ ≤ v₂'
    values = plan.values()
    U1, V1, U2, V2 = np.meshgrid(values, values, values, values, indexing='ij')
    ordered = (U1 <= U2) & (V1 <= V2)
    U1, V1, U2, V2 = U1[ordered], V1[ordered], U2[ordered], V2[ordered]

    margins = phi(U1, V1) - phi(U2, V2)
    return _finish(P.NONDECREASING, margins, {'u1': U1, 'v1': V1, 'u2': U2, 'v2': V2}, plan)


def sequence_family(plan: ProbePlan) -> np.ndarray:
    '''
    Bounded test sequences truncated to `plan.sequence_length` terms: constants, eventually
    constant (a, b, b, …), alternating (a, b, a, …) and monotone ramps from a to b.

    Returns:
        Array of shape (K, N), rows unique and sorted
    '''
    values = [float(v) for v in plan.sequence_values]
    n = plan.sequence_length
    distinct = [(a, b) for a in values for b in values if a != b]

    builders: Dict[str, Callable[[], list]] = {
        'constant': lambda: [[a] * n for a in values],
        'eventually_constant': lambda: [[a] + [b] * (n - 1) for a, b in distinct],
        'alternating': lambda: [[a if i % 2 == 0 else b for i in range(n)] for a, b in distinct],
        'monotone': lambda: [list(np.linspace(a, b, n)) for a, b in distinct],
    }

    sequences: list = []
    for kind in plan.sequence_kinds:
        if kind not in builders:
            raise InvalidSamplingPlan(f'unknown sequence kind "{kind}"')
        sequences.extend(builders[kind]())

    if not sequences:
        raise InvalidSamplingPlan('no test sequences generated')

    return np.unique(np.array(sequences, dtype=float), axis=0)


def probe_seq_upper_bounded(phi: Bifunction, plan: ProbePlan) -> ProbeReport:
    '''
    Checks sup_n φ(x_n, y_n) ≤ φ(sup x_n, sup y_n) + τ over every ordered pair of test sequences.
    '''
    S = sequence_family(plan)
    X = S[:, None, :]
    Y = S[None, :, :]

    lhs = np.max(phi(X, Y), axis=-1)
    rhs = phi(np.max(S, axis=1)[:, None], np.max(S, axis=1)[None, :])
    margins = lhs - rhs

    k = len(S)
    columns = {
        'x': np.broadcast_to(X, (k, k, S.shape[1])),
        'y': np.broadcast_to(Y, (k, k, S.shape[1])),
    }
    return _finish(P.SEQ_UPPER_BOUNDED, margins, columns, plan,
                   notes=[f'{k} test sequences, {k * k} ordered pairs'])


PROBES: Dict[BifunctionProperty, Callable[[Bifunction, ProbePlan], ProbeReport]] = {
    P.NONNEG_HOMOGENEOUS: probe_nonneg_homogeneous,
    P.ADDITIVE: probe_additive,
    P.NONNEG_LINEAR: probe_nonneg_linear,
    P.ANTISYMMETRIC: probe_antisymmetric,
    P.NONDECREASING: probe_nondecreasing,
    P.SEQ_UPPER_BOUNDED: probe_seq_upper_bounded,
}


def probe(phi: Bifunction, prop: BifunctionProperty, plan: Optional[ProbePlan]=None) -> ProbeReport:
    return PROBES[prop](phi, plan or ProbePlan())


def probe_all(phi: Bifunction, plan: Optional[ProbePlan]=None) -> List[ProbeReport]:
    plan = plan or ProbePlan()
    return [func(phi, plan) for func in PROBES.values()]


def witness_margin(phi: Bifunction, report: ProbeReport) -> float:
    '''
    Re-evaluate a probe witness with scalar evaluation. Returns the margin, which exceeds the probe
    tolerance for every genuine violation.
    '''
    w = {k: v[0] for k, v in report.witness.items() if len(v) == 1}

    if 'x' in report.witness:
        xs, ys = report.witness['x'], report.witness['y']
        lhs = max(phi.value(a, b) for a, b in zip(xs, ys))
        return lhs - phi.value(max(xs), max(ys))

    if 'lambda' in w:
        lam, u, v = w['lambda'], w['u'], w['v']
        return abs(phi.value(lam * u, lam * v) - lam * phi.value(u, v))

    if report.property == P.NONDECREASING.value:
        return phi.value(w['u1'], w['v1']) - phi.value(w['u2'], w['v2'])

    if 'u1' in w:
        return abs(phi.value(w['u1'] + w['u2'], w['v1'] + w['v2']) - phi.value(w['u1'], w['v1'])
                   - phi.value(w['u2'], w['v2']))

    return abs(phi.value(w['u'], w['v']) + phi.value(w['v'], w['u']))
