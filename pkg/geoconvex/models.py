'''
Dataclasses for sampling plans, tolerances, check reports and run configuration.
'''
from dataclasses import dataclass, field
import enum
import json
import logging
from typing import Any, Dict, List, Optional

import numpy as np

from geoconvex.exceptions import InvalidSamplingPlan
from geoconvex.manifold import Factor, FactorKind, RegionFactor
from geoconvex.utils.serializer import DataclassSerializer


logger = logging.getLogger('geoconvex')


@dataclass
class SamplingPlan(DataclassSerializer):
    '''
    Grids for endpoints and the geodesic parameter t.

    `counts` gives one grid count per manifold factor; when empty, line factors use `line_count` and
    circle factors `circle_count`.
    '''
    counts: List[int] = field(default_factory=list)
    line_count: int = field(default=33)
    circle_count: int = field(default=16)
    t_count: int = field(default=17)
    seed: int = field(default=0)
    jitter: bool = field(default=False)
    refine_rounds: int = field(default=3)
    zoom: float = field(default=10.0)

    def __post_init__(self):
        if self.t_count < 2:
            raise InvalidSamplingPlan('t_count must be at least 2, so the t-grid includes 0 and 1')
        if self.refine_rounds < 0:
            raise InvalidSamplingPlan('refine_rounds must be non-negative')
        if self.zoom <= 1:
            raise InvalidSamplingPlan('zoom must be greater than 1')
        if any(c < 0 for c in self.counts):
            raise InvalidSamplingPlan('grid counts must be non-negative')

    def count_for(self, index: int, kind: FactorKind) -> int:
        if self.counts:
            if index >= len(self.counts):
                raise InvalidSamplingPlan(f'no grid count given for factor {index + 1}')
            return self.counts[index]
        return self.line_count if kind is FactorKind.LINE else self.circle_count

    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.t_count)

    def interval_grid(self, lower: float, upper: float) -> np.ndarray:
        'Grid on a real interval, using the first count'
        count = self.counts[0] if self.counts else self.line_count
        if count < 2:
            raise InvalidSamplingPlan('interval grids need at least 2 points')
        return np.linspace(lower, upper, count)

    def merged(self, overrides: Optional[Dict[str, Any]]) -> 'SamplingPlan':
        'Return a copy with the fields in `overrides` replaced'
        if not overrides:
            return self
        return SamplingPlan.deserialize({**self.serialize(), **overrides})


@dataclass
class Tolerances(DataclassSerializer):
    closed_form: float = field(default=1e-9)
    fd: float = field(default=1e-4)
    fd_step: float = field(default=1e-5)
    strict: float = field(default=1e-9)
    identity: float = field(default=1e-9)

    def merged(self, overrides: Optional[Dict[str, Any]]) -> 'Tolerances':
        if not overrides:
            return self
        return Tolerances.deserialize({**self.serialize(), **overrides})


@dataclass
class ProbePlan(DataclassSerializer):
    '''
    Samples for bifunction property probes. Sequence probes build test sequences of length
    `sequence_length` from `sequence_values`, of the kinds named in `sequence_kinds`.
    '''
    lower: float = field(default=-4.0)
    upper: float = field(default=4.0)
    count: int = field(default=17)
    lambdas: List[float] = field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0, 4.0])
    sequence_values: List[float] = field(default_factory=lambda: [float(v) for v in range(-4, 5)])
    sequence_kinds: List[str] = field(
        default_factory=lambda: ['constant', 'eventually_constant', 'alternating', 'monotone']
    )
    sequence_length: int = field(default=8)
    tolerance: float = field(default=1e-9)

    def __post_init__(self):
        if self.count < 2:
            raise InvalidSamplingPlan('probe grids need at least 2 points')
        if any(lam < 0 for lam in self.lambdas):
            raise InvalidSamplingPlan('homogeneity factors must be non-negative')
        if self.sequence_length < 1:
            raise InvalidSamplingPlan('sequence_length must be positive')

    def values(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.count)


class CheckStatus(enum.Enum):
    PASS = 'pass-on-samples'
    VIOLATED = 'violated'
    HYPOTHESIS_FAILED = 'hypothesis-failed'
    INCONCLUSIVE = 'inconclusive'


class Expectation(enum.Enum):
    PASS = 'pass'
    VIOLATED = 'violated'
    HYPOTHESIS_FAILED = 'hypothesis-failed'
    INCONCLUSIVE = 'inconclusive'
    ANY = 'any'

    def matches(self, status: CheckStatus) -> bool:
        if self is Expectation.ANY:
            return True
        if self is Expectation.PASS:
            return status is CheckStatus.PASS
        return self.value == status.value


class ProbeVerdict(enum.Enum):
    HOLDS = 'holds-on-samples'
    VIOLATED = 'violated'


@dataclass
class Violation(DataclassSerializer):
    '''
    A witness where lhs − rhs exceeded the threshold. `threshold` is the tolerance for ordinary
    checks and −τ_strict for strict ones.
    '''
    x: List[float]
    y: List[float]
    t: float
    lhs: float
    rhs: float
    margin: float
    threshold: float


@dataclass
class ProbeReport(DataclassSerializer):
    property: str
    verdict: ProbeVerdict
    samples: int
    margin: float = field(default=0.0)
    witness: Dict[str, List[float]] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.verdict is ProbeVerdict.HOLDS


@dataclass
class CheckReport(DataclassSerializer):
    check: str
    status: CheckStatus
    samples: int = field(default=0)
    worst_margin: Optional[float] = field(default=None)
    violation: Optional[Violation] = field(default=None)
    notes: List[str] = field(default_factory=list)
    measurements: Dict[str, float] = field(default_factory=dict)
    margin_history: List[float] = field(default_factory=list)
    probes: List[ProbeReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status is CheckStatus.PASS

    @property
    def violated(self) -> bool:
        return self.status is CheckStatus.VIOLATED


@dataclass
class ConstraintConfig(DataclassSerializer):
    '''
    One constraint of a set in M×ℝ: `expression ≤ level` when `bound` is unset, else
    `expression ≤ bound`.
    '''
    expression: str
    bound: Optional[float] = field(default=None)


@dataclass
class SetConfig(DataclassSerializer):
    region: str
    constraints: List[ConstraintConfig]
    level_range: float = field(default=2.0)


@dataclass
class CheckDescriptor(DataclassSerializer):
    name: str
    kind: str
    args: Dict[str, Any] = field(default_factory=dict)
    sampling: Dict[str, Any] = field(default_factory=dict)
    tolerance: Dict[str, float] = field(default_factory=dict)
    expect: Expectation = field(default=Expectation.ANY)
    falsify: bool = field(default=False)


@dataclass
class RunConfig(DataclassSerializer):
    manifold: List[Factor]
    checks: List[CheckDescriptor]
    functions: Dict[str, str] = field(default_factory=dict)
    bifunctions: Dict[str, str] = field(default_factory=dict)
    regions: Dict[str, List[RegionFactor]] = field(default_factory=dict)
    sets: Dict[str, SetConfig] = field(default_factory=dict)
    seed: int = field(default=0)
    tolerance: Dict[str, float] = field(default_factory=dict)
    sampling: Dict[str, Any] = field(default_factory=dict)
    output: Dict[str, str] = field(default_factory=dict)

    def as_json(self) -> str:
        return json.dumps(self.serialize(), indent=2, ensure_ascii=False)

    def check(self, name: str) -> Optional[CheckDescriptor]:
        return next((c for c in self.checks if c.name == name), None)


@dataclass
class UserDefaults(DataclassSerializer):
    'Defaults read from the user INI file'
    tolerance: Tolerances = field(default_factory=Tolerances)
    sampling: SamplingPlan = field(default_factory=SamplingPlan)
    threads: Optional[int] = field(default=None)


@dataclass
class CheckResult(DataclassSerializer):
    name: str
    kind: str
    expect: Expectation
    matched: bool
    report: CheckReport
    seconds: Optional[float] = field(default=None)


class RunStatus(enum.Enum):
    OK = 'ok'
    MISMATCH = 'mismatch'


@dataclass
class RunReport(DataclassSerializer):
    version: str
    config_digest: str
    seed: int
    status: RunStatus
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 0 if self.status is RunStatus.OK else 1

    def as_json(self) -> str:
        return json.dumps(self.serialize(), indent=2, ensure_ascii=False)
