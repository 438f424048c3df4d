'''
Dispatch of check descriptors to the checker, and assembly of run reports.

Settings are layered with the command line first, then the check descriptor, then the run config,
then the user INI file, then built-in defaults.
'''
import concurrent.futures
import dataclasses
import logging
import os
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from geoconvex import __version__
from geoconvex.bifunction import Bifunction, BifunctionProperty, probe, probe_all, resolve
from geoconvex.checker import (audit_endpoint_derivatives, audit_mean_value, audit_three_point,
                               check_composition, check_differential_criterion, check_g_preinvex,
                               check_g_preinvex_composition, check_geodesic_convex, check_geodesic_phi_convex,
                               check_lipschitz_bound, check_local_min_criterion, check_phi_convex_interval,
                               check_phi_limit, check_phi_preinvex, check_pushforward, check_slope_inequality,
                               check_sup_family, check_weighted_sum, falsify, FunctionOnManifold, RealFunction,
                               SweepProblem, verify_restriction_equivalence)
from geoconvex.checker.engine import hypothesis_failed
from geoconvex.checker.geodesic import (GeodesicChordConvexity, GeodesicPhiConvexity, geodesic_problem,
                                        same_manifold)
from geoconvex.checker.interval import g_preinvex_problem, interval_problem, invexity_failure, preinvex_problem
from geoconvex.config import config_digest, FALSIFIABLE, manifold_of, thread_cap
from geoconvex.epigraph import (check_geodesic_phi_convex_set, check_intersection_closure, Constraint, SetSpec,
                                sup_via_epigraph, verify_epigraph_characterization)
from geoconvex.exceptions import (BaseAppException, CheckNotFound, FalsifyNotSupported, InvalidPoint,
                                  InvalidSamplingPlan, ParameterOutOfRange)
from geoconvex.expr import Expression, parse
from geoconvex.manifold import geodesic_between, geodesic_point, ManifoldSpec, Region
from geoconvex.models import (CheckDescriptor, CheckReport, CheckResult, CheckStatus, Expectation, ProbePlan,
                              RunConfig, RunReport, RunStatus, SamplingPlan, Tolerances, UserDefaults,
                              Violation)


logger = logging.getLogger('geoconvex')


@dataclasses.dataclass
class RunOverrides:
    'Settings from the command line, which take precedence over everything in the run config'
    seed: Optional[int] = None
    tolerance: Dict[str, float] = dataclasses.field(default_factory=dict)
    sampling: Dict[str, Any] = dataclasses.field(default_factory=dict)
    threads: Optional[int] = None
    timings: bool = False


@dataclasses.dataclass
class CheckContext:
    '''
    One descriptor together with its resolved sampling plan and tolerances. Accessors turn the
    descriptor's arguments into checker objects; arguments were validated when the config loaded.
    '''
    config: RunConfig
    descriptor: CheckDescriptor
    defaults: UserDefaults
    overrides: RunOverrides
    plan: SamplingPlan = dataclasses.field(init=False)
    tol: Tolerances = dataclasses.field(init=False)

    def __post_init__(self):
        self.plan = self.defaults.sampling.merged(
            {**self.config.sampling, **self.descriptor.sampling, **self.overrides.sampling}
        ).merged({'seed': run_seed(self.config, self.overrides)})
        self.tol = self.defaults.tolerance.merged(
            {**self.config.tolerance, **self.descriptor.tolerance, **self.overrides.tolerance}
        )

    def derive(self, descriptor: CheckDescriptor) -> 'CheckContext':
        return CheckContext(self.config, descriptor, self.defaults, self.overrides)

    @property
    def args(self) -> Dict[str, Any]:
        return self.descriptor.args

    @property
    def probe_plan(self) -> ProbePlan:
        return ProbePlan(tolerance=self.tol.closed_form)

    def function(self, arg: str='function') -> FunctionOnManifold:
        return FunctionOnManifold.from_text(manifold_of(self.config), self.config.functions[self.args[arg]])

    def functions(self, arg: str='functions') -> List[FunctionOnManifold]:
        manifold = manifold_of(self.config)
        return [FunctionOnManifold.from_text(manifold, self.config.functions[n]) for n in self.args[arg]]

    def real(self, arg: str='function') -> RealFunction:
        return RealFunction.from_text(self.config.functions[self.args[arg]])

    def expression(self, arg: str='function') -> Expression:
        return parse(self.config.functions[self.args[arg]])

    def inline(self, arg: str) -> List[Expression]:
        'Expression texts given directly in the descriptor'
        return [parse(text) for text in self.args[arg]]

    def phi(self, arg: str='phi') -> Bifunction:
        return resolve(self.args[arg], self.config.bifunctions)

    def region(self, arg: str='region') -> Region:
        return Region(manifold_of(self.config), tuple(self.config.regions[self.args[arg]]))

    def set_spec(self, name: str) -> SetSpec:
        s = self.config.sets[name]
        region = Region(manifold_of(self.config), tuple(self.config.regions[s.region]))
        constraints = tuple(Constraint(parse(c.expression), c.bound) for c in s.constraints)
        return SetSpec(region, constraints, s.level_range)

    def number(self, arg: str, default: Optional[float]=None) -> float:
        return float(self.args.get(arg, default))

    def numbers(self, arg: str) -> List[float]:
        return [float(v) for v in self.args[arg]]

    def interval(self, arg: str='interval') -> Tuple[float, float]:
        lower, upper = self.numbers(arg)
        return lower, upper

    def box(self) -> List[Tuple[float, float]]:
        if 'box' in self.args:
            return [(float(a), float(b)) for a, b in self.args['box']]
        return [self.interval()]

    def flag(self, arg: str) -> bool:
        return bool(self.args.get(arg, False))


def run_seed(config: RunConfig, overrides: RunOverrides) -> int:
    return overrides.seed if overrides.seed is not None else config.seed


def run_probe(ctx: CheckContext) -> CheckReport:
    '''
    Probe one property when the descriptor names it, else all six. The status is violated when any
    probed property fails on its samples.
    '''
    phi = ctx.phi()
    plan = ctx.probe_plan

    if 'property' in ctx.args:
        probes = [probe(phi, BifunctionProperty(ctx.args['property']), plan)]
    else:
        probes = probe_all(phi, plan)

    report = CheckReport(
        check='probe',
        status=CheckStatus.PASS if all(p.holds for p in probes) else CheckStatus.VIOLATED,
        samples=sum(p.samples for p in probes),
        probes=probes,
        notes=[str(phi)],
    )
    for p in probes:
        if not p.holds and BifunctionProperty(p.property) in phi.declared:
            report.notes.append(f'declared property {p.property} is contradicted on samples')
    return report


def _interval_problem(ctx: CheckContext) -> SweepProblem:
    return interval_problem(ctx.real(), ctx.phi(), ctx.interval(), ctx.plan, ctx.tol, ctx.flag('strict'))


def _geodesic_phi_problem(ctx: CheckContext) -> SweepProblem:
    f, region = ctx.function(), ctx.region()
    same_manifold(f, region)
    return geodesic_problem(GeodesicPhiConvexity(f, ctx.phi()), region, ctx.plan, ctx.tol,
                            strict=ctx.flag('strict'))


def _geodesic_chord_problem(ctx: CheckContext) -> SweepProblem:
    f, region = ctx.function(), ctx.region()
    same_manifold(f, region)
    return geodesic_problem(GeodesicChordConvexity(f), region, ctx.plan, ctx.tol, strict=ctx.flag('strict'))


def _preinvex_problem(ctx: CheckContext) -> SweepProblem:
    return preinvex_problem(ctx.expression(), ctx.phi(), ctx.inline('eta'), ctx.box(), ctx.plan, ctx.tol)


def _g_preinvex_problem(ctx: CheckContext) -> SweepProblem:
    f, psi, eta, box = g_preinvex_problem(ctx.real(), ctx.phi(), ctx.phi('psi'), ctx.interval())
    return preinvex_problem(f, psi, eta, box, ctx.plan, ctx.tol)


# Sweep problems of the kinds `falsify` and `witness` can work with
PROBLEMS: Dict[str, Callable[[CheckContext], SweepProblem]] = {
    'phi_convex_interval': _interval_problem,
    'geodesic_phi_convex': _geodesic_phi_problem,
    'geodesic_convex': _geodesic_chord_problem,
    'phi_preinvex': _preinvex_problem,
    'g_preinvex': _g_preinvex_problem,
}
assert set(PROBLEMS) == set(FALSIFIABLE)

# Kinds whose sweep is meaningful only once the box is invex with respect to η
INVEXITY_GATED = ('phi_preinvex', 'g_preinvex')


def run_falsify(ctx: CheckContext) -> CheckReport:
    kind = ctx.descriptor.kind
    if kind not in PROBLEMS:
        raise FalsifyNotSupported(kind)

    problem = PROBLEMS[kind](ctx)
    if kind in INVEXITY_GATED:
        failure = invexity_failure(problem, ctx.box(), ctx.tol)
        if failure:
            return hypothesis_failed(kind, failure)

    return falsify(kind, problem, ctx.plan)


def check_witness(ctx: CheckContext) -> CheckReport:
    '''
    Re-evaluate one (x, y, t) sample of another sweep check on the scalar evaluation path, against
    that check's own threshold.
    '''
    target = ctx.config.check(ctx.args['check'])
    if target is None:
        raise CheckNotFound(ctx.args['check'])
    if target.kind not in PROBLEMS:
        raise FalsifyNotSupported(target.kind)

    problem = PROBLEMS[target.kind](ctx.derive(target))
    x, y, t = ctx.numbers('x'), ctx.numbers('y'), ctx.number('t')
    if not 0 <= t <= 1:
        raise ParameterOutOfRange(t)

    ineq = problem.ineq
    lhs, rhs = ineq.scalar_sides(x, y, t)
    margin = lhs - rhs
    threshold = problem.thresholds.scalar(t, not ineq.degenerate(np.array([x]), np.array([y]))[0])

    report = CheckReport(
        check='witness',
        status=CheckStatus.VIOLATED if margin > threshold else CheckStatus.PASS,
        samples=1,
        worst_margin=margin,
        notes=[f'witness of check "{target.name}" at x={x} y={y} t={t:.17g}'],
    )
    if margin > threshold:
        report.violation = Violation(x=x, y=y, t=t, lhs=lhs, rhs=rhs, margin=margin, threshold=threshold)
    return report


CHECKS: Dict[str, Callable[[CheckContext], CheckReport]] = {
    'phi_convex_interval': lambda c: check_phi_convex_interval(
        c.real(), c.phi(), c.interval(), c.plan, c.tol, c.flag('strict')),
    'slope_inequality': lambda c: check_slope_inequality(
        c.real(), c.phi(), c.interval(), c.plan, c.tol, c.number('gap', 0.0)),
    'geodesic_phi_convex': lambda c: check_geodesic_phi_convex(
        c.function(), c.phi(), c.region(), c.plan, c.tol, c.flag('strict')),
    'geodesic_convex': lambda c: check_geodesic_convex(
        c.function(), c.region(), c.plan, c.tol, c.flag('strict')),
    'differential_criterion': lambda c: check_differential_criterion(
        c.function(), c.phi(), c.region(), c.plan, c.tol),
    'restriction_equivalence': lambda c: verify_restriction_equivalence(
        c.function(), c.phi(), c.region(), c.plan, c.tol),
    'mean_value': lambda c: audit_mean_value(
        c.real(), c.phi(), c.number('x1'), c.number('x2'), c.plan, c.tol),
    'three_point': lambda c: audit_three_point(
        c.real(), c.phi(), c.number('x'), c.number('y'), c.number('z'), c.tol),
    'composition': lambda c: check_composition(
        c.function(), c.real('g'), c.phi(), c.region(), c.plan, c.tol, c.flag('strict')),
    'weighted_sum': lambda c: check_weighted_sum(
        c.functions(), c.numbers('weights'), c.phi(), c.region(), c.plan, c.tol, c.probe_plan),
    'pushforward': lambda c: check_pushforward(
        c.function(), c.phi(), c.inline('map'), c.inline('inverse'), c.region(), c.plan, c.tol),
    'lipschitz_bound': lambda c: check_lipschitz_bound(
        c.expression(), c.phi(), c.numbers('center'), c.number('h'), c.number('r'), c.number('eps'),
        c.plan, c.tol),
    'sup_family': lambda c: check_sup_family(
        c.functions(), c.phi(), c.region(), c.plan, c.tol, c.probe_plan),
    'local_min': lambda c: check_local_min_criterion(
        c.function(), c.phi(), c.numbers('x0'), c.region(), c.plan, c.tol, c.number('radius', 0.25)),
    'phi_limit': lambda c: check_phi_limit(
        c.function(), parse(c.args['family']), c.args['mode'], int(c.args['count']), c.phi(), c.region(),
        c.plan, c.tol),
    'endpoint_derivatives': lambda c: audit_endpoint_derivatives(
        c.function(), c.phi(), c.region(), c.plan, c.tol, c.probe_plan),
    'phi_preinvex': lambda c: check_phi_preinvex(
        c.expression(), c.phi(), c.inline('eta'), c.box(), c.plan, c.tol),
    'g_preinvex': lambda c: check_g_preinvex(
        c.real(), c.phi(), c.phi('psi'), c.interval(), c.plan, c.tol),
    'g_preinvex_composition': lambda c: check_g_preinvex_composition(
        c.function(), c.real('g'), c.phi(), c.phi('psi'), c.region(), c.plan, c.tol),
    'geodesic_phi_convex_set': lambda c: check_geodesic_phi_convex_set(
        c.set_spec(c.args['set']), c.phi(), c.plan, c.tol),
    'epigraph_characterization': lambda c: verify_epigraph_characterization(
        c.function(), c.phi(), c.region(), c.plan, c.tol, c.probe_plan, c.number('level_range', 2.0)),
    'intersection_closure': lambda c: check_intersection_closure(
        [c.set_spec(name) for name in c.args['sets']], c.phi(), c.plan, c.tol),
    'sup_via_epigraph': lambda c: sup_via_epigraph(
        c.functions(), c.phi(), c.region(), c.plan, c.tol, c.probe_plan, c.number('level_range', 2.0)),
    'probe': run_probe,
    'witness': check_witness,
}


def run_check(config: RunConfig, descriptor: CheckDescriptor, defaults: UserDefaults,
              overrides: RunOverrides) -> CheckResult:
    '''
    Run one descriptor. Errors raised while the check evaluates do not abort the run; the check is
    reported inconclusive with the error text in its notes.
    '''
    logger.info('Running check %s (%s)', descriptor.name, descriptor.kind)
    start = time.perf_counter()

    try:
        ctx = CheckContext(config, descriptor, defaults, overrides)
        if descriptor.falsify:
            report = run_falsify(ctx)
        else:
            report = CHECKS[descriptor.kind](ctx)

    except BaseAppException as e:
        logger.info('Check %s could not be evaluated: %s', descriptor.name, e.message)
        report = CheckReport(check=descriptor.kind, status=CheckStatus.INCONCLUSIVE, notes=[e.message])

    seconds = time.perf_counter() - start
    matched = descriptor.expect.matches(report.status)

    logger.info('Check %s finished: %s over %d samples', descriptor.name, report.status.value, report.samples)
    if not matched:
        logger.info('Check %s expected %s', descriptor.name, descriptor.expect.value)

    return CheckResult(
        name=descriptor.name,
        kind=descriptor.kind,
        expect=descriptor.expect,
        matched=matched,
        report=report,
        seconds=round(seconds, 6) if overrides.timings else None,
    )


def worker_count(checks: int, defaults: UserDefaults, overrides: RunOverrides) -> int:
    threads = overrides.threads or defaults.threads or os.cpu_count() or 1
    cap = thread_cap()
    if cap:
        threads = min(threads, cap)
    return max(1, min(threads, checks))


def run_checks(config: RunConfig, defaults: Optional[UserDefaults]=None,
               overrides: Optional[RunOverrides]=None, descriptors: Optional[Sequence[CheckDescriptor]]=None,
               progress: bool=False) -> RunReport:
    '''
    Run check descriptors on a worker pool. Results are reported in descriptor order, whatever the
    order the workers finish in.

    Params:
        config:       Validated run config
        defaults:     User INI defaults
        overrides:    Command line settings
        descriptors:  Descriptors to run; all of the config's checks when unset
        progress:     Show a progress bar
    '''
    defaults = defaults or UserDefaults()
    overrides = overrides or RunOverrides()
    descriptors = list(config.checks if descriptors is None else descriptors)

    results: List[Optional[CheckResult]] = [None] * len(descriptors)

    with concurrent.futures.ThreadPoolExecutor(
        max_workers=worker_count(len(descriptors), defaults, overrides)
    ) as pool:
        futures = {
            pool.submit(run_check, config, descriptor, defaults, overrides): i
            for i, descriptor in enumerate(descriptors)
        }
        with tqdm(total=len(futures), unit=' checks', disable=not progress) as pbar:
            for future in concurrent.futures.as_completed(futures):
                results[futures[future]] = future.result()
                pbar.update(1)

    checks = [r for r in results if r is not None]
    return RunReport(
        version=__version__,
        config_digest=config_digest(config),
        seed=run_seed(config, overrides),
        status=RunStatus.OK if all(r.matched for r in checks) else RunStatus.MISMATCH,
        checks=checks,
    )


def falsify_check(config: RunConfig, name: str, defaults: Optional[UserDefaults]=None,
                  overrides: Optional[RunOverrides]=None) -> RunReport:
    'Run the refinement search on the named descriptor, whatever its `falsify` setting'
    descriptor = config.check(name)
    if descriptor is None:
        raise CheckNotFound(name)
    if descriptor.kind not in PROBLEMS:
        raise FalsifyNotSupported(descriptor.kind)

    return run_checks(config, defaults, overrides, [dataclasses.replace(descriptor, falsify=True)])


def witness_config(config: RunConfig, result: CheckResult) -> Optional[RunConfig]:
    '''
    A single-witness run config which re-validates the violation of `result`: the original
    descriptor, and a `witness` check expected to be violated.
    '''
    violation = result.report.violation
    if violation is None:
        return None

    target = config.check(result.name)
    assert target is not None

    witness = CheckDescriptor(
        name=f'{target.name}-witness',
        kind='witness',
        args={'check': target.name, 'x': violation.x, 'y': violation.y, 't': violation.t},
        expect=Expectation.VIOLATED,
    )
    return dataclasses.replace(
        config,
        checks=[dataclasses.replace(target, falsify=False, expect=Expectation.ANY), witness],
        output={},
    )


def probe_config(config: Optional[RunConfig], phi: str) -> RunConfig:
    'A run config probing a single bifunction; catalog names need no config file'
    if config is None:
        config = RunConfig(manifold=list(ManifoldSpec.euclidean().factors), checks=[])
    return dataclasses.replace(
        config, checks=[CheckDescriptor(name=f'probe-{phi}', kind='probe', args={'phi': phi})]
    )


def curve_data(config: RunConfig, function: str, x: Sequence[float], y: Sequence[float], t_count: int,
               phi: str='diff', region: Optional[str]=None) -> pd.DataFrame:
    '''
    Plot-ready values along the geodesic from x to y: f(α_xy(t)), the φ bound f(x) + tφ(f(y), f(x))
    and the chord bound (1 − t)f(x) + tf(y), on a uniform t-grid including 0 and 1.
    '''
    if t_count < 2:
        raise InvalidSamplingPlan('t-count must be at least 2, so the grid includes 0 and 1')

    manifold = manifold_of(config)
    f = FunctionOnManifold.from_text(manifold, config.functions[function])
    bifunction = resolve(phi, config.bifunctions)
    start, end = manifold.point(*x), manifold.point(*y)

    if region is not None:
        bounds = Region(manifold, tuple(config.regions[region]))
        for p in (start, end):
            if not bounds.contains(p):
                raise InvalidPoint(f'{list(p.coords)} is outside region "{region}"')

    g = geodesic_between(manifold, start, end)
    fx, fy = f.value(start), f.value(end)
    ts = np.linspace(0.0, 1.0, t_count)

    return pd.DataFrame({
        't': ts,
        'lhs': [f.value(geodesic_point(g, float(t))) for t in ts],
        'rhs_phi': [fx + t * bifunction.value(fy, fx) for t in ts],
        'rhs_chord': [(1 - t) * fx + t * fy for t in ts],
    })
