'''
Counterexample search by local grid refinement around the worst sample of a sweep.
'''
import logging
from typing import Optional

from geoconvex.checker.engine import refine, SweepProblem, sweep_report
from geoconvex.models import CheckReport, SamplingPlan


logger = logging.getLogger('geoconvex')


def falsify(check: str, problem: SweepProblem, plan: Optional[SamplingPlan]=None) -> CheckReport:
    '''
    Run the base sweep, then `plan.refine_rounds` rounds of local re-gridding in (x, y, t) space
    about the worst sample, shrinking by `plan.zoom` each round. Refinement also runs when the
    base sweep passes, in which case `margin_history` shows how close the search came.

    Params:
        check:    Check identifier for the report
        problem:  Sweep problem built by one of the *_problem functions
        plan:     Refinement settings
    Returns:
        CheckReport with the maximal-margin violation found, if any
    '''
    plan = plan or SamplingPlan()

    result = problem.sweep()
    logger.info('%s: base sweep worst margin %s over %d samples', check, result.worst_margin,
                result.samples)

    result = refine(problem, result, plan.refine_rounds, plan.zoom)

    report = sweep_report(check, result, problem.notes)
    report.margin_history = list(result.margin_history)
    return report
