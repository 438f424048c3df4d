import pytest

from geoconvex.bifunction import catalog
from geoconvex.checker.falsify import falsify
from geoconvex.checker.function import RealFunction
from geoconvex.checker.geodesic import geodesic_problem, GeodesicPhiConvexity
from geoconvex.checker.interval import interval_problem
from geoconvex.manifold import Region
from geoconvex.models import CheckStatus, SamplingPlan, Tolerances


def test_falsify__helix_segment(cylinder, cube, coarse_plan):
    '''
    Ensure refinement about the worst sample of h³ on [−2, −1] × S¹ keeps a violation at least as
    large as the base sweep's
    '''
    region = Region.box(cylinder, (-2, -1), None)
    problem = geodesic_problem(GeodesicPhiConvexity(cube, catalog('diff')), region, coarse_plan, Tolerances())

    report = falsify('geodesic_phi_convex', problem, coarse_plan)

    assert report.status is CheckStatus.VIOLATED
    assert report.violation.margin >= 1.125
    assert report.violation.margin >= report.margin_history[0] - 1e-12
    assert len(report.margin_history) == 1 + coarse_plan.refine_rounds


def test_falsify__cubic_interval():
    plan = SamplingPlan()
    problem = interval_problem(RealFunction.from_text('x^3'), catalog('diff'), (-2, 0), plan, Tolerances())

    report = falsify('phi_convex_interval', problem, plan)

    assert report.status is CheckStatus.VIOLATED
    assert report.violation.margin >= 3
    assert len(report.margin_history) == 4


def test_falsify__refines_when_base_sweep_passes(cylinder, cube, coarse_plan):
    region = Region.box(cylinder, (0, 3), None)
    problem = geodesic_problem(GeodesicPhiConvexity(cube, catalog('diff')), region, coarse_plan, Tolerances())

    report = falsify('geodesic_phi_convex', problem, coarse_plan)

    assert report.status is CheckStatus.PASS
    assert len(report.margin_history) == 4
    assert max(report.margin_history) == pytest.approx(0, abs=1e-9)


def test_falsify__no_rounds(parabola):
    plan = SamplingPlan(refine_rounds=0, line_count=9)
    problem = interval_problem(parabola, catalog('diff'), (-1, 1), plan, Tolerances())

    report = falsify('phi_convex_interval', problem, plan)

    assert report.passed
    assert len(report.margin_history) == 1
