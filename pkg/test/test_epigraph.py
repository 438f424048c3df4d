'''
Tests for sets in M×ℝ and the epigraph checks
'''
import pytest

from geoconvex.bifunction import catalog
from geoconvex.checker.function import FunctionOnManifold
from geoconvex.epigraph import (check_geodesic_phi_convex_set, check_intersection_closure, Constraint,
                                epigraph_contains, ProductPoint, SetSpec, sup_via_epigraph,
                                verify_epigraph_characterization)
from geoconvex.exceptions import InvalidCheckArguments, NoMemberSamples
from geoconvex.expr import parse
from geoconvex.manifold import Region
from geoconvex.models import CheckStatus, SamplingPlan, Tolerances


@pytest.fixture
def small_plan():
    return SamplingPlan(line_count=9, t_count=9)


@pytest.fixture
def square_epigraph(square_on_line, unit_interval):
    return SetSpec.epigraph(square_on_line, unit_interval)


def test_epigraph__membership(line, square_on_line, square_epigraph):
    inside = ProductPoint(line.point(0.5), 0.3)
    outside = ProductPoint(line.point(0.5), 0.2)

    assert square_epigraph.contains(inside)
    assert not square_epigraph.contains(outside)
    assert epigraph_contains(square_on_line, inside)
    assert not epigraph_contains(square_on_line, outside)


def test_epigraph__boundary_is_a_member(line, square_epigraph):
    assert square_epigraph.contains(ProductPoint(line.point(0.5), 0.25))


def test_member_samples__levels_start_at_active_bound(square_epigraph, small_plan):
    members = square_epigraph.member_samples(small_plan, Tolerances())

    assert members.shape == (9 * 5, 2)
    # the first base point is h = −1, so its levels run from f(−1) = 1 to 1 + Λ
    assert members[:5, 1].tolist() == [1.0, 1.5, 2.0, 2.5, 3.0]


def test_check_geodesic_phi_convex_set__epigraph_of_square(square_epigraph, small_plan):
    report = check_geodesic_phi_convex_set(square_epigraph, catalog('diff'), small_plan)

    assert report.status is CheckStatus.PASS
    assert report.measurements['members'] == 45


def test_check_geodesic_phi_convex_set__epigraph_of_concave_function(line, unit_interval, small_plan):
    s = SetSpec.epigraph(FunctionOnManifold.from_text(line, '-h1^2'), unit_interval)

    report = check_geodesic_phi_convex_set(s, catalog('diff'), small_plan)

    assert report.status is CheckStatus.VIOLATED
    # witnesses carry the level as the last coordinate
    assert len(report.violation.x) == 2


def test_check_geodesic_phi_convex_set__no_members(unit_interval, small_plan):
    s = SetSpec(unit_interval, (Constraint(parse('h1^2'), -1),))

    with pytest.raises(NoMemberSamples):
        check_geodesic_phi_convex_set(s, catalog('diff'), small_plan)


def test_check_geodesic_phi_convex_set__unconstrained(unit_interval, small_plan):
    report = check_geodesic_phi_convex_set(SetSpec(unit_interval), catalog('diff'), small_plan)

    assert report.passed
    assert 'no constraints: the set is the whole product A×ℝ' in report.notes


def test_verify_epigraph_characterization__verdicts_agree(square_on_line, unit_interval, small_plan):
    report = verify_epigraph_characterization(square_on_line, catalog('sum'), unit_interval, small_plan)

    assert report.status is CheckStatus.PASS
    assert report.notes == ['function and epigraph checks agree: both pass-on-samples']


@pytest.mark.parametrize('text,status', [
    ('h1^2', 'pass-on-samples'),
    ('2*h1^2 + 1', 'pass-on-samples'),
    ('h1^4', 'pass-on-samples'),
    ('-h1^2', 'violated'),
])
def test_verify_epigraph_characterization__scenarios_agree(line, unit_interval, small_plan, text, status):
    '''
    Ensure the function check and the epigraph set check reach the same verdict, whichever it is
    '''
    f = FunctionOnManifold.from_text(line, text)

    report = verify_epigraph_characterization(f, catalog('sum'), unit_interval, small_plan)

    assert report.status is CheckStatus.PASS
    assert report.notes == [f'function and epigraph checks agree: both {status}']


def test_verify_epigraph_characterization__phi_not_nondecreasing(square_on_line, unit_interval, small_plan):
    report = verify_epigraph_characterization(square_on_line, catalog('diff'), unit_interval, small_plan)

    assert report.status is CheckStatus.HYPOTHESIS_FAILED
    assert report.notes == ['diff is not non-decreasing']


def test_check_intersection_closure__epigraph_and_sublevel(square_epigraph, unit_interval, small_plan):
    half = SetSpec(unit_interval, (Constraint(parse('h1'), 0.5),))

    report = check_intersection_closure([square_epigraph, half], catalog('diff'), small_plan)

    assert report.check == 'intersection_closure'
    assert report.status is CheckStatus.PASS


def test_check_intersection_closure__regions_differ(square_epigraph, line, small_plan):
    other = SetSpec(Region.box(line, (0, 1)))

    with pytest.raises(InvalidCheckArguments):
        check_intersection_closure([square_epigraph, other], catalog('diff'), small_plan)


def test_sup_via_epigraph(line, unit_interval, small_plan):
    fs = [FunctionOnManifold.from_text(line, 'h1^2'), FunctionOnManifold.from_text(line, '2*h1^2')]

    report = sup_via_epigraph(fs, catalog('sum'), unit_interval, small_plan)

    assert report.check == 'sup_via_epigraph'
    assert report.status is CheckStatus.PASS
    assert report.measurements['identity_mismatches'] == 0


def test_sup_via_epigraph__empty_family(unit_interval):
    with pytest.raises(InvalidCheckArguments):
        sup_via_epigraph([], catalog('sum'), unit_interval)
