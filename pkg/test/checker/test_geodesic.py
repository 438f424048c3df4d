import math

import numpy as np
import pytest

from geoconvex.bifunction import catalog
from geoconvex.checker.function import FunctionOnManifold
from geoconvex.checker.geodesic import (audit_endpoint_derivatives, check_differential_criterion,
                                        check_geodesic_convex, check_geodesic_phi_convex,
                                        check_local_min_criterion, GeodesicPhiConvexity,
                                        verify_restriction_equivalence)
from geoconvex.exceptions import InvalidCheckArguments
from geoconvex.manifold import Region
from geoconvex.models import CheckStatus, SamplingPlan


@pytest.fixture
def upper(cylinder):
    return Region.box(cylinder, (0, 3), None)


@pytest.fixture
def segment(cylinder):
    return Region.box(cylinder, (-2, -1), None)


def test_check_geodesic_phi_convex__cube_passes_on_upper_half(cube, upper, coarse_plan):
    report = check_geodesic_phi_convex(cube, catalog('diff'), upper, coarse_plan)

    assert report.status is CheckStatus.PASS
    # each of the 36 points has 9 antipodal partners
    assert report.samples == (36 * 36 - 36 * 9) * 17
    assert '324 antipodal pairs skipped' in report.notes
    assert 'passes on samples only; this is not a proof' in report.notes


def test_check_geodesic_phi_convex__whole_circle_note(cube, upper, coarse_plan):
    report = check_geodesic_phi_convex(cube, catalog('diff'), upper, coarse_plan)
    assert any(n.startswith('region includes a whole circle') for n in report.notes)


def test_check_geodesic_phi_convex__antipodal_pairs_are_not_sampled(cylinder):
    '''
    Ensure pairs through the cut locus of a whole circle are skipped and counted, never evaluated
    '''
    f = FunctionOnManifold.from_text(cylinder, 'h1^2')
    region = Region.box(cylinder, (-1, 1), None)

    report = check_geodesic_phi_convex(f, catalog('diff'), region, SamplingPlan(counts=[2, 4], t_count=3))

    assert report.status is CheckStatus.PASS
    assert report.samples == (8 * 8 - 16) * 3
    assert '16 antipodal pairs skipped' in report.notes


def test_check_geodesic_convex__antipodal_pairs_are_not_sampled(cylinder):
    f = FunctionOnManifold.from_text(cylinder, 'h1^2')
    region = Region.box(cylinder, (-1, 1), None)

    report = check_geodesic_convex(f, region, SamplingPlan(counts=[2, 4], t_count=3))

    assert report.samples == 48 * 3
    assert '16 antipodal pairs skipped' in report.notes


def test_check_geodesic_phi_convex__cube_violated_on_negative_segment(cube, segment, coarse_plan):
    '''
    Ensure h³ is caught on [−2, −1] × S¹, where it is concave along the helix
    '''
    report = check_geodesic_phi_convex(cube, catalog('diff'), segment, coarse_plan)

    assert report.status is CheckStatus.VIOLATED
    assert report.violation.margin >= 1.125
    assert report.violation.lhs - report.violation.rhs == pytest.approx(report.violation.margin)


def test_check_geodesic_phi_convex__cube_violated_on_full_interval(cube, cylinder, coarse_plan):
    region = Region.box(cylinder, (-3, 3), None)
    assert check_geodesic_phi_convex(cube, catalog('diff'), region, coarse_plan).violated


def test_check_geodesic_phi_convex__region_on_other_manifold(cube, unit_interval):
    with pytest.raises(InvalidCheckArguments):
        check_geodesic_phi_convex(cube, catalog('diff'), unit_interval)


def test_check_geodesic_convex__matches_diff(cube, upper, segment, coarse_plan):
    assert check_geodesic_convex(cube, upper, coarse_plan).passed
    assert check_geodesic_convex(cube, segment, coarse_plan).violated


def test_check_geodesic_phi_convex__arc_region(cylinder, coarse_plan):
    '''
    Ensure a function which depends on the angle is sampled along the shorter arc
    '''
    f = FunctionOnManifold.from_text(cylinder, 'h1^2 + th1^2')
    region = Region.box(cylinder, (-1, 1), (0.5, 2.5))

    report = check_geodesic_phi_convex(f, catalog('diff'), region, coarse_plan)

    assert report.status is CheckStatus.PASS
    assert not any(n.startswith('region includes a whole circle') for n in report.notes)


def test_check_differential_criterion__square(square_on_line, unit_interval):
    report = check_differential_criterion(square_on_line, catalog('diff'), unit_interval)

    assert report.status is CheckStatus.PASS
    assert report.samples == 33 * 33


def test_check_differential_criterion__concave(line, unit_interval):
    f = FunctionOnManifold.from_text(line, '-h1^2')
    assert check_differential_criterion(f, catalog('diff'), unit_interval).violated


def test_verify_restriction_equivalence__verdicts_agree(cube, segment):
    '''
    Ensure the interval check of every restriction and the manifold check agree pair by pair
    '''
    report = verify_restriction_equivalence(cube, catalog('diff'), segment,
                                            SamplingPlan(counts=[5, 4], t_count=5))

    assert report.status is CheckStatus.PASS
    assert report.measurements['disagreements'] == 0
    assert report.measurements['violated_pairs'] > 0
    assert '100 antipodal pairs skipped' in report.notes


def test_check_local_min_criterion__minimum(cylinder, coarse_plan):
    f = FunctionOnManifold.from_text(cylinder, 'h1^2')
    region = Region.box(cylinder, (-1, 1), None)

    report = check_local_min_criterion(f, catalog('diff'), (0, 0), region, coarse_plan)

    assert report.status is CheckStatus.PASS
    assert report.worst_margin == pytest.approx(0)


def test_check_local_min_criterion__not_a_minimum(cylinder, coarse_plan):
    f = FunctionOnManifold.from_text(cylinder, 'h1^2')
    region = Region.box(cylinder, (-1, 1), None)

    report = check_local_min_criterion(f, catalog('diff'), (0.5, 0), region, coarse_plan)

    assert report.status is CheckStatus.HYPOTHESIS_FAILED
    assert report.notes[0].startswith('x0 is not a local minimum')


def test_check_local_min_criterion__boundary_point(cylinder, coarse_plan):
    f = FunctionOnManifold.from_text(cylinder, 'h1^2')
    region = Region.box(cylinder, (-1, 1), None)

    with pytest.raises(InvalidCheckArguments):
        check_local_min_criterion(f, catalog('diff'), (1, math.pi), region, coarse_plan)


def test_audit_endpoint_derivatives__strictly_convex(square_on_line, unit_interval):
    report = audit_endpoint_derivatives(square_on_line, catalog('diff'), unit_interval)

    assert report.status is CheckStatus.PASS
    assert report.probes[0].property == 'antisymmetric'
    assert '33 pairs with x = y skipped' in report.notes


def test_audit_endpoint_derivatives__phi_not_antisymmetric(square_on_line, unit_interval):
    report = audit_endpoint_derivatives(square_on_line, catalog('sum'), unit_interval)

    assert report.status is CheckStatus.HYPOTHESIS_FAILED
    assert report.notes == ['sum is not antisymmetric']
    assert not report.probes[0].holds


def test_audit_endpoint_derivatives__not_strict_on_cylinder(cylinder, coarse_plan):
    '''
    Ensure h² on the cylinder fails strictness, since it is constant along circles
    '''
    f = FunctionOnManifold.from_text(cylinder, 'h1^2')
    region = Region.box(cylinder, (-1, 1), None)

    report = audit_endpoint_derivatives(f, catalog('diff'), region, coarse_plan)

    assert report.status is CheckStatus.HYPOTHESIS_FAILED
    assert report.notes[0] == 'f is not strictly geodesic φ-convex'


@pytest.mark.parametrize('text', [
    'h1^2',
    'h1^3',
    'h1',
    '-h1^2',
    'h1^4 - 2*h1^2',
    'h1^2 + 3*h1',
])
def test_check_geodesic_phi_convex__diff_reduces_to_classical_convexity(cylinder, coarse_plan, text):
    '''
    Ensure φ = u − v gives the chord bound, with the same status and worst margin on the same plan
    '''
    f = FunctionOnManifold.from_text(cylinder, text)
    region = Region.box(cylinder, (-1, 1), None)

    phi_report = check_geodesic_phi_convex(f, catalog('diff'), region, coarse_plan)
    chord_report = check_geodesic_convex(f, region, coarse_plan)

    assert phi_report.status is chord_report.status
    assert abs(phi_report.worst_margin - chord_report.worst_margin) <= 1e-12


def test_check_differential_criterion__violation_shows_up_for_small_t(line, unit_interval):
    '''
    Ensure the pair the first-order criterion rejects also breaks the finite inequality close to t = 0
    '''
    f = FunctionOnManifold.from_text(line, '-h1^2')

    report = check_differential_criterion(f, catalog('diff'), unit_interval)
    assert report.violated

    X, Y = np.array([report.violation.x]), np.array([report.violation.y])
    T = np.linspace(0, 1e-3, 5)[None, 1:]
    lhs, rhs = GeodesicPhiConvexity(f, catalog('diff')).sides(X, Y, T)

    assert np.all(lhs - rhs > 0)


def test_check_local_min_criterion__minimum_with_sum(cylinder, coarse_plan):
    f = FunctionOnManifold.from_text(cylinder, 'h1^2')
    region = Region.box(cylinder, (-1, 1), None)

    report = check_local_min_criterion(f, catalog('sum'), (0, math.pi / 2), region, coarse_plan)

    assert report.status is CheckStatus.PASS
    assert report.worst_margin <= 1e-9
