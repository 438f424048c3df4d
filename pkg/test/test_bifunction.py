'''
Tests for the bifunction catalog and the sampled property probes
'''
import numpy as np
import pytest

from geoconvex.bifunction import (Bifunction, BifunctionProperty, catalog, probe, probe_all,
                                  probe_seq_upper_bounded, resolve, sequence_family, witness_margin)
from geoconvex.exceptions import InvalidBifunction, InvalidSamplingPlan, UnknownBifunction
from geoconvex.expr import parse
from geoconvex.models import ProbePlan, ProbeVerdict


P = BifunctionProperty


def test_catalog__names():
    for name in ('diff', 'sum', 'prod', 'cube_diff'):
        assert catalog(name).name == name


def test_catalog__unknown_name():
    with pytest.raises(UnknownBifunction) as excinfo:
        catalog('quotient')

    assert 'diff' in str(excinfo.value)


def test_resolve__config_definitions_win():
    phi = resolve('diff', {'diff': 'v - u'})
    assert phi.value(1, 3) == 2


def test_resolve__falls_back_to_catalog():
    phi = resolve('sum', {'shifted': 'u - v + 1'})
    assert phi.value(1, 3) == 4


def test_bifunction__must_use_u_and_v():
    with pytest.raises(InvalidBifunction):
        Bifunction('bad', parse('u * 2'))


def test_bifunction__vectorised_and_scalar_agree():
    phi = catalog('cube_diff')
    u = np.array([-1.0, 0.5, 2.0])
    v = np.array([1.0, 0.25, -2.0])

    assert phi(u, v) == pytest.approx([phi.value(a, b) for a, b in zip(u, v)])


@pytest.mark.parametrize('prop', [
    P.NONNEG_HOMOGENEOUS,
    P.ADDITIVE,
    P.NONNEG_LINEAR,
    P.ANTISYMMETRIC,
])
def test_probe__diff_holds(prop):
    report = probe(catalog('diff'), prop)

    assert report.verdict is ProbeVerdict.HOLDS
    assert report.samples > 0
    assert not report.witness


@pytest.mark.parametrize('prop', [
    P.NONDECREASING,
    P.SEQ_UPPER_BOUNDED,
])
def test_probe__diff_violated(prop):
    report = probe(catalog('diff'), prop)

    assert report.verdict is ProbeVerdict.VIOLATED
    assert report.margin > 0


def test_probe__sum_antisymmetric_witness():
    '''
    Ensure the worst antisymmetry sample of u + v is reported, ties going to the smallest witness
    '''
    report = probe(catalog('sum'), P.ANTISYMMETRIC)

    assert report.verdict is ProbeVerdict.VIOLATED
    assert report.margin == 16
    assert report.witness == {'u': [-4.0], 'v': [-4.0]}


@pytest.mark.parametrize('prop', [
    P.NONDECREASING,
    P.SEQ_UPPER_BOUNDED,
    P.NONNEG_LINEAR,
])
def test_probe__sum_holds(prop):
    assert probe(catalog('sum'), prop).holds


def test_probe__cube_diff():
    phi = catalog('cube_diff')

    assert probe(phi, P.ANTISYMMETRIC).holds
    assert not probe(phi, P.NONNEG_HOMOGENEOUS).holds


def test_probe__nonneg_linear_names_failed_component():
    report = probe(catalog('cube_diff'), P.NONNEG_LINEAR)

    assert report.property == 'nonneg_linear'
    assert report.notes == ['nonneg_homogeneous probe violated']


def test_probe_seq_upper_bounded__prod_negative_sequences():
    '''
    Ensure prod fails sequential upper boundedness on negative sequences, with a witness which
    re-evaluates to the reported margin
    '''
    plan = ProbePlan(sequence_values=[-2, -1], sequence_kinds=['eventually_constant'], sequence_length=4)
    phi = catalog('prod')

    report = probe_seq_upper_bounded(phi, plan)

    assert report.verdict is ProbeVerdict.VIOLATED
    assert report.margin == pytest.approx(3)
    assert report.witness == {'x': [-2.0, -1.0, -1.0, -1.0], 'y': [-2.0, -1.0, -1.0, -1.0]}
    assert witness_margin(phi, report) == pytest.approx(report.margin)


def test_witness_margin__matches_every_violated_probe():
    for name in ('diff', 'sum', 'prod', 'cube_diff'):
        phi = catalog(name)
        for report in probe_all(phi):
            if not report.holds:
                assert witness_margin(phi, report) == pytest.approx(report.margin), report.property


def test_probe_all__covers_every_property():
    reports = probe_all(catalog('diff'))
    assert [r.property for r in reports] == [p.value for p in P]


def test_sequence_family__shapes():
    plan = ProbePlan(sequence_values=[0, 1], sequence_kinds=['constant', 'alternating'], sequence_length=3)

    family = sequence_family(plan)

    assert family.tolist() == [
        [0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
    ]


def test_sequence_family__unknown_kind():
    with pytest.raises(InvalidSamplingPlan):
        sequence_family(ProbePlan(sequence_kinds=['random']))
