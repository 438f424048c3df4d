'''
The built-in audit suite: a fixed run config of scenarios with coded expectations, covering the
helix example on the cylinder, sequential upper boundedness of the catalog bifunctions, the
three-point inequality and the agreement of the restriction and epigraph characterizations.
'''
import logging
from typing import Optional

from geoconvex.models import RunConfig, RunReport, UserDefaults
from geoconvex.runner import run_checks, RunOverrides


logger = logging.getLogger('geoconvex')


CYLINDER_COUNTS = {'counts': [33, 4]}
COARSE_COUNTS = {'counts': [9, 4]}
# 44 points less the antipodal partners leave over 1000 ordered pairs
RESTRICTION_COUNTS = {'counts': [11, 4]}

AUDIT_CONFIG = {
    'manifold': [{'kind': 'line'}, {'kind': 'circle'}],
    'functions': {
        'cube': 'h1^3',
        'square': 'h1^2',
        'parabola': 'x^2',
    },
    'regions': {
        'upper': [{'lower': 0, 'upper': 3}, {}],
        'full': [{'lower': -3, 'upper': 3}, {}],
        'segment': [{'lower': -2, 'upper': -1}, {}],
        'unit': [{'lower': -1, 'upper': 1}, {}],
    },
    'checks': [
        # helix example: f = h1³ is geodesic φ-convex on h1 ≥ 0 only
        {'name': 'helix-upper-diff', 'kind': 'geodesic_phi_convex', 'expect': 'pass',
         'args': {'function': 'cube', 'phi': 'diff', 'region': 'upper'}, 'sampling': CYLINDER_COUNTS},
        {'name': 'helix-upper-cube-diff', 'kind': 'geodesic_phi_convex', 'expect': 'violated',
         'args': {'function': 'cube', 'phi': 'cube_diff', 'region': 'upper'}, 'sampling': CYLINDER_COUNTS},
        {'name': 'helix-full-diff', 'kind': 'geodesic_phi_convex', 'expect': 'violated',
         'args': {'function': 'cube', 'phi': 'diff', 'region': 'full'}, 'sampling': CYLINDER_COUNTS},
        {'name': 'helix-full-cube-diff', 'kind': 'geodesic_phi_convex', 'expect': 'violated',
         'args': {'function': 'cube', 'phi': 'cube_diff', 'region': 'full'}, 'sampling': CYLINDER_COUNTS},
        {'name': 'helix-segment-falsify', 'kind': 'geodesic_phi_convex', 'expect': 'violated', 'falsify': True,
         'args': {'function': 'cube', 'phi': 'diff', 'region': 'segment'}, 'sampling': CYLINDER_COUNTS},

        # sequential upper boundedness
        {'name': 'sum-seq-upper-bounded', 'kind': 'probe', 'expect': 'pass',
         'args': {'phi': 'sum', 'property': 'seq_upper_bounded'}},
        {'name': 'prod-seq-upper-bounded', 'kind': 'probe', 'expect': 'violated',
         'args': {'phi': 'prod', 'property': 'seq_upper_bounded'}},

        # three-point inequality on x² at (0, 1, 2)
        {'name': 'three-point-parabola', 'kind': 'three_point', 'expect': 'pass',
         'args': {'function': 'parabola', 'phi': 'diff', 'x': 0, 'y': 1, 'z': 2}},

        # restriction and epigraph characterizations agree with the direct check
        {'name': 'restriction-upper', 'kind': 'restriction_equivalence', 'expect': 'pass',
         'args': {'function': 'cube', 'phi': 'diff', 'region': 'upper'}, 'sampling': RESTRICTION_COUNTS},
        {'name': 'restriction-full', 'kind': 'restriction_equivalence', 'expect': 'pass',
         'args': {'function': 'cube', 'phi': 'diff', 'region': 'full'}, 'sampling': RESTRICTION_COUNTS},
        {'name': 'epigraph-square-sum', 'kind': 'epigraph_characterization', 'expect': 'pass',
         'args': {'function': 'square', 'phi': 'sum', 'region': 'unit'}, 'sampling': COARSE_COUNTS},
        {'name': 'epigraph-cube-sum', 'kind': 'epigraph_characterization', 'expect': 'pass',
         'args': {'function': 'cube', 'phi': 'sum', 'region': 'full'}, 'sampling': COARSE_COUNTS},
    ],
}


def audit_config() -> RunConfig:
    return RunConfig.deserialize(AUDIT_CONFIG)


def run_audit(defaults: Optional[UserDefaults]=None, overrides: Optional[RunOverrides]=None,
              progress: bool=False) -> RunReport:
    '''
    Run the audit suite. The report is deterministic for a given seed unless timings are requested.
    '''
    config = audit_config()
    logger.info('Running %d audit scenarios', len(config.checks))
    return run_checks(config, defaults, overrides, progress=progress)
