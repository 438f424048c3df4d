from contextlib import contextmanager
import json

import pytest

from fixtures import RUN_CONFIG
from geoconvex.checker.function import FunctionOnManifold, RealFunction
from geoconvex.manifold import ManifoldSpec, Region
from geoconvex.models import RunConfig, SamplingPlan
from geoconvex.runner import RunOverrides


@pytest.fixture
def cylinder():
    'Fixture representing the cylinder ℝ×S¹'
    return ManifoldSpec.cylinder()


@pytest.fixture
def line():
    'Fixture representing the Euclidean line'
    return ManifoldSpec.euclidean()


@pytest.fixture
def coarse_plan():
    '''
    Small cylinder grids, which keep the sweeps in unit tests quick
    '''
    return SamplingPlan(counts=[9, 4])


@pytest.fixture
def cube(cylinder):
    'f(h, θ) = h³ on the cylinder'
    return FunctionOnManifold.from_text(cylinder, 'h1^3')


@pytest.fixture
def square_on_line(line):
    return FunctionOnManifold.from_text(line, 'h1^2')


@pytest.fixture
def unit_interval(line):
    'The region [−1, 1] of the line'
    return Region.box(line, (-1, 1))


@pytest.fixture
def parabola():
    return RealFunction.from_text('x^2')


@pytest.fixture
def run_config():
    'Fixture representing a validated run config on the cylinder'
    return RunConfig.deserialize(RUN_CONFIG)


@pytest.fixture
def config_file(tmp_path):
    '''
    Write a run config dict to a JSON file in a temporary directory, and return the path
    '''
    def wrapped(config: dict=None, name: str='run.json') -> str:
        path = tmp_path / name
        path.write_text(json.dumps(RUN_CONFIG if config is None else config), encoding='utf8')
        return str(path)

    return wrapped


@pytest.fixture(autouse=True)
def verbose_default():
    'Always set verbose to true during tests, and reset the CLI context between tests'
    from geoconvex.cli.params import context  # pylint: disable=import-outside-toplevel, cyclic-import
    context.verbose = True  # pylint: disable=assigning-non-slot
    context._debug = False  # pylint: disable=assigning-non-slot, protected-access
    context.debug_level = 0  # pylint: disable=assigning-non-slot
    context.settings_path = None  # pylint: disable=assigning-non-slot
    context._defaults = None  # pylint: disable=assigning-non-slot, protected-access
    context.overrides = RunOverrides()  # pylint: disable=assigning-non-slot
    context.output = context.OutputParams()  # pylint: disable=assigning-non-slot


@pytest.fixture(autouse=True)
def threads_unset(monkeypatch):
    'Ensure a GEOCONVEX_THREADS in the environment running the tests does not leak in'
    monkeypatch.delenv('GEOCONVEX_THREADS', raising=False)


@contextmanager
def not_raises(exception):
    '''Antonym for pytest.raises'''
    try:
        yield
    except exception as e:
        raise pytest.fail(f'DID RAISE {exception}') from e
