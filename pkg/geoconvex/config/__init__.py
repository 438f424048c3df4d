'''
Functions for loading and validating run configs
'''
import hashlib
import json
import logging
import os
from typing import Any, Callable, Dict, Iterable, Optional, Tuple

from geoconvex import __title__
from geoconvex.bifunction import BifunctionProperty, CATALOG
from geoconvex.exceptions import (DeserializeError, ExpressionError, FalsifyNotSupported, InvalidCheckArguments,
                                  InvalidManifold, InvalidSamplingPlan, UndefinedName, UnknownBifunction,
                                  UnknownCheckKind, UnreadableConfig)
from geoconvex.expr import parse
from geoconvex.manifold import ManifoldSpec, Region
from geoconvex.models import CheckDescriptor, RunConfig, SamplingPlan, Tolerances


logger = logging.getLogger('geoconvex')


# Name roles refer to a definition elsewhere in the config; plural roles take a list of names
NAME_ROLES = ('function', 'functions', 'bifunction', 'region', 'set', 'sets', 'check')
PLURAL_ROLES = ('functions', 'sets')

# Kinds which `falsify` can refine
FALSIFIABLE = ('phi_convex_interval', 'geodesic_phi_convex', 'geodesic_convex', 'phi_preinvex', 'g_preinvex')


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_interval(value) -> bool:
    return isinstance(value, list) and len(value) == 2 and all(_is_number(v) for v in value) \
        and value[0] < value[1]


def _is_text_list(value) -> bool:
    return isinstance(value, list) and bool(value) and all(isinstance(v, str) for v in value)


VALUE_ROLES: Dict[str, Tuple[Callable[[Any], bool], str]] = {
    'number': (_is_number, 'a number'),
    'integer': (lambda v: _is_number(v) and float(v).is_integer(), 'an integer'),
    'numbers': (lambda v: isinstance(v, list) and bool(v) and all(_is_number(n) for n in v), 'a list of numbers'),
    'interval': (_is_interval, 'a [lower, upper] pair with lower < upper'),
    'box': (lambda v: isinstance(v, list) and bool(v) and all(_is_interval(b) for b in v),
            'a list of [lower, upper] pairs'),
    'expression': (lambda v: isinstance(v, str), 'expression text'),
    'expressions': (_is_text_list, 'a list of expression texts'),
    'text': (lambda v: isinstance(v, str), 'a string'),
    'flag': (lambda v: isinstance(v, bool), 'true or false'),
}

_F = {'function': 'function'}
_FP = {'function': 'function', 'phi': 'bifunction'}
_FPR = {'function': 'function', 'phi': 'bifunction', 'region': 'region'}

# Required arguments of each check kind, and their roles
ARGUMENTS: Dict[str, Dict[str, str]] = {
    'phi_convex_interval': {**_FP, 'interval': 'interval'},
    'slope_inequality': {**_FP, 'interval': 'interval'},
    'geodesic_phi_convex': _FPR,
    'geodesic_convex': {**_F, 'region': 'region'},
    'differential_criterion': _FPR,
    'restriction_equivalence': _FPR,
    'mean_value': {**_FP, 'x1': 'number', 'x2': 'number'},
    'three_point': {**_FP, 'x': 'number', 'y': 'number', 'z': 'number'},
    'composition': {**_FPR, 'g': 'function'},
    'weighted_sum': {'functions': 'functions', 'weights': 'numbers', 'phi': 'bifunction', 'region': 'region'},
    'pushforward': {**_FPR, 'map': 'expressions', 'inverse': 'expressions'},
    'lipschitz_bound': {**_FP, 'center': 'numbers', 'h': 'number', 'r': 'number', 'eps': 'number'},
    'sup_family': {'functions': 'functions', 'phi': 'bifunction', 'region': 'region'},
    'local_min': {**_FPR, 'x0': 'numbers'},
    'phi_limit': {**_FPR, 'family': 'expression', 'mode': 'text', 'count': 'integer'},
    'endpoint_derivatives': _FPR,
    'phi_preinvex': {**_FP, 'eta': 'expressions', 'box': 'box'},
    'g_preinvex': {**_FP, 'psi': 'bifunction', 'interval': 'interval'},
    'g_preinvex_composition': {**_FPR, 'g': 'function', 'psi': 'bifunction'},
    'geodesic_phi_convex_set': {'set': 'set', 'phi': 'bifunction'},
    'epigraph_characterization': _FPR,
    'intersection_closure': {'sets': 'sets', 'phi': 'bifunction'},
    'sup_via_epigraph': {'functions': 'functions', 'phi': 'bifunction', 'region': 'region'},
    'probe': {'phi': 'bifunction'},
    'witness': {'check': 'check', 'x': 'numbers', 'y': 'numbers', 't': 'number'},
}

# Optional arguments, and their roles
OPTIONAL_ARGUMENTS: Dict[str, Dict[str, str]] = {
    'phi_convex_interval': {'strict': 'flag'},
    'slope_inequality': {'gap': 'number'},
    'geodesic_phi_convex': {'strict': 'flag'},
    'geodesic_convex': {'strict': 'flag'},
    'composition': {'strict': 'flag'},
    'local_min': {'radius': 'number'},
    'epigraph_characterization': {'level_range': 'number'},
    'sup_via_epigraph': {'level_range': 'number'},
    'probe': {'property': 'text'},
}



def load_run_config(path: str) -> RunConfig:
    '''
    Load and validate a JSON run config

    Params:
        path:  Path to the config file
    Returns:
        A validated RunConfig
    '''
    try:
        with open(path, encoding='utf8') as f:
            config = RunConfig.deserialize(json.load(f))

    except FileNotFoundError:
        raise UnreadableConfig('No such file', path=path)
    except IsADirectoryError:
        raise UnreadableConfig('Path is a directory', path=path)
    except UnicodeDecodeError:
        raise UnreadableConfig('Config file is not UTF-8', path=path)
    except json.decoder.JSONDecodeError as e:
        raise UnreadableConfig(f'Bad JSON in config file! {e}', path=path)
    except DeserializeError as e:
        raise UnreadableConfig(str(e), path=path)
    except InvalidManifold as e:
        raise UnreadableConfig(str(e), path=path)

    validate_run_config(config)
    logger.debug('Loaded run config %s with %d checks', path, len(config.checks))
    return config


def validate_run_config(config: RunConfig):
    '''
    Check that the manifold, regions and expressions are well-formed, and that every name referenced
    by a check descriptor is defined.

    Raises:
        UnknownCheckKind, UndefinedName, UnknownBifunction, InvalidCheckArguments, FalsifyNotSupported,
        UnreadableConfig
    '''
    try:
        manifold = manifold_of(config)
        for bounds in config.regions.values():
            Region(manifold, tuple(bounds))
        for text in config.functions.values():
            parse(text)
        for text in config.bifunctions.values():
            parse(text, ('u', 'v'))
    except (InvalidManifold, ExpressionError) as e:
        raise UnreadableConfig(str(e))

    for name, set_ in config.sets.items():
        if set_.region not in config.regions:
            raise UndefinedName(f'set {name}', 'region', set_.region)

    seen = set()
    for descriptor in config.checks:
        if descriptor.name in seen:
            raise UnreadableConfig(f'Duplicate check name "{descriptor.name}"')
        seen.add(descriptor.name)
        validate_descriptor(config, descriptor)


def validate_descriptor(config: RunConfig, descriptor: CheckDescriptor):
    '''
    Validate one check descriptor: a known kind, every required argument present with the right
    shape, no unknown arguments, and every referenced name defined.
    '''
    try:
        required = ARGUMENTS[descriptor.kind]
    except KeyError:
        raise UnknownCheckKind(descriptor.kind)
    optional = OPTIONAL_ARGUMENTS.get(descriptor.kind, {})

    if descriptor.falsify and descriptor.kind not in FALSIFIABLE:
        raise FalsifyNotSupported(descriptor.kind)

    unknown = set(descriptor.args) - set(required) - set(optional)
    if unknown:
        raise InvalidCheckArguments(descriptor.name, f'unknown arguments {sorted(unknown)}')

    for arg, role in {**required, **optional}.items():
        if arg not in descriptor.args:
            if arg in required:
                raise InvalidCheckArguments(descriptor.name, f'missing argument "{arg}"')
            continue

        value = descriptor.args[arg]
        if role in NAME_ROLES:
            _check_names(config, descriptor.name, role, value)
            continue

        is_valid, requirement = VALUE_ROLES[role]
        if not is_valid(value):
            raise InvalidCheckArguments(descriptor.name, f'argument "{arg}" must be {requirement}')

        if role in ('expression', 'expressions'):
            for text in value if isinstance(value, list) else [value]:
                try:
                    parse(text)
                except ExpressionError as e:
                    raise InvalidCheckArguments(descriptor.name, f'argument "{arg}": {e}')

    if descriptor.kind == 'witness':
        target = config.check(descriptor.args['check'])
        if target is not None and target.kind not in FALSIFIABLE:
            raise InvalidCheckArguments(descriptor.name, f'check "{target.name}" has no sweep witness')

    if descriptor.kind == 'probe' and 'property' in descriptor.args:
        try:
            BifunctionProperty(descriptor.args['property'])
        except ValueError:
            raise InvalidCheckArguments(
                descriptor.name, f'unknown property "{descriptor.args["property"]}"'
            )

    try:
        SamplingPlan().merged({**config.sampling, **descriptor.sampling})
        Tolerances().merged({**config.tolerance, **descriptor.tolerance})
    except (DeserializeError, InvalidSamplingPlan) as e:
        raise InvalidCheckArguments(descriptor.name, str(e))


def _check_names(config: RunConfig, check: str, role: str, value):
    if role in PLURAL_ROLES:
        if not isinstance(value, list):
            raise InvalidCheckArguments(check, f'{role} must be a list of names')
        names = value
    else:
        names = [value]

    defined: Dict[str, Iterable] = {
        'function': config.functions,
        'functions': config.functions,
        'region': config.regions,
        'set': config.sets,
        'sets': config.sets,
        'check': [c.name for c in config.checks if c.name != check],
    }

    for name in names:
        if not isinstance(name, str):
            raise InvalidCheckArguments(check, f'{role} must be given by name')
        if role == 'bifunction':
            if name not in config.bifunctions and name not in CATALOG:
                raise UnknownBifunction(name, sorted({*CATALOG, *config.bifunctions}))
        elif name not in defined[role]:
            raise UndefinedName(check, role.rstrip('s'), name)


def manifold_of(config: RunConfig) -> ManifoldSpec:
    return ManifoldSpec(tuple(config.manifold))


def config_digest(config: RunConfig) -> str:
    'SHA-1 of the canonical JSON serialization of a run config'
    canonical = json.dumps(config.serialize(), sort_keys=True, separators=(',', ':'), ensure_ascii=False)
    return hashlib.sha1(canonical.encode('utf8')).hexdigest()


def get_default_user_config_filepath() -> str:
    return os.path.join(
        os.environ.get('XDG_CONFIG_HOME', os.path.join(os.path.expanduser('~'), '.config')),
        __title__,
        f'{__title__}.ini',
    )


def thread_cap() -> Optional[int]:
    'Worker cap from GEOCONVEX_THREADS, or None when unset or invalid'
    value = os.environ.get('GEOCONVEX_THREADS')
    if not value:
        return None
    try:
        threads = int(value)
    except ValueError:
        logger.warning('GEOCONVEX_THREADS must be an integer. Ignoring.')
        return None
    if threads < 1:
        logger.warning('GEOCONVEX_THREADS must be at least 1. Ignoring.')
        return None
    return threads
