'''
Functions for reading user-editable defaults from an INI file
'''
import configparser
import logging
import os
from typing import Callable, Optional

from geoconvex.exceptions import InvalidSamplingPlan
from geoconvex.models import SamplingPlan, UserDefaults


logger = logging.getLogger('geoconvex')


def load_user_config(path: Optional[str]) -> UserDefaults:
    '''
    Load user defaults from a local INI file. Unknown sections, unknown keys and invalid values are
    logged and ignored.

    Params:
        path:  Path to the INI file; a missing file yields built-in defaults
    '''
    SECTIONS = {
        'tolerance': handle_tolerance_section,
        'sampling': handle_sampling_section,
        'run': handle_run_section,
    }

    defaults = UserDefaults()

    if not path or not os.path.exists(path):
        return defaults

    cfg = configparser.ConfigParser(inline_comment_prefixes='#')

    with open(path, encoding='utf8') as f:
        try:
            cfg.read_string(f.read())
        except configparser.Error as e:
            logger.warning('Unparseable user config at %s. Ignoring.', path)
            logger.debug(e)
            return defaults

    for section in cfg.sections():
        func = SECTIONS.get(section)
        if func is None:
            logger.warning('Invalid section "%s" supplied in config. Ignoring.', section)
            continue
        func(defaults, cfg.items(section))

    return defaults


def _set_number(target, attr: str, option: str, value: str, cast: Callable, check: Callable[[float], bool],
                requirement: str):
    try:
        number = cast(value)
    except ValueError:
        logger.warning('Config option %s must be %s. Ignoring.', option, requirement)
        return
    if not check(number):
        logger.warning('Config option %s must be %s. Ignoring.', option, requirement)
        return
    setattr(target, attr, number)


def handle_tolerance_section(defaults: UserDefaults, items):
    '''
    Handler for the [tolerance] section of user config file.

    Params:
        defaults:  UserDefaults instance being populated
        items:     Iterable object from ConfigParser.items()
    '''
    KEYS = {
        'closed-form': 'closed_form',
        'fd': 'fd',
        'fd-step': 'fd_step',
        'strict': 'strict',
        'identity': 'identity',
    }
    for key, value in items:
        attr = KEYS.get(key)
        if attr is None:
            logger.warning('Unknown option tolerance.%s. Ignoring.', key)
            continue
        _set_number(defaults.tolerance, attr, f'tolerance.{key}', value, float, lambda v: v > 0,
                    'a positive number')


def handle_sampling_section(defaults: UserDefaults, items):
    '''
    Handler for the [sampling] section of user config file.

    Params:
        defaults:  UserDefaults instance being populated
        items:     Iterable object from ConfigParser.items()
    '''
    KEYS = {
        'line-count': ('line_count', int, 2),
        'circle-count': ('circle_count', int, 1),
        'refine-rounds': ('refine_rounds', int, 0),
        't-count': ('t_count', int, 2),
        'zoom': ('zoom', float, 1),
    }
    for key, value in items:
        if key not in KEYS:
            logger.warning('Unknown option sampling.%s. Ignoring.', key)
            continue

        attr, cast, minimum = KEYS[key]
        if cast is int:
            requirement = f'an integer of at least {minimum}'
            check = lambda v, m=minimum: v >= m
        else:
            requirement = f'a number greater than {minimum}'
            check = lambda v, m=minimum: v > m

        _set_number(defaults.sampling, attr, f'sampling.{key}', value, cast, check, requirement)

    try:
        # Re-run SamplingPlan validation on the combined values
        SamplingPlan.deserialize(defaults.sampling.serialize())
    except (InvalidSamplingPlan, ValueError):
        logger.warning('Invalid [sampling] section in user config. Ignoring.')
        defaults.sampling = SamplingPlan()


def handle_run_section(defaults: UserDefaults, items):
    '''
    Handler for the [run] section of user config file.
    '''
    for key, value in items:
        if key == 'threads':
            _set_number(defaults, 'threads', 'run.threads', value, int, lambda v: v >= 1,
                        'a positive integer')
        else:
            logger.warning('Unknown option run.%s. Ignoring.', key)
