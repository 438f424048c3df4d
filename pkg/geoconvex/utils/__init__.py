import contextlib
import logging
import threading
from typing import Any, Dict, Optional

import numpy as np


class _ThreadSilencer(logging.Filter):
    'Drops records below CRITICAL which are logged from a thread inside critical_logger'
    def __init__(self):
        super().__init__()
        self.local = threading.local()

    @property
    def depth(self) -> int:
        return getattr(self.local, 'depth', 0)

    def filter(self, record: logging.LogRecord) -> bool:
        return record.levelno >= logging.CRITICAL or self.depth == 0


# One filter per logger, shared by worker threads
_SILENCERS: Dict[str, _ThreadSilencer] = {}
_SILENCE_LOCK = threading.Lock()


def _silencer(logger_: logging.Logger) -> _ThreadSilencer:
    with _SILENCE_LOCK:
        silencer = _SILENCERS.get(logger_.name)
        if silencer is None:
            silencer = _SILENCERS[logger_.name] = _ThreadSilencer()
            logger_.addFilter(silencer)
        return silencer


@contextlib.contextmanager
def critical_logger(logger_):
    '''
    Context manager which drops everything below CRITICAL that the current thread logs to a logger.
    The logger level is untouched, so other threads keep logging.

    with critical_logger(logger):
        ...
    '''
    silencer = _silencer(logger_)
    silencer.local.depth = silencer.depth + 1
    try:
        yield logger_
    finally:
        silencer.local.depth -= 1


def worst_index(excess: np.ndarray, keys: np.ndarray) -> int:
    '''
    Index of the largest excess. Ties are broken by the lexicographically smallest row of `keys`,
    so the result does not depend on the order samples were evaluated in.

    Params:
        excess:  Shape (M,)
        keys:    Shape (M, k) witness coordinates
    '''
    top = np.max(excess)
    candidates = np.flatnonzero(excess == top)
    if len(candidates) == 1:
        return int(candidates[0])

    # np.lexsort treats its last key as primary
    order = np.lexsort(keys[candidates].T[::-1])
    return int(candidates[order[0]])


def render_value(value: Any, precision: Optional[int]=6) -> str:
    '''
    Render a value for text output

    Params:
        value:      Value to render
        precision:  Significant digits for floats
    '''
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'yes' if value else 'no'
    if isinstance(value, (float, np.floating)):
        return f'{float(value):.{precision}g}'
    if isinstance(value, (list, tuple)):
        return '(' + ', '.join(render_value(v, precision) for v in value) + ')'
    if hasattr(value, 'value'):
        # enums render as their value
        return str(value.value)
    return str(value)


def parse_floats(value: str) -> list:
    'Helper to parse comma-separated numbers into a list of floats'
    return [float(v.strip()) for v in value.split(',') if v.strip()]
