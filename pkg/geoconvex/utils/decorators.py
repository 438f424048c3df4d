import functools
import logging

from geoconvex.exceptions import ExpressionDomainError, StencilOutOfDomain


logger = logging.getLogger('geoconvex')


def shrink_step_retry(factor: float=10.0):
    '''
    This decorator retries a finite-difference computation once with a smaller step, should the
    wrapped function raise an `ExpressionDomainError` because its stencil left the domain. A second
    failure raises `StencilOutOfDomain`.

    The wrapped function *must* accept the step as the keyword argument `step`.
    '''
    def decorator(f):
        @functools.wraps(f)
        def wrapped(*args, step: float, **kwargs):
            try:
                return f(*args, step=step, **kwargs)
            except ExpressionDomainError as e:
                logger.debug('Stencil with step %g failed (%s), retrying with step %g', step, e,
                             step / factor)

            try:
                return f(*args, step=step / factor, **kwargs)
            except ExpressionDomainError as e:
                raise StencilOutOfDomain(step / factor, extra_message=str(e))
        return wrapped
    return decorator
