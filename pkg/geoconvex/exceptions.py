'''
A module for custom application exceptions.

Many exceptions inherit from ClickException, which gives us handling for free in entrypoint
functions.
'''
import logging
import traceback
from typing import Optional

import click


logger = logging.getLogger('geoconvex')


class DeserializeError(ValueError):
    pass


class BaseAppException(click.ClickException):
    '''
    Base exception inherited by all general usage execeptions.
    Inherits click.ClickException, so that when raised, these are conveniently handled by the click
    library and the output `format_message` is printed on the CLI.
    '''
    def __init__(self, message=None, extra_message=''):
        self.extra_message = str(extra_message).strip()

        # If a str is passed as the first parameter, then simply treat per a normal exception.
        # Else, call the exception objects __str__ method to return the message string.
        if message:
            super().__init__(message)
        else:
            super().__init__(str(self))

    def show(self):  # pylint: disable=arguments-differ
        super().show()
        # if --debug was passed on CLI, the global logger will be at logging.DEBUG.  In this case,
        # print a stack trace
        if logger.level == logging.DEBUG:
            traceback.print_exc()

    def format_message(self):
        # if --debug or --verbose were passed on CLI, the global logger will be at logging.INFO
        # or logging.DEBUG. In these cases, print the extra message.
        if self.extra_message and logger.level <= logging.INFO:
            return f'{self.message}\n\n{self.extra_message}'
        else:
            return self.message

    def __str__(self):
        '''
        Vanilla __str__ method which returns __doc__ without formatting. Should be overriden in
        child classes.
        '''
        return self.__doc__


class ConfigError(BaseAppException):
    '''
    Parent of all errors raised while reading or validating a run config. These exit with code 2,
    distinguishing a broken config from a check which did not match its expectation.
    '''
    exit_code = 2


# Raised when load_run_config cannot read the config file
class UnreadableConfig(ConfigError):
    def __init__(self, message, path: Optional[str]=None):
        self.path = path
        super().__init__(f'{message} at {path}' if path else str(message))


class UnknownCheckKind(ConfigError):
    'Unknown check kind "{}"'

    def __init__(self, kind):
        self.kind = kind
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.kind)


# Raised when a check descriptor references a function, bifunction, region or set which the config
# does not define
class UndefinedName(ConfigError):
    'Check "{check}" references undefined {what} "{name}"'

    def __init__(self, check, what, name):
        self.check = check
        self.what = what
        self.name = name
        super().__init__()

    def __str__(self):
        return self.__doc__.format(check=self.check, what=self.what, name=self.name)


class UnknownBifunction(ConfigError):
    'Unknown bifunction "{}". Catalog names are: {}'

    def __init__(self, name, catalog):
        self.name = name
        self.catalog = catalog
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.name, ', '.join(self.catalog))


class InvalidBifunction(ConfigError):
    'Bifunction "{}" must be an expression in exactly the variables u and v, got {}'

    def __init__(self, name, variables):
        self.name = name
        self.variables = variables
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.name, ', '.join(self.variables) or 'none')


class CheckNotFound(ConfigError):
    'No check named "{}" in the config'

    def __init__(self, name):
        self.name = name
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.name)


class InvalidCheckArguments(ConfigError):
    'Invalid arguments for check "{check}": {reason}'

    def __init__(self, check, reason):
        self.check = check
        self.reason = reason
        super().__init__()

    def __str__(self):
        return self.__doc__.format(check=self.check, reason=self.reason)


class FalsifyNotSupported(ConfigError):
    'Check kind "{}" has no sampled inequality to refine'

    def __init__(self, kind):
        self.kind = kind
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.kind)


class ExpressionError(BaseAppException):
    'Base class for errors raised while parsing or evaluating an expression'


class ExpressionSyntaxError(ExpressionError):
    'Syntax error at offset {offset}: {reason}\n\n  {text}\n  {pointer}'

    def __init__(self, text: str, offset: int, reason: str):
        self.text = text
        self.offset = offset
        self.reason = reason
        super().__init__()

    def __str__(self):
        # Offsets are byte offsets into the UTF-8 encoded text; the pointer is approximate for
        # non-ASCII input
        return self.__doc__.format(
            offset=self.offset, reason=self.reason, text=self.text, pointer=' ' * self.offset + '^'
        )


class UnknownFunction(ExpressionError):
    'Unknown function "{}" at offset {}'

    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.name, self.offset)


class UnboundVariable(ExpressionError):
    'Variable "{}" is not bound'

    def __init__(self, name: str):
        self.name = name
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.name)


class ExpressionDomainError(ExpressionError):
    'Domain error in {}: {}'

    def __init__(self, operation: str, detail: str):
        self.operation = operation
        self.detail = detail
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.operation, self.detail)


class ExpressionOverflow(ExpressionDomainError):
    'Non-finite result from {}: {}'


class InvalidManifold(BaseAppException):
    'Invalid manifold: {}'

    def __init__(self, reason):
        self.reason = reason
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.reason)


class InvalidRegion(InvalidManifold):
    'Invalid region: {}'


class InvalidPoint(InvalidManifold):
    'Invalid point: {}'


class ParameterOutOfRange(BaseAppException):
    'Geodesic parameter t={} is outside [0, 1]'

    def __init__(self, t):
        self.t = t
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.t)


class InvalidSamplingPlan(BaseAppException):
    'Invalid sampling plan: {}'

    def __init__(self, reason):
        self.reason = reason
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.reason)


class EmptyGrid(InvalidSamplingPlan):
    'Grid count for factor {} is zero'


class GridTooCoarse(BaseAppException):
    'No sampled triple x1 < x < x2 satisfies the minimum gap {}'

    def __init__(self, gap):
        self.gap = gap
        super().__init__()

    def __str__(self):
        return self.__doc__.format(self.gap)


# Raised by the shrink_step_retry decorator when the smaller step also fails
class StencilOutOfDomain(BaseAppException):
    'Finite-difference stencil left the domain of the expression (step {})'

    def __init__(self, step, extra_message=''):
        self.step = step
        super().__init__(extra_message=extra_message)

    def __str__(self):
        return self.__doc__.format(self.step)


class NoMemberSamples(BaseAppException):
    'No sampled point of M×ℝ satisfies the set constraints'


class NoHypothesesToCheck(BaseAppException):
    'At least one member of the bifunction family is needed (N >= 1)'
