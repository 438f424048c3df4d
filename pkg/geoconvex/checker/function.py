import dataclasses
from typing import Optional, Sequence

import numpy as np

from geoconvex.exceptions import InvalidCheckArguments
from geoconvex.expr import Expression, compose, parse
from geoconvex.manifold import ManifoldSpec, Point
from geoconvex.utils.decorators import shrink_step_retry


@dataclasses.dataclass(frozen=True)
class FunctionOnManifold:
    '''
    A real function on a catalog manifold, given as an expression over the manifold's coordinate
    names (h1, h2, … for lines and th1, th2, … for circles).
    '''
    manifold: ManifoldSpec
    expression: Expression

    def __post_init__(self):
        # Re-declare over every coordinate; raises UnboundVariable for foreign names
        object.__setattr__(
            self, 'expression', Expression(self.expression.root, self.manifold.coordinate_names)
        )

    @classmethod
    def from_text(cls, manifold: ManifoldSpec, text: str) -> 'FunctionOnManifold':
        return cls(manifold, parse(text))

    def __str__(self):
        return str(self.expression)

    def values(self, coords: np.ndarray) -> np.ndarray:
        'Vectorised evaluation over an array shaped (..., dimension)'
        return self.expression.evaluate_array(self.manifold.columns(coords))

    def value(self, point: Sequence[float]) -> float:
        'Scalar evaluation at one point'
        coords = point.coords if isinstance(point, Point) else tuple(point)
        return self.expression.evaluate(dict(zip(self.manifold.coordinate_names, coords)))


@dataclasses.dataclass(frozen=True)
class RealFunction:
    '''
    A function of one real variable. The variable may have any name; constant expressions are
    allowed.
    '''
    expression: Expression

    def __post_init__(self):
        if len(self.expression.variables) > 1:
            raise InvalidCheckArguments(
                str(self.expression),
                f'expected a function of one variable, got {", ".join(self.expression.variables)}',
            )

    @classmethod
    def from_text(cls, text: str) -> 'RealFunction':
        return cls(parse(text))

    def __str__(self):
        return str(self.expression)

    @property
    def variable(self) -> Optional[str]:
        return self.expression.variables[0] if self.expression.variables else None

    def over(self, name: str) -> Expression:
        'The same function as an expression in the variable `name`'
        if self.variable is None:
            return Expression(self.expression.root, (name,))
        return compose(self.expression, {self.variable: parse(name)}, (name,))

    def values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.variable is None:
            return np.broadcast_to(self.expression.evaluate_array({}), x.shape)
        return self.expression.evaluate_array({self.variable: x})

    def value(self, x: float) -> float:
        if self.variable is None:
            return self.expression.evaluate({})
        return self.expression.evaluate({self.variable: x})

    @shrink_step_retry()
    def derivatives(self, x, *, step: float) -> np.ndarray:
        'Central differences at each of `x`'
        x = np.asarray(x, dtype=float)
        return (self.values(x + step) - self.values(x - step)) / (2 * step)
