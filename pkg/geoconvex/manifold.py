'''
Catalog manifolds built from EuclideanLine and Circle factors, and their closed-form geodesics.

Every geodesic is parametrized on [0, 1] with g(0) = x and g(1) = y. Line components are affine;
circle components turn through the shorter arc, with antipodal ties turning counterclockwise. On the
cylinder ℝ×S¹ this gives the helix through x and y.
'''
import dataclasses
import enum
import functools
import logging
import math
from typing import List, Optional, Sequence, Tuple, TYPE_CHECKING

import numpy as np

from geoconvex.exceptions import (EmptyGrid, InvalidManifold, InvalidPoint, InvalidRegion,
                                  InvalidSamplingPlan, ParameterOutOfRange)
from geoconvex.utils.serializer import DataclassSerializer

if TYPE_CHECKING:
    from geoconvex.models import SamplingPlan  # pylint: disable=cyclic-import


logger = logging.getLogger('geoconvex')


TAU = 2 * math.pi

# Circle displacements within this distance of π are treated as antipodal
ANTIPODAL_TOLERANCE = 1e-12


class FactorKind(enum.Enum):
    LINE = 'line'
    CIRCLE = 'circle'


@dataclasses.dataclass(frozen=True)
class Factor(DataclassSerializer):
    '''
    One factor of a product manifold. A line factor may be restricted to [lower, upper].
    '''
    kind: FactorKind
    lower: Optional[float] = dataclasses.field(default=None)
    upper: Optional[float] = dataclasses.field(default=None)

    def __post_init__(self):
        if self.kind is FactorKind.CIRCLE:
            if self.lower is not None or self.upper is not None:
                raise InvalidManifold('circle factors take no bounds')
            return

        if (self.lower is None) != (self.upper is None):
            raise InvalidManifold('restricted line factors need both lower and upper bounds')
        if self.lower is not None and not self.lower < self.upper:  # type: ignore[operator]
            raise InvalidManifold(f'interval [{self.lower}, {self.upper}] is empty')

    @property
    def bounded(self) -> bool:
        return self.lower is not None


@dataclasses.dataclass(frozen=True)
class ManifoldSpec(DataclassSerializer):
    factors: Tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise InvalidManifold('at least one factor is required')

    @classmethod
    def cylinder(cls) -> 'ManifoldSpec':
        'ℝ×S¹'
        return cls((Factor(FactorKind.LINE), Factor(FactorKind.CIRCLE)))

    @classmethod
    def euclidean(cls, dimension: int=1) -> 'ManifoldSpec':
        return cls(tuple(Factor(FactorKind.LINE) for _ in range(dimension)))

    @property
    def dimension(self) -> int:
        return len(self.factors)

    @property
    def coordinate_names(self) -> Tuple[str, ...]:
        '''
        Line factors are named h1, h2, … and circle factors th1, th2, … counting each kind
        separately, in factor order.
        '''
        return _coordinate_names(self.factors)

    @property
    def circle_mask(self) -> np.ndarray:
        return np.array([f.kind is FactorKind.CIRCLE for f in self.factors])

    def point(self, *coords: float) -> 'Point':
        'Validate coordinates and build a Point, normalizing circle angles to [0, 2π)'
        if len(coords) != self.dimension:
            raise InvalidPoint(f'expected {self.dimension} coordinates, got {len(coords)}')

        normalized = []
        for factor, value in zip(self.factors, coords):
            value = float(value)
            if not math.isfinite(value):
                raise InvalidPoint(f'coordinate {value} is not finite')

            if factor.kind is FactorKind.CIRCLE:
                value = normalize_angle(value)
            elif factor.bounded and not factor.lower <= value <= factor.upper:  # type: ignore[operator]
                raise InvalidPoint(f'{value} is outside [{factor.lower}, {factor.upper}]')
            normalized.append(value)

        return Point(tuple(normalized))

    def normalize(self, coords: np.ndarray) -> np.ndarray:
        'Normalize the circle columns of an array of coordinates'
        return np.where(self.circle_mask, normalize_angle_array(coords), coords)

    def binding(self, point: 'Point') -> dict:
        return dict(zip(self.coordinate_names, point.coords))

    def columns(self, coords: np.ndarray) -> dict:
        'Map coordinate names to the matching columns of an array shaped (..., dimension)'
        return {name: coords[..., i] for i, name in enumerate(self.coordinate_names)}


@functools.lru_cache()
def _coordinate_names(factors: Tuple[Factor, ...]) -> Tuple[str, ...]:
    names = []
    lines = circles = 0
    for f in factors:
        if f.kind is FactorKind.LINE:
            lines += 1
            names.append(f'h{lines}')
        else:
            circles += 1
            names.append(f'th{circles}')
    return tuple(names)


@dataclasses.dataclass(frozen=True)
class Point:
    'A point in factor coordinates; serializes as a flat list in factor order'
    coords: Tuple[float, ...]

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    def serialize(self) -> List[float]:
        return list(self.coords)


def normalize_angle(theta: float) -> float:
    value = theta % TAU
    # a tiny negative angle rounds up to exactly 2π
    return 0.0 if value >= TAU else value


def normalize_angle_array(theta: np.ndarray) -> np.ndarray:
    value = np.mod(theta, TAU)
    return np.where(value >= TAU, 0.0, value)


def circle_displacement(start: float, end: float) -> float:
    '''
    Signed angle in (−π, π] turning from `start` to `end` through the shorter arc. Antipodal
    ties turn counterclockwise (+π).
    '''
    delta = (end - start) % TAU
    if abs(delta - math.pi) <= ANTIPODAL_TOLERANCE:
        return math.pi
    if delta > math.pi:
        delta -= TAU
    return delta


def circle_displacement_array(start: np.ndarray, end: np.ndarray) -> np.ndarray:
    delta = np.mod(end - start, TAU)
    antipodal = np.abs(delta - math.pi) <= ANTIPODAL_TOLERANCE
    delta = np.where(delta > math.pi, delta - TAU, delta)
    return np.where(antipodal, math.pi, delta)


@dataclasses.dataclass(frozen=True)
class Geodesic:
    spec: ManifoldSpec
    start: Point
    end: Point
    velocity: Tuple[float, ...]


def geodesic_between(spec: ManifoldSpec, x: Point, y: Point) -> Geodesic:
    if len(x) != spec.dimension or len(y) != spec.dimension:
        raise InvalidPoint(f'points must have {spec.dimension} coordinates')

    velocity = tuple(
        circle_displacement(a, b) if f.kind is FactorKind.CIRCLE else b - a
        for f, a, b in zip(spec.factors, x.coords, y.coords)
    )
    return Geodesic(spec, x, y, velocity)


def curve_point(g: Geodesic, t: float) -> Point:
    '''
    Evaluate the geodesic formula at any real t, including the extrapolated stencil points of finite
    differences taken at the ends of [0, 1].
    '''
    if t == 1:
        return g.end

    coords = []
    for f, a, b, v in zip(g.spec.factors, g.start.coords, g.end.coords, g.velocity):
        if f.kind is FactorKind.CIRCLE:
            coords.append(normalize_angle(a + t * v))
        else:
            coords.append((1 - t) * a + t * b)
    return Point(tuple(coords))


def geodesic_point(g: Geodesic, t: float) -> Point:
    if not 0 <= t <= 1:
        raise ParameterOutOfRange(t)
    return curve_point(g, t)


def geodesic_velocity(g: Geodesic, t: float) -> Tuple[float, ...]:
    if not 0 <= t <= 1:
        raise ParameterOutOfRange(t)
    # constant speed: the velocity does not depend on t
    return g.velocity


def velocity_array(spec: ManifoldSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    'Per-factor velocities of the geodesics from rows of X to rows of Y'
    circle = spec.circle_mask
    return np.where(circle, circle_displacement_array(X, Y), Y - X)


def curve_array(spec: ManifoldSpec, X: np.ndarray, Y: np.ndarray, T: np.ndarray) -> np.ndarray:
    '''
    Vectorised geodesic evaluation.

    Params:
        spec:  Manifold
        X:     Start points, shape (P, d)
        Y:     End points, shape (P, d)
        T:     Parameters, shape (P, K); values outside [0, 1] extrapolate
    Returns:
        Curve points, shape (P, K, d)
    '''
    circle = spec.circle_mask
    velocity = velocity_array(spec, X, Y)

    T3 = T[..., None]
    Xb = X[:, None, :]
    Yb = Y[:, None, :]

    linear = (1 - T3) * Xb + T3 * Yb
    angular = normalize_angle_array(Xb + T3 * velocity[:, None, :])

    points = np.where(circle, angular, linear)
    return np.where(T3 == 1, Yb, points)


def antipodal_pairs(spec: ManifoldSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    'Boolean mask of rows whose circle displacement hits the cut locus'
    circle = spec.circle_mask
    if not circle.any():
        return np.zeros(len(X), dtype=bool)

    delta = np.mod(Y[:, circle] - X[:, circle], TAU)
    return np.any(np.abs(delta - math.pi) <= ANTIPODAL_TOLERANCE, axis=1)


@dataclasses.dataclass(frozen=True)
class RegionFactor(DataclassSerializer):
    '''
    Per-factor region constraint. For a line factor, the closed interval [lower, upper]. For a circle
    factor, the whole circle when both bounds are unset, else the counterclockwise arc from lower to
    upper, which must be shorter than π.
    '''
    lower: Optional[float] = dataclasses.field(default=None)
    upper: Optional[float] = dataclasses.field(default=None)

    @property
    def whole(self) -> bool:
        return self.lower is None and self.upper is None


@dataclasses.dataclass(frozen=True)
class Region:
    manifold: ManifoldSpec
    bounds: Tuple[RegionFactor, ...]

    def __post_init__(self):
        if len(self.bounds) != self.manifold.dimension:
            raise InvalidRegion(f'expected {self.manifold.dimension} factor bounds, got {len(self.bounds)}')

        for i, (factor, bound) in enumerate(zip(self.manifold.factors, self.bounds), start=1):
            if bound.whole:
                if factor.kind is FactorKind.LINE:
                    raise InvalidRegion(f'line factor {i} needs a finite interval')
                continue

            if bound.lower is None or bound.upper is None:
                raise InvalidRegion(f'factor {i} needs both lower and upper bounds')
            if not (math.isfinite(bound.lower) and math.isfinite(bound.upper)):
                raise InvalidRegion(f'factor {i} bounds must be finite')
            if not bound.lower < bound.upper:
                raise InvalidRegion(f'factor {i} interval [{bound.lower}, {bound.upper}] is empty')

            if factor.kind is FactorKind.CIRCLE:
                if bound.upper - bound.lower >= math.pi:
                    raise InvalidRegion(f'arc on factor {i} must be shorter than π')
            elif factor.bounded and not factor.lower <= bound.lower < bound.upper <= factor.upper:  # type: ignore[operator]
                raise InvalidRegion(f'factor {i} interval lies outside the manifold')

    @classmethod
    def box(cls, manifold: ManifoldSpec, *bounds: Optional[Tuple[float, float]]) -> 'Region':
        '''
        Convenience constructor: one (lower, upper) tuple per factor, or None for a whole circle.
        '''
        return cls(manifold, tuple(
            RegionFactor() if b is None else RegionFactor(float(b[0]), float(b[1])) for b in bounds
        ))

    @property
    def totally_convex(self) -> bool:
        return not any(b.whole for b in self.bounds)

    @property
    def notes(self) -> List[str]:
        if self.totally_convex:
            return []
        return [
            'region includes a whole circle: total convexity not guaranteed; pairs are connected by '
            'the shorter arc only'
        ]

    def _unwrap(self, index: int, theta):
        'Express an angle as lower + offset with offset in [0, 2π)'
        lower = self.bounds[index].lower
        return lower + np.mod(np.asarray(theta, dtype=float) - lower, TAU)

    def contains(self, point: Point, tolerance: float=1e-12) -> bool:
        for i, (factor, bound, value) in enumerate(zip(self.manifold.factors, self.bounds, point.coords)):
            if bound.whole:
                continue
            if factor.kind is FactorKind.CIRCLE:
                value = float(self._unwrap(i, value))
            if not bound.lower - tolerance <= value <= bound.upper + tolerance:  # type: ignore[operator]
                return False
        return True

    def clip(self, coords: np.ndarray) -> np.ndarray:
        'Clamp each column of (..., d) coordinates into the region'
        columns = []
        for i, (factor, bound) in enumerate(zip(self.manifold.factors, self.bounds)):
            column = coords[..., i]
            if factor.kind is FactorKind.LINE:
                column = np.clip(column, bound.lower, bound.upper)
            elif bound.whole:
                column = normalize_angle_array(column)
            else:
                # offsets past the arc's end clamp to whichever endpoint is closer on the circle
                unwrapped = self._unwrap(i, column)
                beyond = unwrapped > bound.upper
                nearer_lower = (unwrapped - bound.upper) > (bound.lower + TAU - unwrapped)
                unwrapped = np.where(beyond & nearer_lower, bound.lower, np.minimum(unwrapped, bound.upper))
                column = normalize_angle_array(unwrapped)
            columns.append(column)
        return np.stack(columns, axis=-1)

    def factor_grid(self, index: int, count: int) -> np.ndarray:
        factor, bound = self.manifold.factors[index], self.bounds[index]

        if count < 1:
            raise EmptyGrid(index + 1)
        if count == 1:
            raise InvalidSamplingPlan(f'factor {index + 1} needs at least 2 grid points')

        if factor.kind is FactorKind.CIRCLE and bound.whole:
            return TAU * np.arange(count) / count

        grid = np.linspace(bound.lower, bound.upper, count)
        if factor.kind is FactorKind.CIRCLE:
            grid = normalize_angle_array(grid)
        return grid

    def cell_size(self, index: int, count: int) -> float:
        factor, bound = self.manifold.factors[index], self.bounds[index]
        if factor.kind is FactorKind.CIRCLE and bound.whole:
            return TAU / count
        return (bound.upper - bound.lower) / max(count - 1, 1)  # type: ignore[operator]


def region_grid(region: Region, plan: 'SamplingPlan') -> np.ndarray:
    '''
    Tensor-product grid over the region, first factor varying slowest, optionally jittered.

    Returns:
        Array of shape (N, d)
    '''
    counts = [plan.count_for(i, f.kind) for i, f in enumerate(region.manifold.factors)]
    grids = [region.factor_grid(i, c) for i, c in enumerate(counts)]

    mesh = np.meshgrid(*grids, indexing='ij')
    points = np.stack([m.ravel() for m in mesh], axis=-1)

    if plan.jitter:
        rng = np.random.default_rng(plan.seed)
        cells = np.array([region.cell_size(i, c) for i, c in enumerate(counts)])
        offsets = rng.uniform(-0.5, 0.5, size=points.shape) * cells
        points = region.clip(points + offsets)

    return points


def sample_region(region: Region, plan: 'SamplingPlan') -> List[Point]:
    return [Point(tuple(float(v) for v in row)) for row in region_grid(region, plan)]


def circular_distance(a: Sequence[float], b: Sequence[float], spec: ManifoldSpec) -> float:
    'Max per-factor distance, measuring circle factors along the circle'
    worst = 0.0
    for f, u, v in zip(spec.factors, a, b):
        if f.kind is FactorKind.CIRCLE:
            worst = max(worst, abs(circle_displacement(u, v)))
        else:
            worst = max(worst, abs(u - v))
    return worst
