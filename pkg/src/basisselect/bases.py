"""Basis systems for functional data: clamped B-splines and Fourier bases.

A basis system is a recipe (kind, domain, number of bases, shape parameters);
evaluating it at a point grid yields a dense design matrix with one column per
basis function.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidConfigurationError, OutOfDomainError

__all__ = [
    "BasisSystem",
    "BasisMatrix",
    "make_bspline_basis",
    "make_fourier_basis",
    "evaluate_basis",
]


@dataclass(frozen=True)
class BasisSystem:
    """Description of a basis family on a fixed domain.

    ``kind`` is "bspline" or "fourier". For B-splines ``order`` is the spline
    order (degree + 1) and ``knots`` the full clamped knot sequence; for
    Fourier bases ``period`` is the base period of the trigonometric columns.
    """

    kind: str
    domain: tuple[float, float]
    num_bases: int
    order: int | None = None
    period: float | None = None
    knots: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        a, b = self.domain
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise InvalidConfigurationError(
                f"domain must be a finite interval with a < b, got ({a}, {b})"
            )


@dataclass
class BasisMatrix:
    """A basis system evaluated at a point grid.

    ``values`` has shape (len(points), num_bases); column k holds basis k
    evaluated at every point.
    """

    points: np.ndarray
    values: np.ndarray
    system: BasisSystem

    @property
    def num_points(self):
        return self.values.shape[0]

    @property
    def num_bases(self):
        return self.values.shape[1]

    @cached_property
    def gram(self):
        """values.T @ values, cached; the sampler reuses it every sweep."""
        return self.values.T @ self.values


def make_bspline_basis(domain, num_bases, order=4):
    """Clamped B-spline system with equally spaced interior knots.

    The knot sequence repeats each boundary ``order`` times and places
    ``num_bases - order`` interior knots uniformly, so num_bases = #interior
    knots + order. Order 4 gives cubic splines.
    """
    a, b = float(domain[0]), float(domain[1])
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise InvalidConfigurationError(
            f"domain must be a finite interval with a < b, got ({a}, {b})"
        )
    if int(order) != order or order < 1:
        raise InvalidConfigurationError(f"order must be a positive integer, got {order}")
    order = int(order)
    if int(num_bases) != num_bases or num_bases < order:
        raise InvalidConfigurationError(
            f"need num_bases >= order, got num_bases={num_bases} with order={order}"
        )
    num_bases = int(num_bases)
    interior = np.linspace(a, b, num_bases - order + 2)[1:-1]
    knots = np.concatenate([np.full(order, a), interior, np.full(order, b)])
    return BasisSystem(
        kind="bspline",
        domain=(a, b),
        num_bases=num_bases,
        order=order,
        knots=knots,
    )


def make_fourier_basis(domain, num_bases, period=None):
    """Fourier system: constant, then sin/cos pairs at increasing frequency.

    Columns are ordered (1, sin wt, cos wt, sin 2wt, cos 2wt, ...) with
    w = 2*pi/period, and each is scaled to unit L2 norm over one period:
    the constant is 1/sqrt(period), the trig columns carry sqrt(2/period).
    ``period`` defaults to the domain width.
    """
    a, b = float(domain[0]), float(domain[1])
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise InvalidConfigurationError(
            f"domain must be a finite interval with a < b, got ({a}, {b})"
        )
    if int(num_bases) != num_bases or num_bases < 1:
        raise InvalidConfigurationError(f"need num_bases >= 1, got {num_bases}")
    if period is None:
        period = b - a
    period = float(period)
    if not (np.isfinite(period) and period > 0):
        raise InvalidConfigurationError(f"period must be positive, got {period}")
    return BasisSystem(
        kind="fourier", domain=(a, b), num_bases=int(num_bases), period=period
    )


def _bspline_rows(knots, order, x):
    """Evaluate all B-spline bases at the points x via the Cox-de Boor recursion.

    Vectorized over points: the triangular recursion runs once per degree on
    the whole point array. Only the ``order`` bases whose support contains a
    point are computed; the rest of its row stays zero.
    """
    num_bases = knots.size - order
    # Knot span per point, clamped so the right endpoint takes its left limit.
    span = np.searchsorted(knots, x, side="right") - 1
    span = np.clip(span, order - 1, num_bases - 1)

    npts = x.size
    vals = np.zeros((npts, order))
    vals[:, 0] = 1.0
    left = np.zeros((npts, order))
    right = np.zeros((npts, order))
    for d in range(1, order):
        left[:, d] = x - knots[span + 1 - d]
        right[:, d] = knots[span + d] - x
        saved = np.zeros(npts)
        for r in range(d):
            temp = vals[:, r] / (right[:, r + 1] + left[:, d - r])
            vals[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, d - r] * temp
        vals[:, d] = saved

    out = np.zeros((npts, num_bases))
    cols = span[:, None] - (order - 1) + np.arange(order)
    np.put_along_axis(out, cols, vals, axis=1)
    return out


def _fourier_rows(num_bases, period, x):
    out = np.empty((x.size, num_bases))
    out[:, 0] = 1.0 / np.sqrt(period)
    amp = np.sqrt(2.0 / period)
    omega = 2.0 * np.pi / period
    for c in range(1, num_bases):
        j = (c + 1) // 2
        if c % 2 == 1:
            out[:, c] = amp * np.sin(j * omega * x)
        else:
            out[:, c] = amp * np.cos(j * omega * x)
    return out


def evaluate_basis(system, points):
    """Evaluate ``system`` at ``points`` and return a BasisMatrix.

    Points must be finite and lie inside the system's domain (inclusive).
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidConfigurationError("points must be a nonempty 1-D array")
    if not np.all(np.isfinite(x)):
        raise OutOfDomainError("points contain non-finite values")
    a, b = system.domain
    if x.min() < a or x.max() > b:
        raise OutOfDomainError(
            f"points must lie within [{a}, {b}], got range [{x.min()}, {x.max()}]"
        )
    if system.kind == "bspline":
        values = _bspline_rows(system.knots, system.order, x)
    elif system.kind == "fourier":
        values = _fourier_rows(system.num_bases, system.period, x)
    else:
        raise InvalidConfigurationError(f"unknown basis kind {system.kind!r}")
    return BasisMatrix(points=x.copy(), values=values, system=system)
