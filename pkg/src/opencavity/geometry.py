"""Cavity and Bragg-stack geometry.

A perfect mirror sits at ``x = -ell_c``.  The dielectric stack starts at
``x = 0`` and consists of ``2N - 1`` quarter-wave layers alternating between
the high index ``n1`` (odd layers, first and last) and the low index ``n2``
(even layers).  Beyond the stack the medium is vacuum.

Regions are numbered ``0`` (vacuum between the mirrors), ``1 .. 2N-1`` (the
layers) and ``2N`` (outside).  All regions are half-open intervals
``[x_lo, x_hi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class StackSpec:
    """Quarter-wave Bragg mirror with ``2N - 1`` layers.

    Parameters
    ----------
    n1 : float
        High refractive index (first and last layer).
    N : int
        Number of high-index layers; the stack has ``2N - 1`` layers.
    n2 : float
        Low refractive index, 1 by default.
    lambda0 : float
        Design wavelength fixing the quarter-wave layer widths.
    """

    n1: float
    N: int
    n2: float = 1.0
    lambda0: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be an integer >= 1, got {self.N!r}")
        if not self.n2 > 0:
            raise DomainError(f"n2 must be positive, got {self.n2!r}")
        # n1 == n2 is allowed as the degenerate "no mirror" case
        if self.n1 < self.n2:
            raise DomainError(f"need n1 >= n2, got n1={self.n1}, n2={self.n2}")
        if not self.lambda0 > 0:
            raise DomainError("lambda0 must be positive")
        object.__setattr__(self, "N", int(self.N))

    @property
    def delta(self) -> float:
        """Width of a high-index layer."""
        return self.lambda0 / (4.0 * self.n1)

    @property
    def alpha(self) -> float:
        """Width of a low-index layer."""
        return self.lambda0 / (4.0 * self.n2)

    @property
    def n_layers(self) -> int:
        return 2 * self.N - 1

    @property
    def thickness(self) -> float:
        return self.N * self.delta + (self.N - 1) * self.alpha

    def with_pairs(self, N: int) -> StackSpec:
        return StackSpec(self.n1, N, self.n2, self.lambda0)


@dataclass(frozen=True)
class CavityGeometry:
    """Perfect mirror at ``-ell_c`` facing a Bragg stack that starts at 0.

    ``area`` is the transverse mode area; it only rescales the mode
    normalization and couplings.
    """

    stack: StackSpec
    ell_c: float
    area: float = 1.0
    _starts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.ell_c > 0:
            raise DomainError(f"ell_c must be positive, got {self.ell_c!r}")
        if not self.area > 0:
            raise DomainError(f"area must be positive, got {self.area!r}")
        starts = np.concatenate(([-self.ell_c, 0.0], np.cumsum(self.widths[1:])))
        object.__setattr__(self, "_starts", starts)

    @classmethod
    def build(cls, n1, N, ell_c, n2=1.0, lambda0=1.0, area=1.0) -> CavityGeometry:
        return cls(StackSpec(n1, N, n2, lambda0), ell_c, area)

    def with_length(self, ell_c: float) -> CavityGeometry:
        return CavityGeometry(self.stack, ell_c, self.area)

    def with_pairs(self, N: int) -> CavityGeometry:
        return CavityGeometry(self.stack.with_pairs(N), self.ell_c, self.area)

    @property
    def N(self) -> int:
        return self.stack.N

    @property
    def n_regions(self) -> int:
        """Number of regions including the outside half-line."""
        return 2 * self.stack.N + 1

    @property
    def stack_end(self) -> float:
        """Position where the outside region starts, ``N(delta+alpha) - alpha``."""
        return self._starts[-1]

    @property
    def indices(self) -> np.ndarray:
        """Refractive index of every region ``0 .. 2N``."""
        s = self.stack
        n = np.empty(self.n_regions)
        n[0] = 1.0
        n[1:-1:2] = s.n1
        n[2:-1:2] = s.n2
        n[-1] = 1.0
        return n

    @property
    def widths(self) -> np.ndarray:
        """Width of every finite region ``0 .. 2N-1``."""
        s = self.stack
        w = np.empty(self.n_regions - 1)
        w[0] = self.ell_c
        w[1::2] = s.delta
        w[2::2] = s.alpha
        return w

    @property
    def starts(self) -> np.ndarray:
        """Left edge of every region ``0 .. 2N``."""
        return self._starts.copy()

    def layer_bounds(self, j: int) -> tuple[float, float]:
        """Interval ``[x_lo, x_hi)`` of region ``j``.

        Region ``2N`` is the outside half-line and has ``x_hi = inf``.
        """
        if int(j) != j or not 0 <= j <= 2 * self.stack.N:
            raise DomainError(f"region index {j!r} outside 0..{2 * self.stack.N}")
        j = int(j)
        lo = float(self._starts[j])
        hi = float(self._starts[j + 1]) if j < 2 * self.stack.N else math.inf
        return lo, hi

    def region_index(self, x):
        """Region index of each position ``x`` (array or scalar)."""
        xa = np.asarray(x, dtype=float)
        if np.any(xa < -self.ell_c):
            raise DomainError("position behind the perfect mirror (x < -ell_c)")
        j = np.searchsorted(self._starts, xa, side="right") - 1
        return j if j.ndim else int(j)

    def permittivity_at(self, x):
        """Relative permittivity at ``x``; half-open interval convention."""
        j = self.region_index(x)
        return self.indices[j] ** 2
