"""Uniform spatial grid for the truncated Cauchy problem."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Grid:
    """Uniform grid of N cells (N+1 nodes) on [-L, L] in mass coordinates."""

    half_width: float
    n_cells: int
    x: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_cells < 16:
            raise ValidationError(f"grid needs n_cells >= 16, got {self.n_cells}")
        if self.half_width <= 0:
            raise ValidationError(f"grid half_width must be positive, got {self.half_width}")
        x = np.linspace(-self.half_width, self.half_width, self.n_cells + 1)
        x.flags.writeable = False
        object.__setattr__(self, "x", x)

    @property
    def dx(self):
        return 2.0 * self.half_width / self.n_cells

    @property
    def n_nodes(self):
        return self.n_cells + 1

    def refined(self, factor=2):
        """Same domain with ``factor`` times as many cells."""
        return Grid(self.half_width, self.n_cells * int(factor))
