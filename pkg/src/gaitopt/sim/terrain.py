"""Ground height profiles: flat, rough cells, and graded ramps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .links import ParameterError

FLAT, ROUGH, RAMP = 0, 1, 2

DEFAULT_CELL_WIDTH = 0.4
DEFAULT_ROUGH_MAGNITUDE = 0.08
ROUGH_X_MIN = -20.0
ROUGH_X_MAX = 420.0
RAMP_SEGMENT_LENGTH = 20.0
RAMP_MAX_GRADE = 0.20
RAMP_GRADE_STEP = 0.025


@dataclass(frozen=True)
class GroundProfile:
    """Piecewise terrain description.

    rough: piecewise-constant height offsets on fixed-width cells, sampled
    uniformly in +-magnitude from the seed. ramps: piecewise-linear height
    whose grade steps up in magnitude every RAMP_SEGMENT_LENGTH meters to a
    cap of RAMP_MAX_GRADE; terrain left of x = 0 is flat.
    """

    kind: int
    cell_width: float = DEFAULT_CELL_WIDTH
    offsets: np.ndarray = field(default_factory=lambda: np.zeros(0))
    x_min: float = 0.0
    breaks: np.ndarray = field(default_factory=lambda: np.zeros(0))
    break_heights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    grades: np.ndarray = field(default_factory=lambda: np.zeros(0))
    seed: int = 0
    magnitude: float = 0.0

    @classmethod
    def flat(cls) -> "GroundProfile":
        return cls(kind=FLAT)

    @classmethod
    def rough(
        cls,
        seed: int,
        magnitude: float = DEFAULT_ROUGH_MAGNITUDE,
        cell_width: float = DEFAULT_CELL_WIDTH,
        x_min: float = ROUGH_X_MIN,
        x_max: float = ROUGH_X_MAX,
    ) -> "GroundProfile":
        if magnitude < 0:
            raise ParameterError("rough magnitude must be nonnegative")
        if cell_width <= 0:
            raise ParameterError("cell width must be positive")
        n_cells = int(np.ceil((x_max - x_min) / cell_width))
        rng = np.random.default_rng(seed)
        offsets = rng.uniform(-magnitude, magnitude, size=n_cells)
        return cls(
            kind=ROUGH,
            cell_width=cell_width,
            offsets=offsets,
            x_min=x_min,
            seed=seed,
            magnitude=magnitude,
        )

    @classmethod
    def ramp(
        cls,
        direction: int,
        max_grade: float = RAMP_MAX_GRADE,
        grade_step: float = RAMP_GRADE_STEP,
        segment_length: float = RAMP_SEGMENT_LENGTH,
        n_segments: int = 24,
    ) -> "GroundProfile":
        """direction +1 for ramp-up, -1 for ramp-down."""
        if direction not in (1, -1):
            raise ParameterError("ramp direction must be +1 or -1")
        if not 0 < max_grade <= RAMP_MAX_GRADE:
            raise ParameterError(f"ramp grade must lie in (0, {RAMP_MAX_GRADE}]")
        grades = [0.0]
        breaks = [0.0]
        for k in range(1, n_segments):
            grades.append(direction * min(k * grade_step, max_grade))
            breaks.append(k * segment_length)
        heights = [0.0]
        for k in range(1, n_segments):
            heights.append(heights[-1] + grades[k - 1] * segment_length)
        return cls(
            kind=RAMP,
            breaks=np.asarray(breaks, dtype=float),
            break_heights=np.asarray(heights, dtype=float),
            grades=np.asarray(grades, dtype=float),
        )

    @classmethod
    def named(cls, name: str, seed: int = 0, magnitude: float = DEFAULT_ROUGH_MAGNITUDE) -> "GroundProfile":
        if name == "flat":
            return cls.flat()
        if name == "rough":
            return cls.rough(seed=seed, magnitude=magnitude)
        if name == "ramp-up":
            return cls.ramp(+1)
        if name == "ramp-down":
            return cls.ramp(-1)
        raise ParameterError(f"unknown terrain {name!r}")

    @property
    def name(self) -> str:
        if self.kind == FLAT:
            return "flat"
        if self.kind == ROUGH:
            return "rough"
        return "ramp-up" if (self.grades.size and self.grades[-1] > 0) else "ramp-down"

    def arrays(self):
        """Flat tuple consumed by the numba kernels."""
        return (
            np.int64(self.kind),
            np.float64(self.cell_width),
            np.float64(self.x_min),
            np.ascontiguousarray(self.offsets, dtype=np.float64),
            np.ascontiguousarray(self.breaks, dtype=np.float64),
            np.ascontiguousarray(self.break_heights, dtype=np.float64),
            np.ascontiguousarray(self.grades, dtype=np.float64),
        )


@njit(cache=True, nogil=True)
def ground_height_kernel(kind, cell_width, x_min, offsets, breaks, break_heights, grades, x):
    if kind == 0:
        return 0.0
    if kind == 1:
        idx = int(np.floor((x - x_min) / cell_width))
        if idx < 0 or idx >= offsets.shape[0]:
            return 0.0
        return offsets[idx]
    # ramp
    if x <= breaks[0]:
        return 0.0
    n = breaks.shape[0]
    seg = n - 1
    for i in range(1, n):
        if x < breaks[i]:
            seg = i - 1
            break
    return break_heights[seg] + grades[seg] * (x - breaks[seg])


def ground_height(profile: GroundProfile, x: float) -> float:
    """Terrain height at horizontal position x."""
    if not np.isfinite(x):
        raise ParameterError("x must be finite")
    return float(ground_height_kernel(*profile.arrays(), float(x)))
