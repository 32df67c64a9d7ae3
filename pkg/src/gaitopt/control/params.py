"""The 16-parameter reflex policy vector and its box bounds."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ..sim.links import ParameterError
from . import laws

PARAM_NAMES = (
    "K_GAS",
    "K_GLU",
    "K_HAM",
    "K_SOL",
    "K_TA_SOL",
    "K_TA",
    "K_VAS",
    "K_p_stance",
    "K_d_stance",
    "K_mix_GLU",
    "K_p_swing",
    "K_d_swing",
    "alpha_0",
    "C_d",
    "C_v",
    "l_clr",
)
N_PARAMS = laws.N_PARAMS

# parameters that must be nonnegative for the controller to be physical
NONNEGATIVE = np.array(
    [True, True, True, True, True, True, True, True, True, True, True, True, True, False, False, True]
)


def _load_fixture(name: str) -> dict:
    with resources.files("gaitopt.fixtures").joinpath(name).open("r") as fh:
        return json.load(fh)


def default_bounds() -> np.ndarray:
    """Per-parameter [low, high] box, shape (16, 2)."""
    d = _load_fixture("bounds.json")
    b = np.array([d[name] for name in PARAM_NAMES], dtype=float)
    return b


def reference_params() -> "PolicyParams":
    """The shipped flat-ground walking parameter set."""
    d = _load_fixture("reference_params.json")
    return PolicyParams(np.array([d[name] for name in PARAM_NAMES], dtype=float))


@dataclass(frozen=True)
class PolicyParams:
    """16 reflex/swing gains, ordered as PARAM_NAMES."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (N_PARAMS,):
            raise ParameterError("policy vector must have 16 entries")
        object.__setattr__(self, "values", v)

    def validate(self, bounds: np.ndarray | None = None) -> None:
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("policy parameters must be finite")
        if self.values[laws.L_CLR] <= 0:
            raise ParameterError("l_clr must be positive")
        if np.any(self.values[NONNEGATIVE] < 0):
            raise ParameterError("gain parameters must be nonnegative")
        if bounds is not None:
            if np.any(self.values < bounds[:, 0] - 1e-12) or np.any(
                self.values > bounds[:, 1] + 1e-12
            ):
                raise ParameterError("policy parameters outside box bounds")

    def __getitem__(self, name: str) -> float:
        return float(self.values[PARAM_NAMES.index(name)])

    def to_dict(self) -> dict:
        return {name: float(v) for name, v in zip(PARAM_NAMES, self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyParams":
        return cls(np.array([d[name] for name in PARAM_NAMES], dtype=float))

    def to_csv_row(self) -> str:
        return ",".join(repr(float(v)) for v in self.values)

    @classmethod
    def from_csv_row(cls, row: str) -> "PolicyParams":
        return cls(np.array([float(t) for t in row.strip().split(",")], dtype=float))

    @classmethod
    def zeros(cls) -> "PolicyParams":
        return cls(np.zeros(N_PARAMS))


def to_unit_box(values: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    """Affine map of parameter vectors into [0, 1]^16."""
    return (values - bounds[:, 0]) / (bounds[:, 1] - bounds[:, 0])


def from_unit_box(unit: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    return bounds[:, 0] + unit * (bounds[:, 1] - bounds[:, 0])
