"""Link parameter sets for the 7-link walker and random model disturbances."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

LINK_NAMES = ("trunk", "thigh_l", "shank_l", "foot_l", "thigh_r", "shank_r", "foot_r")
N_LINKS = len(LINK_NAMES)


class ParameterError(ValueError):
    """Raised when an argument violates a documented precondition."""


@dataclass(frozen=True)
class LinkParams:
    """Inertial and geometric parameters of a single link."""

    mass: float
    inertia: float
    length: float
    com_offset: float

    def validate(self, name: str = "link") -> None:
        if not (self.mass > 0 and self.inertia > 0 and self.length > 0):
            raise ParameterError(f"{name}: mass, inertia and length must be positive")
        if not (0.0 <= self.com_offset <= self.length):
            raise ParameterError(f"{name}: com_offset must lie in [0, length]")


@dataclass(frozen=True)
class LinkSet:
    """Parameters of all seven links, keyed in LINK_NAMES order."""

    trunk: LinkParams
    thigh_l: LinkParams
    shank_l: LinkParams
    foot_l: LinkParams
    thigh_r: LinkParams
    shank_r: LinkParams
    foot_r: LinkParams

    def __post_init__(self):
        for name in LINK_NAMES:
            getattr(self, name).validate(name)

    def __iter__(self):
        return (getattr(self, name) for name in LINK_NAMES)

    def link(self, name: str) -> LinkParams:
        return getattr(self, name)

    @property
    def total_mass(self) -> float:
        return sum(p.mass for p in self)

    def to_dict(self) -> dict:
        return {
            name: {
                "mass": self.link(name).mass,
                "inertia": self.link(name).inertia,
                "length": self.link(name).length,
                "com_offset": self.link(name).com_offset,
            }
            for name in LINK_NAMES
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinkSet":
        return cls(**{name: LinkParams(**d[name]) for name in LINK_NAMES})


def default_link_set() -> LinkSet:
    """Anthropomorphic defaults, 80 kg total."""
    thigh = LinkParams(mass=8.5, inertia=0.15, length=0.50, com_offset=0.30)
    shank = LinkParams(mass=3.5, inertia=0.055, length=0.50, com_offset=0.28)
    foot = LinkParams(mass=1.25, inertia=0.007, length=0.20, com_offset=0.05)
    return LinkSet(
        trunk=LinkParams(mass=53.5, inertia=3.0, length=0.80, com_offset=0.35),
        thigh_l=thigh,
        shank_l=shank,
        foot_l=foot,
        thigh_r=thigh,
        shank_r=shank,
        foot_r=foot,
    )


@dataclass(frozen=True)
class Disturbance:
    """Per-link multiplicative mass/inertia scales and additive CoM shifts.

    Scale factors live in [1 - magnitude, 1 + magnitude] and CoM shifts in
    [-magnitude, magnitude] * L/2 for the link's length L.
    """

    mass_scale: np.ndarray
    inertia_scale: np.ndarray
    com_shift: np.ndarray
    seed: int
    magnitude: float = 0.15

    def __post_init__(self):
        object.__setattr__(self, "mass_scale", np.asarray(self.mass_scale, dtype=float))
        object.__setattr__(self, "inertia_scale", np.asarray(self.inertia_scale, dtype=float))
        object.__setattr__(self, "com_shift", np.asarray(self.com_shift, dtype=float))
        for arr in (self.mass_scale, self.inertia_scale, self.com_shift):
            if arr.shape != (N_LINKS,):
                raise ParameterError("disturbance arrays must have one entry per link")
        lo, hi = 1.0 - self.magnitude, 1.0 + self.magnitude
        if np.any(self.mass_scale < lo - 1e-12) or np.any(self.mass_scale > hi + 1e-12):
            raise ParameterError("mass scale factor out of bounds")
        if np.any(self.inertia_scale < lo - 1e-12) or np.any(self.inertia_scale > hi + 1e-12):
            raise ParameterError("inertia scale factor out of bounds")

    @classmethod
    def identity(cls) -> "Disturbance":
        return cls(
            mass_scale=np.ones(N_LINKS),
            inertia_scale=np.ones(N_LINKS),
            com_shift=np.zeros(N_LINKS),
            seed=0,
            magnitude=0.0,
        )

    def to_dict(self) -> dict:
        return {
            "mass_scale": self.mass_scale.tolist(),
            "inertia_scale": self.inertia_scale.tolist(),
            "com_shift": self.com_shift.tolist(),
            "seed": self.seed,
            "magnitude": self.magnitude,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Disturbance":
        return cls(
            mass_scale=np.array(d["mass_scale"]),
            inertia_scale=np.array(d["inertia_scale"]),
            com_shift=np.array(d["com_shift"]),
            seed=int(d["seed"]),
            magnitude=float(d["magnitude"]),
        )


def sample_disturbance(seed: int, magnitude: float = 0.15, base: LinkSet | None = None) -> Disturbance:
    """Draw a random disturbance, deterministic in the seed.

    Per link, in LINK_NAMES order, three uniforms are drawn in
    [-magnitude, magnitude]: the mass scale delta, the inertia scale delta,
    and the CoM shift as a fraction of L/2.
    """
    if not 0.0 <= magnitude <= 0.15:
        raise ParameterError("disturbance magnitude must lie in [0, 0.15]")
    base = base if base is not None else default_link_set()
    rng = np.random.default_rng(seed)
    mass_scale = np.empty(N_LINKS)
    inertia_scale = np.empty(N_LINKS)
    com_shift = np.empty(N_LINKS)
    for i, name in enumerate(LINK_NAMES):
        mass_scale[i] = 1.0 + rng.uniform(-magnitude, magnitude)
        inertia_scale[i] = 1.0 + rng.uniform(-magnitude, magnitude)
        frac = rng.uniform(-magnitude, magnitude)
        com_shift[i] = frac * base.link(name).length / 2.0
    return Disturbance(
        mass_scale=mass_scale,
        inertia_scale=inertia_scale,
        com_shift=com_shift,
        seed=seed,
        magnitude=magnitude,
    )


def build_model(base: LinkSet, dist: Disturbance) -> LinkSet:
    """Apply a disturbance to a base link set.

    Masses and inertias are multiplied by their scale factors; CoM offsets
    are shifted and clamped into [0, length].
    """
    links = {}
    for i, name in enumerate(LINK_NAMES):
        p = base.link(name)
        shifted = min(max(p.com_offset + dist.com_shift[i], 0.0), p.length)
        links[name] = replace(
            p,
            mass=p.mass * dist.mass_scale[i],
            inertia=p.inertia * dist.inertia_scale[i],
            com_offset=shifted,
        )
    return LinkSet(**links)
