"""Simulation profiles: the physics and sensing parameter sets.

Two built-in profiles are provided. "rsrs" carries the measured real-robot
limits (9 cm/s, 1.6 rad/s, 2 m sensing, contact friction); "default" is the
uncalibrated simulator (fast, frictionless, unlimited sensing). Profiles can
also be loaded from flat key=value text files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace


class ConfigurationError(ValueError):
    """Invalid profile or run configuration."""


@dataclass(frozen=True)
class SimProfile:
    """Full parameter set for one simulated world.

    Defaults are the calibrated small-robot values; use :func:`get_profile`
    for the named built-ins.
    """

    v_max: float = 0.09           # m/s cap on |linear velocity|
    w_max: float = 1.6            # rad/s cap on |angular velocity|
    sensor_range: float = 2.0     # m; math.inf = bounded only by the arena
    body_radius: float = 0.07     # m, bump-shield-inclusive disc
    friction_mu: float = 0.8      # tangential friction in [0, 1]; 0 = frictionless
    arena_width: float = 1.70     # m
    arena_height: float = 1.42    # m
    wall_height_blocks_sensing: bool = False   # walls are invisible to the sensor
    dt: float = 0.1               # s
    episode_steps: int = 600
    n_agents: int = 8

    def __post_init__(self):
        for name in ("v_max", "w_max", "sensor_range", "body_radius", "dt"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0.0 <= self.friction_mu <= 1.0:
            raise ConfigurationError(f"friction_mu must be in [0, 1], got {self.friction_mu}")
        if self.arena_width <= 0 or self.arena_height <= 0:
            raise ConfigurationError("arena dimensions must be > 0")
        if self.episode_steps < 1:
            raise ConfigurationError(f"episode_steps must be >= 1, got {self.episode_steps}")
        if self.n_agents < 0:
            raise ConfigurationError(f"n_agents must be >= 0, got {self.n_agents}")
        if self.wall_height_blocks_sensing:
            raise ConfigurationError("walls are never visible to the sensor (must stay False)")

    def with_overrides(self, **kwargs) -> "SimProfile":
        return replace(self, **kwargs)


BUILTIN_PROFILES = {
    "rsrs": SimProfile(),
    "default": SimProfile(
        v_max=0.20,
        w_max=3.0,
        sensor_range=math.inf,
        friction_mu=0.0,
    ),
}

_BOOL_FIELDS = {"wall_height_blocks_sensing"}
_INT_FIELDS = {"episode_steps", "n_agents"}


def get_profile(name: str) -> SimProfile:
    """Look up a built-in profile by name."""
    try:
        return BUILTIN_PROFILES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown profile {name!r}; built-ins: {sorted(BUILTIN_PROFILES)}"
        ) from None


def parse_profile_text(text: str) -> SimProfile:
    """Parse flat key=value profile text; unknown keys are an error.

    Keys missing from the text keep the dataclass defaults. Blank lines and
    lines starting with '#' are ignored. sensor_range accepts "unlimited".
    """
    known = {f.name for f in fields(SimProfile)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in known:
            raise ConfigurationError(f"line {lineno}: unknown profile key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        if key in _BOOL_FIELDS:
            if val.lower() not in ("true", "false"):
                raise ConfigurationError(f"line {lineno}: {key} must be true/false")
            values[key] = val.lower() == "true"
        elif key in _INT_FIELDS:
            try:
                values[key] = int(val)
            except ValueError:
                raise ConfigurationError(f"line {lineno}: {key} must be an integer") from None
        elif key == "sensor_range" and val.lower() in ("unlimited", "inf"):
            values[key] = math.inf
        else:
            try:
                values[key] = float(val)
            except ValueError:
                raise ConfigurationError(f"line {lineno}: {key} must be a number") from None
    return SimProfile(**values)


def format_profile_text(profile: SimProfile) -> str:
    """Render a profile as key=value text (inverse of parse_profile_text)."""
    lines = []
    for f in fields(SimProfile):
        val = getattr(profile, f.name)
        if f.name in _BOOL_FIELDS:
            rendered = "true" if val else "false"
        elif f.name == "sensor_range" and math.isinf(val):
            rendered = "unlimited"
        else:
            rendered = repr(val) if isinstance(val, float) else str(val)
        lines.append(f"{f.name}={rendered}")
    return "\n".join(lines) + "\n"


def load_profile(path) -> SimProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_profile_text(fh.read())


def save_profile(profile: SimProfile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_profile_text(profile))


def resolve_profile(name_or_path: str) -> SimProfile:
    """Resolve a built-in name, falling back to a profile file path."""
    if name_or_path in BUILTIN_PROFILES:
        return BUILTIN_PROFILES[name_or_path]
    import os

    if os.path.exists(name_or_path):
        return load_profile(name_or_path)
    raise ConfigurationError(
        f"{name_or_path!r} is neither a built-in profile nor an existing file"
    )
