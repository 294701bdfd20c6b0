"""Run configuration: flat key=value sections, parsed with line numbers.

The grammar is INI-like: '[section]' headers, 'key = value' lines, '#'
or ';' comments.  Unknown sections or keys are hard errors with the
offending line number and a nearest-match hint, so typos cannot
silently fall back to defaults.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .plate import KOITER, LINEAR_BIHARMONIC, NON_NORMALIZED, NORMALIZED


@dataclass
class GridConfig:
    n1: int = 16
    n2: int = 16
    n3: int = 17


@dataclass
class PhysicsConfig:
    h: float = 1.0
    lam: float = 1.0
    mu: float = 1.0
    nu: float = 0.0
    curvature_model: str = NON_NORMALIZED
    plate_operator: str = KOITER


@dataclass
class TimeConfig:
    dt: float = 1e-3
    t_final: float = 0.01
    output_every: int = 1


@dataclass
class SolverConfig:
    pressure_tol: float = 1e-10
    pressure_max_iter: int = 200
    picard_tol: float = 1e-10
    picard_max_iter: int = 15
    relaxation: float = 1.0
    cfl_max: float = 0.5
    divergence_cleanup: bool = True
    epsilon_smallness: float = 0.25


@dataclass
class InitialDataConfig:
    preset: str = "zero"
    amplitude: float = 1e-3
    seed: int = 0
    kmax: int = 3
    snapshot: str = ""


@dataclass
class OutputConfig:
    directory: str = "out"
    csv: bool = True
    snapshots: bool = False


@dataclass
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    initial_data: InitialDataConfig = field(default_factory=InitialDataConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


_ALIASES = {
    "damping": ("physics", "nu"),
    "lambda": ("physics", "lam"),
    "viscosity": ("physics", "nu"),
}

_CHOICES = {
    ("physics", "curvature_model"): (NON_NORMALIZED, NORMALIZED),
    ("physics", "plate_operator"): (KOITER, LINEAR_BIHARMONIC),
}

_POSITIVE = {
    ("grid", "n1"), ("grid", "n2"), ("grid", "n3"),
    ("physics", "h"), ("physics", "lam"), ("physics", "mu"),
    ("time", "dt"), ("time", "t_final"), ("time", "output_every"),
    ("solver", "pressure_tol"), ("solver", "pressure_max_iter"),
    ("solver", "picard_tol"), ("solver", "picard_max_iter"),
    ("solver", "relaxation"), ("solver", "cfl_max"),
    ("solver", "epsilon_smallness"),
}

_NONNEGATIVE = {("physics", "nu"), ("initial_data", "amplitude")}


def _convert(raw, target_type, where):
    if target_type is bool:
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{where}: expected a boolean, got {raw!r}")
    try:
        return target_type(raw)
    except ValueError:
        raise ConfigError(
            f"{where}: expected {target_type.__name__}, got {raw!r}") from None


def parse_config(path: str) -> RunConfig:
    """Parse and validate a config file; unknown keys are errors."""
    cfg = RunConfig()
    sections = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    known = {name: {g.name: g.type for g in fields(type(obj))}
             for name, obj in sections.items()}

    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None

    section = None
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].split(";", 1)[0].strip()
        if not text:
            continue
        where = f"{path}:{lineno}"
        if text.startswith("[") and text.endswith("]"):
            name = text[1:-1].strip()
            if name not in sections:
                hint = difflib.get_close_matches(name, sections, n=1)
                extra = f"; did you mean [{hint[0]}]?" if hint else ""
                raise ConfigError(f"{where}: unknown section [{name}]{extra}")
            section = name
            continue
        if "=" not in text:
            raise ConfigError(f"{where}: expected 'key = value', got {text!r}")
        if section is None:
            raise ConfigError(f"{where}: key outside of any [section]")
        key, raw = (part.strip() for part in text.split("=", 1))
        if key not in known[section]:
            candidates = list(known[section]) + [a for a, (s, _) in _ALIASES.items()
                                                 if s == section]
            hint = difflib.get_close_matches(key, candidates, n=1)
            extra = ""
            if hint:
                target = _ALIASES.get(hint[0], (section, hint[0]))[1]
                label = (f"{target} ({hint[0]})" if hint[0] != target
                         else target)
                extra = f"; did you mean {label}?"
            raise ConfigError(f"{where}: unknown key {key!r} in [{section}]{extra}")
        obj = sections[section]
        current = getattr(obj, key)
        value = _convert(raw, type(current), where)
        setattr(obj, key, value)

    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    sections = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    for (sec, key) in _POSITIVE:
        v = getattr(sections[sec], key)
        if not v > 0:
            raise ConfigError(f"[{sec}] {key} must be positive, got {v}")
    for (sec, key) in _NONNEGATIVE:
        v = getattr(sections[sec], key)
        if v < 0:
            raise ConfigError(f"[{sec}] {key} must be >= 0, got {v}")
    for (sec, key), allowed in _CHOICES.items():
        v = getattr(sections[sec], key)
        if v not in allowed:
            raise ConfigError(
                f"[{sec}] {key} must be one of {allowed}, got {v!r}")
    if not 0.0 < cfg.solver.relaxation <= 1.0:
        raise ConfigError("[solver] relaxation must lie in (0, 1]")
    from .presets import REGISTRY
    if not cfg.initial_data.snapshot and cfg.initial_data.preset not in REGISTRY:
        raise ConfigError(
            f"[initial_data] unknown preset {cfg.initial_data.preset!r}; "
            f"registered: {sorted(REGISTRY)}")


def config_summary(cfg: RunConfig) -> str:
    """One line per setting, for echoing the effective config to the log."""
    parts = []
    for f in fields(cfg):
        obj = getattr(cfg, f.name)
        for g in fields(type(obj)):
            parts.append(f"{f.name}.{g.name}={getattr(obj, g.name)}")
    return "\n".join(parts)
