"""Flat ``section.key = value`` run configuration.

Example::

    # comments start with '#'
    grid.L = 3
    grid.N = 400
    physics.gamma = 5
    model.F1 = affine(1, 3)
    initial.n1 = bump(-0.4, 1, 0.5)
    sweep.gammas = 5, 10, 20, 40, 80

Values are numbers, ``true``/``false``, ``name(args)`` calls or comma
lists of those.  Unknown keys, duplicate keys and malformed values are all
reported together with their line numbers.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .grid import Grid
from .initial_data import ProfileSpec
from .model import GrowthModel, GrowthTerm
from .solver import SCHEMES, SchemeConfig


@dataclass(frozen=True)
class GridSection:
    L: float = 3.0
    N: int = 400


@dataclass(frozen=True)
class TimeSection:
    T: float = 5.0
    cfl: float = 0.9
    dt_max: float = 1e-2
    output_every: int = 0  # record every k steps; 0 disables
    output_dt: float = 0.05  # record at multiples of this time; 0 disables
    snapshot_times: tuple = ()


@dataclass(frozen=True)
class PhysicsSection:
    gamma: float = 5.0
    epsilon: float = 0.01
    scheme: str = "explicit"


@dataclass(frozen=True)
class ModelSection:
    F1: GrowthTerm = GrowthTerm("affine", 1.0, 3.0)
    F2: GrowthTerm = GrowthTerm("affine_truncated", 1.0, 1.0)
    G1: GrowthTerm = GrowthTerm("affine_truncated", 1.0, 1.0)
    G2: GrowthTerm = GrowthTerm("affine", 1.0, 1.0)


@dataclass(frozen=True)
class InitialSection:
    n1: tuple = (ProfileSpec("bump", (-0.4, 1.0, 0.5)),)
    n2: tuple = (ProfileSpec("bump", (0.4, 1.0, 0.5)),)


@dataclass(frozen=True)
class TolerancesSection:
    vac_tol: float = 1e-12
    tol_pos: float = 1e-13
    seg_tol: float = 1e-8  # relative to the initial total mass
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    p_tol: float = 1e-6
    clamp_limit: float = 1e-8  # relative to the initial total mass


@dataclass(frozen=True)
class OutputsSection:
    directory: str = "out"
    emit_plots: bool = True


@dataclass(frozen=True)
class SweepSection:
    gammas: tuple = (5.0, 10.0, 20.0, 40.0, 80.0)
    epsilons: tuple = (0.01,)
    implicit_from_gamma: float = 20.0
    implicit_dt_max: float = 1e-4
    workers: int = 1
    slope_max: float = -0.7
    noise: float = 0.05
    factor: float = 5.0


@dataclass(frozen=True)
class RunConfig:
    grid: GridSection = field(default_factory=GridSection)
    time: TimeSection = field(default_factory=TimeSection)
    physics: PhysicsSection = field(default_factory=PhysicsSection)
    model: ModelSection = field(default_factory=ModelSection)
    initial: InitialSection = field(default_factory=InitialSection)
    tolerances: TolerancesSection = field(default_factory=TolerancesSection)
    outputs: OutputsSection = field(default_factory=OutputsSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    def make_grid(self) -> Grid:
        return Grid(self.grid.L, self.grid.N)

    def make_model(self) -> GrowthModel:
        m = self.model
        return GrowthModel(F1=m.F1, F2=m.F2, G1=m.G1, G2=m.G2)

    def scheme_config(self, scheme: str | None = None) -> SchemeConfig:
        tol = self.tolerances
        return SchemeConfig(
            scheme=scheme or self.physics.scheme,
            cfl=self.time.cfl,
            dt_max=self.time.dt_max,
            newton_tol=tol.newton_tol,
            newton_max_iter=tol.newton_max_iter,
            vac_tol=tol.vac_tol,
            tol_pos=tol.tol_pos,
        )

    def with_values(self, **changes) -> "RunConfig":
        """Copy with dotted-key overrides, e.g. ``with_values(**{"physics.gamma": 10})``."""
        cfg = self
        for key, value in changes.items():
            section, name = key.split(".")
            cfg = replace(cfg, **{section: replace(getattr(cfg, section), **{name: value})})
        validate(cfg)
        return cfg


SECTIONS = {f.name: f.default_factory for f in fields(RunConfig)}


def split_top_level(text: str) -> list[str]:
    """Split on commas that are not inside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur).strip())
    return parts


def _bool(text):
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _int(text):
    v = float(text)
    if v != int(v):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _floats(text):
    if not text.strip():
        return ()
    return tuple(float(x) for x in split_top_level(text))


def _profiles(text):
    if not text.strip():
        return ()
    return tuple(ProfileSpec.parse(x) for x in split_top_level(text))


def _converter(section: str, name: str, default):
    if section == "model":
        return GrowthTerm.parse
    if section == "initial":
        return _profiles
    if isinstance(default, bool):
        return _bool
    if isinstance(default, int):
        return _int
    if isinstance(default, float):
        return float
    if isinstance(default, tuple):
        return _floats
    return str


def parse_config(text: str) -> RunConfig:
    problems = []
    values: dict[str, dict] = {name: {} for name in SECTIONS}
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append((lineno, f"expected 'section.key = value', got {raw.strip()!r}"))
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            problems.append((lineno, f"duplicate key {key!r} (first on line {seen[key]})"))
            continue
        seen[key] = lineno
        section, _, name = key.partition(".")
        if section not in SECTIONS or not name:
            problems.append((lineno, f"unknown key {key!r}"))
            continue
        defaults = SECTIONS[section]()
        if name not in {f.name for f in fields(defaults)}:
            problems.append((lineno, f"unknown key {key!r}"))
            continue
        try:
            values[section][name] = _converter(section, name, getattr(defaults, name))(value)
        except ConfigError as exc:
            problems.extend((lineno, f"{key}: {msg}") for _, msg in exc.problems)
        except ValueError as exc:
            problems.append((lineno, f"{key}: {exc}"))
    if problems:
        raise ConfigError(problems)
    cfg = RunConfig(**{name: SECTIONS[name]().__class__(**values[name]) for name in SECTIONS})
    validate(cfg, seen)
    return cfg


def validate(cfg: RunConfig, lines: dict | None = None) -> None:
    lines = lines or {}
    problems = []

    def check(ok, key, msg):
        if not ok:
            problems.append((lines.get(key, 0), f"{key}: {msg}"))

    check(cfg.grid.L > 0, "grid.L", "must be positive")
    check(cfg.grid.N >= 16, "grid.N", "must be at least 16")
    check(cfg.time.T >= 0, "time.T", "must be >= 0")
    check(0 < cfg.time.cfl <= 1, "time.cfl", "must lie in (0, 1]")
    check(cfg.time.dt_max > 0, "time.dt_max", "must be positive")
    check(cfg.time.output_every >= 0, "time.output_every", "must be >= 0")
    check(cfg.time.output_dt >= 0, "time.output_dt", "must be >= 0")
    check(all(0 <= s <= cfg.time.T for s in cfg.time.snapshot_times),
          "time.snapshot_times", "must lie in [0, T]")
    check(cfg.physics.gamma > 1, "physics.gamma", "gamma must exceed 1")
    check(cfg.physics.epsilon >= 0, "physics.epsilon", "must be >= 0")
    check(cfg.physics.scheme in SCHEMES, "physics.scheme", f"must be one of {', '.join(SCHEMES)}")
    tol = cfg.tolerances
    for name in ("vac_tol", "tol_pos", "seg_tol", "newton_tol", "p_tol", "clamp_limit"):
        check(getattr(tol, name) > 0, f"tolerances.{name}", "must be positive")
    check(tol.newton_max_iter >= 1, "tolerances.newton_max_iter", "must be >= 1")
    sw = cfg.sweep
    check(all(g > 1 for g in sw.gammas), "sweep.gammas", "all gammas must exceed 1")
    check(all(b > a for a, b in zip(sw.gammas, sw.gammas[1:])), "sweep.gammas",
          "must be strictly increasing")
    check(all(e >= 0 for e in sw.epsilons), "sweep.epsilons", "must be >= 0")
    check(sw.workers >= 1, "sweep.workers", "must be >= 1")
    if problems:
        raise ConfigError(sorted(problems))


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) if isinstance(v, float) else str(v) for v in value)
    return str(value)


def format_config(cfg: RunConfig) -> str:
    """Render every key; ``parse_config(format_config(c)) == c``."""
    out = []
    for section in SECTIONS:
        obj = getattr(cfg, section)
        for f in fields(obj):
            out.append(f"{section}.{f.name} = {_format_value(getattr(obj, f.name))}")
    return "\n".join(out) + "\n"


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())

