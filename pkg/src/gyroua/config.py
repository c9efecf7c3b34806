"""Experiment configuration: INI files with sections, overridable from the CLI."""

import configparser
from dataclasses import asdict, dataclass, fields, replace

from gyroua.integrators import SCHEMES
from gyroua.reference import default_dt_ref

MODES = ("external", "poisson")


class ConfigError(ValueError):
    pass


def auto_n_tau(eps):
    """τ resolution used when ``n_tau = 0``: weak stiffness needs more modes."""
    if eps >= 0.5:
        return 256
    return 32


# section each key lives in when written out
_SECTIONS = {
    "physics": ("eps", "k", "eta", "field_set"),
    "numerics": ("dt", "t_f", "n_tau", "scheme", "prep_order", "y_order", "dt_ref"),
    "particles": ("mode", "n_particles", "seed", "nx1", "nx2"),
    "run": ("jobs", "workers", "record_every"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    eps: float = 1e-2
    k: float = 0.5
    eta: float = 0.05
    field_set: str = "paper_default"
    dt: float = 1e-3
    t_f: float = 1.0
    n_tau: int = 0
    scheme: str = "imex1"
    prep_order: int = 2
    y_order: int = 0
    dt_ref: float = 0.0
    mode: str = "external"
    n_particles: int = 4096
    seed: int = 2024
    nx1: int = 32
    nx2: int = 16
    jobs: int = 1
    workers: int = 1
    record_every: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.eps > 0:
            raise ConfigError("eps must be positive")
        if not self.dt > 0 or not self.t_f > 0:
            raise ConfigError("dt and t_f must be positive")
        steps = self.t_f / self.dt
        if abs(steps - round(steps)) > 1e-8 * max(1.0, steps):
            raise ConfigError(f"t_f = {self.t_f} is not a whole number of steps dt = {self.dt}")
        if self.n_tau and (self.n_tau < 4 or self.n_tau % 2):
            raise ConfigError("n_tau must be 0 (auto) or an even integer >= 4")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {{{', '.join(SCHEMES)}}}")
        if self.prep_order not in (1, 2, 3):
            raise ConfigError("prep_order must be 1, 2 or 3")
        if self.y_order not in (0, 1, 2, 3):
            raise ConfigError("y_order must be 0 (default pairing), 1, 2 or 3")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose from {{{', '.join(MODES)}}}")
        if self.n_particles < 1:
            raise ConfigError("n_particles must be >= 1")
        if self.nx1 < 6 or self.nx2 < 6:
            raise ConfigError("grid needs at least 6 nodes per direction")
        if not self.k > 0 or self.eta < 0:
            raise ConfigError("invalid k or eta")
        if self.jobs < 1 or self.workers < 1 or self.record_every < 1:
            raise ConfigError("jobs, workers and record_every must be >= 1")
        if self.field_set != "paper_default":
            raise ConfigError(f"unknown field set {self.field_set!r}; available: paper_default")

    @property
    def n_steps(self):
        return int(round(self.t_f / self.dt))

    @property
    def resolved_n_tau(self):
        return self.n_tau or auto_n_tau(self.eps)

    @property
    def resolved_dt_ref(self):
        return self.dt_ref or default_dt_ref(self.eps)

    @property
    def resolved_y_order(self):
        return self.y_order or None

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        try:
            return replace(self, **kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_ini(self):
        cp = configparser.ConfigParser()
        values = asdict(self)
        for sec, keys in _SECTIONS.items():
            cp[sec] = {key: repr(values[key]) if isinstance(values[key], float) else str(values[key]) for key in keys}
        return cp

    def write(self, path):
        with open(path, "w") as fh:
            self.to_ini().write(fh)


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_CASTS = {"float": float, "int": int, "str": str, float: float, int: int, str: str}


def load_config(path):
    """Read an INI file; unknown keys and unreadable files raise ConfigError."""
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    values = {}
    for sec in cp.sections():
        for key, raw in cp[sec].items():
            if key not in _TYPES:
                raise ConfigError(f"{path}: unknown key {key!r} in section [{sec}]")
            try:
                values[key] = _CASTS[_TYPES[key]](raw)
            except ValueError:
                raise ConfigError(f"{path}: bad value for {key}: {raw!r}") from None
    return ExperimentConfig(**values)
