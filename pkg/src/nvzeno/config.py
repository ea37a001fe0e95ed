"""Experiment configuration in lab units.

The file format is flat TOML: one ``key = value`` per line, ``#`` starts a
comment, strings are double-quoted. Keys are case-insensitive, so
``rabi_MHz = 1.0`` and ``rabi_mhz = 1.0`` are the same setting. Every key is
optional; see :data:`KEYS` for names, units and defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .dynamics import CycleSchedule, nuclear_state
from .model import TWO_PI, PhysicalParams, resonance_frequency

MAX_CYCLES = 10**7

# key -> (default, description)
KEYS: dict[str, tuple[object, str]] = {
    "d_zfs_ghz": (2.87, "zero-field splitting D / 2pi, GHz"),
    "gamma_e_mhz_per_g": (2.8024, "electron gyromagnetic ratio / 2pi, MHz/G"),
    "gamma_n_khz_per_g": (1.0705, "13C gyromagnetic ratio / 2pi, kHz/G"),
    "a_zz_mhz": (130.0, "longitudinal hyperfine coupling / 2pi, MHz"),
    "a_xx_mhz": (None, "transverse hyperfine coupling / 2pi, MHz (default: a_zz_mhz)"),
    "a_yy_mhz": (None, "transverse hyperfine coupling / 2pi, MHz (default: a_zz_mhz)"),
    "bz_gauss": (100.0, "axial magnetic field, G"),
    "rabi_mhz": (1.0, "Rabi frequency / 2pi, MHz"),
    "detuning_mhz": (0.0, "drive carrier minus |0,up>-|-1,up> resonance, MHz"),
    "dtf_us": (2.0, "free-evolution interval, us"),
    "dtm_us": (2.0, "measurement-pulse interval, us"),
    "n_cycles": (20_000, "number of cycles"),
    "alpha": (0.5, "initial nuclear population of |up>"),
    "beta_re": (0.5, "real part of the initial nuclear coherence"),
    "beta_im": (0.0, "imaginary part of the initial nuclear coherence"),
    "omega_min_mhz": (None, "sweep/locus: lowest Rabi frequency / 2pi, MHz"),
    "omega_max_mhz": (None, "sweep/locus: highest Rabi frequency / 2pi, MHz"),
    "dtm_min_us": (None, "sweep/locus: shortest pulse, us"),
    "dtm_max_us": (None, "sweep/locus: longest pulse, us"),
    "n_omega": (None, "sweep: grid points along the Rabi axis"),
    "n_dtm": (None, "sweep: grid points along the pulse axis"),
    "n1_max": (3, "locus: largest n1"),
    "locus_points": (256, "locus: samples per curve"),
    "seed": (None, "seed for randomized validation"),
    "output": (None, "output path"),
}

SWEEP_KEYS = ("omega_min_mhz", "omega_max_mhz", "dtm_min_us", "dtm_max_us", "n_omega", "n_dtm")
INT_KEYS = {"n_cycles", "n_omega", "n_dtm", "n1_max", "locus_points", "seed"}

# window used by `locus` when the config has no sweep ranges
DEFAULT_LOCUS_RANGES = {"omega_min_mhz": 0.1, "omega_max_mhz": 10.0, "dtm_min_us": 0.1, "dtm_max_us": 10.0}


class ConfigError(ValueError):
    """A config value is missing, malformed or out of range."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class SweepGrid:
    omega_min: float  # MHz
    omega_max: float  # MHz
    dtm_min: float  # us
    dtm_max: float  # us
    n_omega: int = 2
    n_dtm: int = 2

    def __post_init__(self):
        if not self.omega_min < self.omega_max:
            raise ConfigError("omega_min_mhz", "must be below omega_max_mhz")
        if not self.dtm_min < self.dtm_max:
            raise ConfigError("dtm_min_us", "must be below dtm_max_us")
        if self.omega_min < 0 or self.dtm_min < 0:
            raise ConfigError("omega_min_mhz" if self.omega_min < 0 else "dtm_min_us", "must be non-negative")
        if self.n_omega < 2 or self.n_dtm < 2:
            raise ConfigError("n_omega" if self.n_omega < 2 else "n_dtm", "grid needs at least 2 points")


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def get(self, key: str):
        if key in self.values:
            return self.values[key]
        default = KEYS[key][0]
        if default is None and key in ("a_xx_mhz", "a_yy_mhz"):
            return self.get("a_zz_mhz")
        return default

    def with_overrides(self, **overrides) -> ExperimentConfig:
        vals = dict(self.values)
        for k, v in overrides.items():
            if v is not None:
                vals[k] = _coerce(k, v)
        return ExperimentConfig(vals)

    @property
    def params(self) -> PhysicalParams:
        try:
            p = PhysicalParams(
                d_zfs=TWO_PI * (self.get("d_zfs_ghz") * 1e9),
                gamma_e=TWO_PI * (self.get("gamma_e_mhz_per_g") * 1e6),
                gamma_n=TWO_PI * (self.get("gamma_n_khz_per_g") * 1e3),
                a_zz=TWO_PI * (self.get("a_zz_mhz") * 1e6),
                a_xx=TWO_PI * (self.get("a_xx_mhz") * 1e6),
                a_yy=TWO_PI * (self.get("a_yy_mhz") * 1e6),
                b_z=float(self.get("bz_gauss")),
                rabi=TWO_PI * (self.get("rabi_mhz") * 1e6),
                omega_drive=0.0,
                dt_f=self.get("dtf_us") * 1e-6,
                dt_m=self.get("dtm_us") * 1e-6,
            )
        except ValueError as exc:
            raise ConfigError("params", str(exc)) from None
        return p.replace(omega_drive=resonance_frequency(p) + TWO_PI * (self.get("detuning_mhz") * 1e6))

    @property
    def schedule(self) -> CycleSchedule:
        n = self.get("n_cycles")
        if not 1 <= n <= MAX_CYCLES:
            raise ConfigError("n_cycles", f"must be in [1, {MAX_CYCLES}]")
        p = self.params
        try:
            return CycleSchedule(p.dt_f, p.dt_m, n)
        except ValueError as exc:
            raise ConfigError("dtf_us", str(exc)) from None

    @property
    def initial_state(self):
        alpha = self.get("alpha")
        beta = complex(self.get("beta_re"), self.get("beta_im"))
        if not 0.0 <= alpha <= 1.0:
            raise ConfigError("alpha", "must lie in [0, 1]")
        if abs(beta) ** 2 > alpha * (1 - alpha) + 1e-12:
            raise ConfigError("beta_re", f"|beta|^2 = {abs(beta)**2:.6g} exceeds alpha(1-alpha) = {alpha*(1-alpha):.6g}")
        return nuclear_state(alpha, beta)

    def sweep(self, required: bool = True) -> SweepGrid | None:
        present = [k for k in SWEEP_KEYS if k in self.values]
        if not present:
            if required:
                raise ConfigError("omega_min_mhz", "sweep grid is missing (need " + ", ".join(SWEEP_KEYS) + ")")
            return None
        missing = [k for k in SWEEP_KEYS if k not in self.values]
        if missing and required:
            raise ConfigError(missing[0], "missing from the sweep grid")
        return SweepGrid(
            self.values.get("omega_min_mhz", DEFAULT_LOCUS_RANGES["omega_min_mhz"]),
            self.values.get("omega_max_mhz", DEFAULT_LOCUS_RANGES["omega_max_mhz"]),
            self.values.get("dtm_min_us", DEFAULT_LOCUS_RANGES["dtm_min_us"]),
            self.values.get("dtm_max_us", DEFAULT_LOCUS_RANGES["dtm_max_us"]),
            self.values.get("n_omega", 2),
            self.values.get("n_dtm", 2),
        )

    def user_units(self) -> dict:
        return {k: self.get(k) for k in KEYS if self.get(k) is not None}


def _coerce(key: str, value):
    if key not in KEYS:
        raise ConfigError(key, "unknown key")
    if key == "output":
        if not isinstance(value, (str, Path)):
            raise ConfigError(key, "must be a string path")
        return str(value)
    if isinstance(value, bool):
        raise ConfigError(key, "must be a number")
    if key in INT_KEYS:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(key, f"must be an integer, got {value!r}")
        return value
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(key, f"must be a finite number, got {value!r}")
    return float(value)


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("syntax", str(exc)) from None
    values = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            raise ConfigError(key, "tables are not supported; use flat key = value lines")
        k = key.lower()
        values[k] = _coerce(k, value)
    return ExperimentConfig(values)


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return parse_config(Path(path).read_text(encoding="utf-8"))


def format_config(cfg: ExperimentConfig) -> str:
    """Render every setting; floats use ``repr`` so re-reading is exact."""
    lines = ["# nvzeno experiment config"]
    for key, (_, desc) in KEYS.items():
        value = cfg.get(key)
        if value is None:
            continue
        if isinstance(value, str):
            text = '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
        else:
            text = repr(value)
        lines.append(f"{key} = {text}  # {desc}")
    return "\n".join(lines) + "\n"


