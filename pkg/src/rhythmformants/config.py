"""Run configuration with file/flag layering."""

import dataclasses
import json
from dataclasses import dataclass


class ConfigError(ValueError):
    """Raised for invalid configuration values."""


@dataclass
class RunConfig:
    """All pipeline knobs; precedence is CLI flag > config file > these defaults."""

    envelope_rate: float = 100.0
    smooth_s: float = 0.05
    windows: tuple = (3.0,)
    frames: int = 50
    n_peaks: int = 6
    band_hz: float = 10.0
    pad_factor: int = 4
    log_eps: float = 1e-6
    vad_frame_s: float = 0.020
    vad_hop_s: float = 0.010
    vad_theta: float = 0.1
    f0_frame_s: float = 0.040
    f0_hop_s: float = 0.010
    f0_min: float = 60.0
    f0_max: float = 400.0
    voicing_threshold: float = 0.3
    min_voiced_fraction: float = 0.1
    c_grid: tuple = (0.1, 1.0, 10.0, 100.0)
    gamma_grid: tuple = (0.001, 0.01, 0.1, 1.0)
    folds: int = 3
    seed: int = 0
    jobs: int = 1

    def validate(self) -> None:
        for w in self.windows:
            if not 1.0 <= w <= 10.0:
                raise ConfigError(f"window {w} s outside [1, 10]")
        if self.frames < 2:
            raise ConfigError(f"frames must be >= 2, got {self.frames}")
        if self.envelope_rate < 2 * self.band_hz:
            raise ConfigError(
                f"envelope_rate {self.envelope_rate} below Nyquist for {self.band_hz} Hz band"
            )
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("windows", "c_grid", "gamma_grid"):
            d[key] = list(d[key])
        return d


def load_config(path=None, overrides=None) -> RunConfig:
    """Build a RunConfig from defaults, an optional JSON file, and overrides."""
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        unknown = set(data) - {f.name for f in dataclasses.fields(RunConfig)}
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        values.update(data)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("windows", "c_grid", "gamma_grid"):
        if key in values:
            values[key] = tuple(values[key])
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg
