"""Experiment configuration: a JSON document with a fixed set of keys.

Example::

    {
      "scenario": {"kind": "clutter", "w1": 0.2, "w2": 0.1, "theta_o": 20.0,
                   "spacing_ratio": 0.5, "noise_power": 1e-4},
      "n": 17, "t": 85, "trials": 1000, "seed": 1,
      "chain": "ra+loading",
      "bins": 50
    }

Unknown keys anywhere in the document are rejected, so a misspelt option
never silently falls back to its default.
"""

import json
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..errors import ParseError
from ..models import ClutterScenario, PlaneWaveScenario

SCENARIOS = ("clutter", "plane_wave", "identity")
SPECTRUM_SOURCES = ("rmt", "true")
CHAINS = ("ra", "ra+loading", "ra+toiep", "me") + tuple(
    f"me+replace({s})" for s in SPECTRUM_SOURCES
)
METRICS = ("eigs", "spectral_norm", "log_lr", "spiked_log_lr", "noise_dim")

_SCENARIO_KEYS = {
    "clutter": ("kind", "w1", "w2", "theta_o", "spacing_ratio", "noise_power"),
    "plane_wave": ("kind", "angles", "powers", "spacing_ratio", "noise_power"),
    "identity": ("kind",),
}


@dataclass
class ExperimentConfig:
    scenario: dict = field(default_factory=lambda: {"kind": "clutter"})
    n: int = 17
    t: int = 85
    trials: int = 1000
    seed: int = 0
    chain: str = "ra"
    metrics: tuple = METRICS
    alpha: float = 0.05
    bins: int = 50
    noise_dim: object = "auto"  # "auto" or a fixed count for the Mestre noise cluster
    spiked_noise_dim: int = 4  # weakest eigenvectors used by the spiked sphericity
    reference_trials: int = 1000
    reference_seed: int = 1
    toiep_iterations: int = 5000
    threads: int = 1
    cache_dir: object = None  # where reference pdfs are cached; None = no cache
    trials_csv: object = None
    summary_json: object = None
    histogram_dir: object = None
    dump_dir: object = None  # per-trial stage matrices, when set

    def __post_init__(self):
        self.metrics = tuple(self.metrics)
        self.validate()

    def validate(self):
        kind = self.scenario.get("kind") if isinstance(self.scenario, dict) else None
        if kind not in SCENARIOS:
            raise ParseError(f"scenario kind must be one of {SCENARIOS}", field="scenario.kind")
        for key in self.scenario:
            if key not in _SCENARIO_KEYS[kind]:
                raise ParseError(f"unknown key for a {kind} scenario", field=f"scenario.{key}")
        for name in ("n", "t", "trials", "bins", "reference_trials", "threads"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ParseError("must be a positive integer", field=name)
        for name in ("seed", "reference_seed", "spiked_noise_dim", "toiep_iterations"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ParseError("must be a non-negative integer", field=name)
        if self.chain not in CHAINS:
            raise ParseError(f"chain must be one of {CHAINS}", field="chain")
        for m in self.metrics:
            if m not in METRICS:
                raise ParseError(f"unknown metric {m!r}", field="metrics")
        if not 0.0 < self.alpha < 1.0:
            raise ParseError("alpha must lie in (0, 1)", field="alpha")
        if self.noise_dim != "auto" and not (
            isinstance(self.noise_dim, int) and 0 <= self.noise_dim <= self.n
        ):
            raise ParseError("noise_dim must be 'auto' or an integer in [0, n]",
                             field="noise_dim")
        if self.spiked_noise_dim >= self.n:
            raise ParseError("spiked_noise_dim must be below n", field="spiked_noise_dim")
        return self

    # -- derived views ------------------------------------------------------

    @property
    def stages(self):
        """Chain split into stage names, e.g. ``("me", "replace(rmt)")``."""
        return tuple(self.chain.split("+"))

    @property
    def spectrum_source(self):
        m = re.fullmatch(r"me\+replace\((\w+)\)", self.chain)
        return m.group(1) if m else None

    def model(self):
        """Scenario dataclass (``None`` for the identity scenario)."""
        params = {k: v for k, v in self.scenario.items() if k != "kind"}
        kind = self.scenario["kind"]
        if kind == "clutter":
            return ClutterScenario(n=self.n, **params)
        if kind == "plane_wave":
            params = {k: tuple(v) if isinstance(v, list) else v for k, v in params.items()}
            return PlaneWaveScenario(n=self.n, **params)
        return None

    def to_dict(self):
        out = asdict(self)
        out["metrics"] = list(self.metrics)
        return out

    def replace(self, **changes):
        data = self.to_dict()
        data.update({k: v for k, v in changes.items() if v is not None})
        return config_from_dict(data)


def config_from_dict(data):
    if not isinstance(data, dict):
        raise ParseError("configuration must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    for key in data:
        if key not in known:
            raise ParseError("unknown configuration key", field=key)
    try:
        return ExperimentConfig(**data)
    except ParseError:
        raise
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc


def read_config(path):
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return config_from_dict(data)


def write_config(config, path):
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n")
