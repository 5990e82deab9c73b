"""Flat key-value pipeline configuration.

Format: one ``key = value`` per line, ``#`` starts a comment, blank lines
ignored. Keys are dotted paths validated against the registry below; unknown
keys and unparseable values raise ConfigError naming the key. Relative paths
are resolved against the config file's directory.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict

from .exceptions import ConfigError

_BOOL_WORDS = {"true": True, "yes": True, "1": True,
               "false": False, "no": False, "0": False}

# key -> (type tag, default); type tags: int, float, bool, str, path, list
REGISTRY = {
    "dataset.root": ("path", None),
    "dataset.strict": ("bool", False),

    "pipeline.stages": ("list", ["ingest", "extract", "synth", "compose",
                                 "assemble", "export", "metrics"]),
    "pipeline.seed": ("int", 0),
    "pipeline.fps": ("float", 30.0),

    "skin.h_low": ("float", 340.0),
    "skin.h_high": ("float", 50.0),
    "skin.s_low": ("float", 0.23),
    "skin.s_high": ("float", 0.68),
    "skin.v_low": ("float", 0.35),
    "skin.v_high": ("float", 1.0),
    "grabcut.k": ("int", 5),
    "grabcut.iterations": ("int", 5),
    "erode.radius": ("int", 1),
    "blob.min_area": ("int", 64),
    "extract.max_frames": ("int", 0),

    "gesture.kind": ("str", "circle"),
    "gesture.n_frames": ("int", 8),
    "gesture.step": ("float", 4.0),
    "gesture.center_x": ("float", 128.0),
    "gesture.center_y": ("float", 128.0),
    "gesture.radius": ("float", 40.0),
    "gesture.start_angle": ("float", 0.0),
    "gesture.orient_mask": ("bool", False),
    "synth.reference_frame": ("str", ""),

    "composer.base_channels": ("int", 32),
    "composer.n_res_blocks": ("int", 4),
    "composer.n_downsamples": ("int", 2),
    "composer.disc_channels": ("int", 32),
    "composer.disc_layers": ("int", 3),
    "composer.noise_channels": ("int", 1),
    "composer.tip_sigma": ("float", 5.0),
    "composer.l1_weight": ("float", 10.0),
    "composer.fg_epochs": ("int", 100),
    "composer.bg_epochs": ("int", 200),
    "composer.batch_size": ("int", 4),
    "composer.lr0": ("float", 2e-4),

    "assemble.domain": ("str", ""),
    "assemble.background_per_frame": ("bool", False),

    "cyclegan.source_envs": ("list", []),
    "cyclegan.target_envs": ("list", []),
    "cyclegan.base_channels": ("int", 64),
    "cyclegan.n_res_blocks": ("int", 9),
    "cyclegan.n_downsamples": ("int", 2),
    "cyclegan.input_size": ("int", 256),
    "cyclegan.disc_channels": ("int", 64),
    "cyclegan.disc_layers": ("int", 3),
    "cyclegan.lr0": ("float", 2e-4),
    "cyclegan.batch_size": ("int", 1),
    "cyclegan.const_epochs": ("int", 400),
    "cyclegan.decay_epochs": ("int", 100),
    "cyclegan.beta1": ("float", 0.5),
    "cyclegan.beta2": ("float", 0.999),
    "cyclegan.cycle_weight": ("float", 10.0),
    "cyclegan.buffer_size": ("int", 50),
    "cyclegan.checkpoint_interval": ("int", 0),

    "translate.checkpoint": ("path", None),
    "translate.direction": ("str", "ab"),
}

KNOWN_STAGES = ("ingest", "extract", "synth", "compose", "assemble",
                "translate", "export", "metrics")


class Config:
    """Typed view over a parsed config file."""

    def __init__(self, values: Dict[str, object], base_dir: Path):
        self.values = values
        self.base_dir = base_dir

    def __getitem__(self, key: str):
        if key not in REGISTRY:
            raise ConfigError(f"unknown config key: {key}")
        return self.values.get(key, REGISTRY[key][1])

    def section(self, prefix: str) -> Dict[str, object]:
        """All keys under a dotted prefix, with the prefix stripped."""
        out = {}
        for key, (_, default) in REGISTRY.items():
            if key.startswith(prefix + "."):
                out[key[len(prefix) + 1:]] = self.values.get(key, default)
        return out

    def snapshot(self) -> Dict[str, object]:
        """Every effective key/value (defaults included), JSON-friendly."""
        snap = {}
        for key in sorted(REGISTRY):
            value = self[key]
            snap[key] = str(value) if isinstance(value, Path) else value
        return snap


def parse_config(path) -> Config:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values: Dict[str, object] = {}
    with open(path) as fh:
        for line_number, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_number}: expected 'key = value'")
            key, _, raw_value = line.partition("=")
            key, raw_value = key.strip(), raw_value.strip()
            if key not in REGISTRY:
                raise ConfigError(f"{path}:{line_number}: unknown config key: {key}")
            values[key] = _coerce(key, raw_value, path.parent)
    cfg = Config(values, path.parent.resolve())
    for stage in cfg["pipeline.stages"]:
        if stage not in KNOWN_STAGES:
            raise ConfigError(f"pipeline.stages: unknown stage {stage!r}")
    return cfg


def _coerce(key: str, raw: str, base_dir: Path):
    kind = REGISTRY[key][0]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            word = raw.lower()
            if word not in _BOOL_WORDS:
                raise ValueError(f"not a boolean: {raw!r}")
            return _BOOL_WORDS[word]
        if kind == "path":
            p = Path(raw)
            return p if p.is_absolute() else (base_dir / p).resolve()
        if kind == "list":
            return [item.strip() for item in raw.split(",") if item.strip()]
        return raw
    except ValueError as err:
        raise ConfigError(f"{key}: {err}") from err


def write_config(values: Dict[str, object], path) -> None:
    """Write a config file with one key per line (values stringified)."""
    lines = []
    for key in sorted(values):
        if key not in REGISTRY:
            raise ConfigError(f"unknown config key: {key}")
        value = values[key]
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    Path(path).write_text("\n".join(lines) + "\n")
