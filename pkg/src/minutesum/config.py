"""Declarative pipeline configuration (JSON) with strict key validation."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, fields
from pathlib import Path

from .corpus import DEFAULT_NOISE
from .errors import ConfigError
from .summarizer import MmrConfig
from .trainer import TrainConfig

ARTIFACTS = {
    "corpus": "corpus.jsonl",
    "triplets": "triplets.jsonl",
    "build_report": "build_report.json",
    "model": "model.jsonl",
    "diff_report": "diff_report.json",
    "summaries": "summaries.jsonl",
    "rouge_report": "rouge_report.json",
    "vectors_out": "vectors.jsonl",
}

DEFAULTS = {
    "seed": 0,
    "noise": list(DEFAULT_NOISE),
    "rouge_unit": "char",
    "paths": {
        "minutes": None,
        "tasks": None,
        "vectors": None,
        "out_dir": None,
        **{name: None for name in ARTIFACTS},
    },
    "embedding": {"backend": "ngram", "dim": 256},
    "triplets": {"pos_threshold": 0.5, "neg_threshold": 0.9, "max_attempts": 100},
    "train": {f.name: f.default for f in fields(TrainConfig) if f.name != "seed"},
    "mmr": {f.name: f.default for f in fields(MmrConfig)},
}

_BACKENDS = ("ngram", "file")


def _merge(base: dict, override: dict, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        dotted = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {dotted!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {dotted!r} must be an object")
            out[key] = _merge(base[key], value, dotted + ".")
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class PipelineConfig:
    data: dict

    @classmethod
    def from_dict(cls, raw: dict | None = None) -> "PipelineConfig":
        cfg = cls(_merge(DEFAULTS, raw or {}))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON ({exc.msg})") from None
        if not isinstance(raw, dict):
            raise ConfigError("config file must contain a JSON object")
        paths = raw.get("paths")
        if isinstance(paths, dict):
            root = Path(path).resolve().parent
            raw["paths"] = {
                k: str(root / v) if isinstance(v, str) and not Path(v).is_absolute() else v
                for k, v in paths.items()
            }
        return cls.from_dict(raw)

    def override(self, raw: dict) -> "PipelineConfig":
        """Apply flag values; ``None`` entries mean "not given" and are skipped."""

        def prune(d):
            return {k: prune(v) if isinstance(v, dict) else v for k, v in d.items() if v is not None}

        cfg = PipelineConfig(_merge(self.data, prune(raw)))
        cfg.validate()
        return cfg

    def validate(self) -> None:
        d = self.data
        if isinstance(d["seed"], bool) or not isinstance(d["seed"], int):
            raise ConfigError("config key 'seed' must be an integer")
        if not isinstance(d["noise"], list) or not all(isinstance(x, str) for x in d["noise"]):
            raise ConfigError("config key 'noise' must be a list of strings")
        if d["rouge_unit"] not in ("char", "token"):
            raise ConfigError("config key 'rouge_unit' must be 'char' or 'token'")
        if d["embedding"]["backend"] not in _BACKENDS:
            raise ConfigError(f"config key 'embedding.backend' must be one of {_BACKENDS}")
        dim = d["embedding"]["dim"]
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise ConfigError("config key 'embedding.dim' must be a positive integer")
        try:
            self.train_config()
            self.mmr_config()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @property
    def seed(self) -> int:
        return self.data["seed"]

    @property
    def noise(self) -> list[str]:
        return list(self.data["noise"])

    def train_config(self) -> TrainConfig:
        return TrainConfig(seed=self.seed, **self.data["train"])

    def mmr_config(self) -> MmrConfig:
        return MmrConfig(**self.data["mmr"])

    def path(self, name: str, required: bool = True) -> Path | None:
        """Resolve a path: explicit entry first, then ``out_dir`` for artifacts."""
        value = self.data["paths"].get(name)
        if value is None and name in ARTIFACTS and self.data["paths"]["out_dir"] is not None:
            value = str(Path(self.data["paths"]["out_dir"]) / ARTIFACTS[name])
        if value is None:
            if required:
                raise ConfigError(f"path 'paths.{name}' is required but not declared")
            return None
        return Path(value)

    def hash(self) -> str:
        """Digest of every setting except file locations."""
        settings = {k: v for k, v in self.data.items() if k != "paths"}
        blob = json.dumps(settings, sort_keys=True, ensure_ascii=False).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    def meta(self, stage: str) -> dict:
        return {"stage": stage, "config_hash": self.hash(), "seed": self.seed}
