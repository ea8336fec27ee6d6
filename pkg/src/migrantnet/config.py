"""Pipeline configuration: defaults, flat key-value files and environment overrides.

File grammar, one setting per line::

    # comment
    key = value

Blank lines and lines starting with ``#`` are ignored; keys are the field
names of :class:`PipelineConfig`; lists (``alpha_grid``, ``synth_countries``)
are comma separated. Precedence, lowest first: defaults, config file,
``MIGRANTNET_<KEY>`` environment variables, command-line flags.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, Optional

from .assortativity import DEFAULT_ALPHA_GRID
from .corpus import DEFAULT_RECENT_K, DEFAULT_REFERENCE_DATE
from .errors import MissingInputError, ValidationError
from .labeling import LabelingConfig
from .synth import SynthConfig

ENV_PREFIX = "MIGRANTNET_"


@dataclass(frozen=True)
class PipelineConfig:
    # inputs; relative paths resolve against the working directory
    users: str = "data/users.jsonl"
    tweets: str = "data/tweets.jsonl"
    edges: str = "data/edges.jsonl"
    # labeling
    year: int = 2018
    min_residence_days: int = 10
    beta: float = 0.5
    min_nationality_evidence: int = 5
    min_migration_count: int = 10
    # attachment
    entropy_threshold: float = 0.5
    min_support: int = 5
    # features
    recent_k: int = DEFAULT_RECENT_K
    reference_date: str = DEFAULT_REFERENCE_DATE.isoformat()
    # graph
    betweenness_sources: int = 2048
    betweenness_exact_max: int = 10_000
    path_sources: int = 1024
    path_exact_max: int = 5000
    top_k: int = 10
    degree_hist_bins: int = 0  # 0 = one row per observed degree
    # assortativity
    alpha_grid: tuple = DEFAULT_ALPHA_GRID
    # reporting
    hist_bins: int = 20
    seed: int = 0
    # synth
    synth_n_users: int = SynthConfig.n_users
    synth_migrant_fraction: float = SynthConfig.migrant_fraction
    synth_countries: tuple = SynthConfig.countries
    synth_p_in: float = SynthConfig.p_in
    synth_p_out: float = SynthConfig.p_out
    synth_tweets_per_user: int = SynthConfig.tweets_per_user
    synth_home_tweets: int = SynthConfig.home_tweets
    synth_visit_days: int = SynthConfig.visit_days
    synth_untagged_tweets: int = SynthConfig.untagged_tweets
    synth_vocab_size: int = SynthConfig.vocab_size
    synth_local_tag_share: float = SynthConfig.local_tag_share
    synth_compress: bool = False

    def __post_init__(self):
        for name in ("betweenness_sources", "path_sources", "top_k", "hist_bins", "recent_k",
                     "min_support", "min_migration_count"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.degree_hist_bins < 0:
            raise ValidationError("degree_hist_bins must be >= 0")
        if not 0.0 <= self.entropy_threshold <= 1.0:
            raise ValidationError("entropy_threshold must lie in [0, 1]")
        self.labeling()
        self.reference()

    def labeling(self) -> LabelingConfig:
        return LabelingConfig(year=self.year, min_residence_days=self.min_residence_days,
                              beta=self.beta, min_nationality_evidence=self.min_nationality_evidence)

    def reference(self) -> dt.date:
        try:
            return dt.date.fromisoformat(self.reference_date)
        except ValueError as exc:
            raise ValidationError(f"reference_date must be YYYY-MM-DD, got {self.reference_date!r}") from exc

    def synth(self) -> SynthConfig:
        kw = {f.name[len("synth_"):]: getattr(self, f.name) for f in fields(self)
              if f.name.startswith("synth_") and f.name != "synth_compress"}
        return SynthConfig(year=self.year, seed=self.seed, **kw)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


_FIELDS = {f.name: f for f in fields(PipelineConfig)}


def _coerce(key: str, raw):
    if key not in _FIELDS:
        raise ValidationError(f"unknown config key {key!r}")
    default = _FIELDS[key].default
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [x.strip() for x in raw.split(",") if x.strip()]
            return tuple(float(x) for x in items) if key == "alpha_grid" else tuple(items)
    except ValueError as exc:
        raise ValidationError(f"bad value for {key}: {raw!r}") from exc
    return raw


def parse_config_text(text: str, source="<config>") -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        out[key] = _coerce(key, value)
    return out


def load_config(path: Optional[str | Path] = None, overrides: Optional[Mapping] = None,
                environ: Optional[Mapping[str, str]] = None) -> PipelineConfig:
    """Resolve the configuration from file, environment and explicit overrides."""
    values = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise MissingInputError(f"config file not found: {path}")
        values.update(parse_config_text(path.read_text(encoding="utf-8"), str(path)))
    environ = os.environ if environ is None else environ
    for name, raw in sorted(environ.items()):
        if name.startswith(ENV_PREFIX):
            values[name[len(ENV_PREFIX):].lower()] = _coerce(name[len(ENV_PREFIX):].lower(), raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _coerce(key, value)
    return PipelineConfig(**values)
