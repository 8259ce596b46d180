"""Flat key-value run configuration.

Config files are plain text, one ``key = value`` per line, ``#`` comments.
Every key can be overridden by an environment variable named
``BINDERY_<KEY>`` (upper-cased key). Unknown keys in a config file are an
error so typos do not silently fall back to defaults.
"""

import os
from dataclasses import dataclass, fields


ENV_PREFIX = "BINDERY_"


@dataclass
class Config:
    # Reproducibility
    seed: int = 13

    # Dedup (content fingerprints)
    shingle_size: int = 5
    minhash_hashes: int = 128
    dedup_content_threshold: float = 0.8
    dedup_title_author: bool = True

    # Ingest heuristics
    front_window_frac: float = 0.05
    front_short_line_len: int = 25
    front_short_line_ratio: float = 0.30
    page_separator: str = "\n"
    mirror_base: str = "https://www.gutenberg.org/cache/epub"

    # Segmentation
    header_max_len: int = 60
    numbering_gap_tolerance: int = 1

    # Characters
    min_mentions: int = 3
    pronoun_sentence_window: int = 2
    interaction_window: int = 30
    interaction_min_co: int = 5
    timeline_top_k: int = 10

    # Book analytics
    vocab_top_common: int = 10000
    vocab_list_len: int = 20
    embed_dim: int = 100
    embed_window: int = 5
    embed_epochs: int = 10
    embed_min_count: int = 100
    embed_vocab_max: int = 200000
    embed_negatives: int = 5
    embed_learning_rate: float = 0.025
    similar_top_k: int = 10

    # Corpus analytics
    rank_share_ranks: int = 9
    top2_outlier_threshold: float = 10.0
    top2_histogram_bins: int = 20
    gender_time_bins: int = 10

    # Execution
    jobs: int = 1
    lexicon_dir: str = ""  # empty = bundled data files

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def load(cls, path=None, env=None):
        """Build a config from defaults, an optional file, then env overrides."""
        values = {}
        if path is not None:
            values.update(_read_config_file(path))
        env = os.environ if env is None else env
        for name in cls.field_names():
            env_key = ENV_PREFIX + name.upper()
            if env_key in env:
                values[name] = env[env_key]
        cfg = cls()
        for key, raw in values.items():
            if key not in cls.field_names():
                raise KeyError(f"unknown config key: {key!r}")
            setattr(cfg, key, _coerce(getattr(cfg, key), raw))
        return cfg


def _read_config_file(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            values[key.strip()] = raw.strip()
    return values


def _coerce(default, raw):
    if not isinstance(raw, str):
        return raw
    if isinstance(default, bool):
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw
