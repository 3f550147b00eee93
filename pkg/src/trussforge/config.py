"""Packaged default parameters and dict merging helpers."""
from __future__ import annotations

import copy
import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=1)
def _defaults_text() -> str:
    return resources.files("trussforge").joinpath("defaults.json").read_text()


def load_defaults() -> dict:
    """Fresh copy of ``defaults.json`` (callers may mutate it)."""
    return json.loads(_defaults_text())


def deep_merge(base: dict, overrides: dict | None) -> dict:
    out = copy.deepcopy(base)
    for key, value in (overrides or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out
