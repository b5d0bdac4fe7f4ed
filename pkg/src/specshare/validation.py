"""Input coercion helpers shared by the estimator and scripts."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .config_io import config_from_dict, load_config
from .exceptions import DomainError
from .market_model import Allocation, MarketConfig


def check_config(obj) -> MarketConfig:
    """Accept a config, a parsed config document or a path to a TOML file."""
    if isinstance(obj, MarketConfig):
        return obj
    if isinstance(obj, dict):
        return config_from_dict(obj)
    if isinstance(obj, (str, Path)):
        return load_config(obj)
    raise DomainError(f"cannot interpret {type(obj).__name__} as a market config")


def check_allocation(config: MarketConfig, alloc) -> Allocation:
    """Accept an allocation or an ``(x, w)`` pair and check it fits ``config``."""
    if not isinstance(alloc, Allocation):
        try:
            x, w = alloc
        except (TypeError, ValueError):
            raise DomainError("allocation must be an Allocation or an (x, w) pair") from None
        alloc = Allocation(np.asarray(x, dtype=float), np.asarray(w, dtype=float))
    if alloc.n_sps != config.n_sps:
        raise DomainError(f"allocation has {alloc.n_sps} SPs but config has {config.n_sps}")
    if config.open_access_bw == 0 and np.any(alloc.open_qty > 0):
        raise DomainError("open_qty must be zero when there is no open-access band")
    return alloc
