"""TOML configs: parsing, canonical form and digest.

Layout::

    [market]
    open_access_bw = 1.0
    availability = 0.9
    degradation = 1.0          # optional
    demand_intercept = 1.0     # optional
    demand_slope = 1.0         # optional
    total_shared_bw = 2.0      # optional

    [sp.1]
    proprietary_bw = 1.0
    licensed_shared_bws = [0.5]

    [solver]                   # optional
    seed = 0
    tolerance = 1e-10
    restarts = 8
"""

from __future__ import annotations

import hashlib
import sys
from pathlib import Path
from typing import Any, Optional

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .exceptions import DomainError
from .market_model import MarketConfig, SpectrumEndowment

MARKET_KEYS = ("open_access_bw", "availability", "degradation", "demand_intercept",
               "demand_slope", "total_shared_bw")
SOLVER_KEYS = ("seed", "tolerance", "restarts", "max_iterations")


class ConfigError(DomainError):
    """A config file is malformed; the message names the offending field."""


def _number(where: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def config_from_dict(doc: dict) -> MarketConfig:
    """Build a :class:`MarketConfig` from a parsed document."""
    market = doc.get("market", {})
    if not isinstance(market, dict):
        raise ConfigError("market: expected a table")
    unknown = set(market) - set(MARKET_KEYS)
    if unknown:
        raise ConfigError(f"market.{sorted(unknown)[0]}: unknown key")
    sps = doc.get("sp")
    if not isinstance(sps, dict) or not sps:
        raise ConfigError("sp: at least one [sp.N] table is required")
    try:
        order = sorted(sps, key=int)
    except ValueError:
        raise ConfigError("sp: table names must be integers ([sp.1], [sp.2], ...)") from None
    if [int(k) for k in order] != list(range(1, len(order) + 1)):
        raise ConfigError("sp: tables must be numbered 1..N without gaps")
    ends = []
    for k in order:
        entry = sps[k]
        where = f"sp.{k}"
        if "proprietary_bw" not in entry:
            raise ConfigError(f"{where}.proprietary_bw: missing")
        extra = set(entry) - {"proprietary_bw", "licensed_shared_bws"}
        if extra:
            raise ConfigError(f"{where}.{sorted(extra)[0]}: unknown key")
        subs = entry.get("licensed_shared_bws", [])
        if not isinstance(subs, list):
            raise ConfigError(f"{where}.licensed_shared_bws: expected a list")
        try:
            ends.append(SpectrumEndowment(
                _number(f"{where}.proprietary_bw", entry["proprietary_bw"]),
                tuple(_number(f"{where}.licensed_shared_bws", v) for v in subs)))
        except ConfigError:
            raise
        except DomainError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    kwargs = {k: _number(f"market.{k}", market[k]) for k in MARKET_KEYS if k in market}
    for i, e in enumerate(ends):
        if e.proprietary_bw == 0 and kwargs.get("availability", 1.0) < 1:
            raise ConfigError(
                f"sp.{i + 1}.proprietary_bw: zero proprietary bandwidth is only allowed "
                "with availability = 1 (degenerate B = 0 case)")
    try:
        return MarketConfig(tuple(ends), **kwargs)
    except DomainError as exc:
        msg = str(exc)
        if msg.startswith(MARKET_KEYS):
            msg = f"market.{msg}"
        raise ConfigError(msg) from None


def config_to_dict(config: MarketConfig) -> dict:
    market = {
        "availability": config.availability,
        "degradation": config.degradation,
        "demand_intercept": config.demand_intercept,
        "demand_slope": config.demand_slope,
        "open_access_bw": config.open_access_bw,
    }
    if config.total_shared_bw is not None:
        market["total_shared_bw"] = config.total_shared_bw
    sps = {str(i + 1): {"proprietary_bw": e.proprietary_bw,
                        "licensed_shared_bws": list(e.licensed_shared_bws)}
           for i, e in enumerate(config.endowments)}
    return {"market": market, "sp": sps}


def solver_settings(doc: dict) -> dict:
    solver = doc.get("solver", {})
    unknown = set(solver) - set(SOLVER_KEYS)
    if unknown:
        raise ConfigError(f"solver.{sorted(unknown)[0]}: unknown key")
    return dict(solver)


def canonical_text(config: MarketConfig, solver: Optional[dict] = None) -> str:
    doc = config_to_dict(config)
    if solver:
        doc["solver"] = {k: solver[k] for k in sorted(solver)}
    return tomli_w.dumps(doc)


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_document(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML ({exc})") from None


def load_config(path) -> MarketConfig:
    return config_from_dict(load_document(path))
