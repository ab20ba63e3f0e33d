"""
Solver configuration module

``config.json`` at the repository root holds solver defaults, the budget
presets of every command, report settings and logging. Any key missing from
the file falls back to the defaults below, so an installed package without
the file still runs.
"""

# Standard library imports
import copy
import json
import logging
import logging.config
import os
from pathlib import Path
from typing import Any, Dict, Optional

ENV_CONFIG_PATH = "QUBO_ANNEALER_CONFIG"

DEFAULT_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DEFAULT_HANDLER_NAME = "qubo_annealer.default"

LOG_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
    "critical": logging.CRITICAL,
}

DEFAULT_SOLVER: Dict[str, Any] = {
    "engine": "parallel-trial",
    "initial_state_mode": "shared",
    "onehot": "moves",
    "seed": 0,
    "offset_increment_scale": 0.1,
    "t_end_ratio": 1e-3,
    "delta_samples": 100,
    "schedule_kind": "geometric",
    "workers": 1,
}

# sweeps are Monte Carlo steps per problem unit: a value for numpart, a node for graph commands
DEFAULT_PRESETS: Dict[str, Dict[str, Dict[str, Any]]] = {
    "numpart": {
        "quick": {"restarts": 4, "sweeps": 40},
        "paper": {"restarts": 10, "sweeps": 200, "time_limit_sec": 30},
    },
    "graphpart": {
        "quick": {"restarts": 4, "sweeps": 200},
        "paper": {"restarts": 20, "sweeps": 1000},
    },
}

DEFAULT_REPORT: Dict[str, Any] = {"schema_version": "1.0", "format": "json"}

DEFAULT_LOG_LEVEL = "warning"


def _repo_config_path() -> Path:
    return Path(__file__).parent.parent / "config.json"


def load_config(path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load the raw configuration dictionary.

    Lookup order: ``path``, the ``QUBO_ANNEALER_CONFIG`` environment variable,
    ``config.json`` at the repository root. Returns an empty dictionary when
    no file is found.

    Raises:
        FileNotFoundError: an explicitly named file does not exist.
        ValueError: the file is not a JSON object.
    """
    explicit = path or os.environ.get(ENV_CONFIG_PATH)
    config_path = Path(explicit) if explicit else _repo_config_path()
    if not config_path.exists():
        if explicit:
            raise FileNotFoundError(f"config file not found: {config_path}")
        return {}
    with open(config_path, "rt", encoding="utf-8") as config_file:
        try:
            raw = json.load(config_file)
        except json.JSONDecodeError as e:
            raise ValueError(f"{config_path}: invalid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ValueError(f"{config_path}: expected a JSON object at the top level")
    return raw


class SolverConfig:
    """
    Parsed configuration with module defaults filled in key by key.

    Built from the raw ``load_config()`` dictionary (all sections optional).
    """

    def __init__(self, raw: Optional[Dict[str, Any]] = None) -> None:
        raw = raw or {}
        self.solver: Dict[str, Any] = {**DEFAULT_SOLVER, **raw.get("solver", {})}
        self.presets: Dict[str, Dict[str, Dict[str, Any]]] = copy.deepcopy(DEFAULT_PRESETS)
        for command, presets in raw.get("presets", {}).items():
            merged = self.presets.setdefault(command, {})
            for name, values in presets.items():
                merged[name] = {**merged.get(name, {}), **values}
        self.report: Dict[str, Any] = {**DEFAULT_REPORT, **raw.get("report", {})}
        self.logging: Optional[Dict[str, Any]] = raw.get("logging")
        self.log_level: str = str(raw.get("log_level", DEFAULT_LOG_LEVEL))

        for command, presets in self.presets.items():
            for name, values in presets.items():
                if int(values.get("restarts", 0)) < 1 or float(values.get("sweeps", 0)) <= 0:
                    raise ValueError(
                        f"preset {command}.{name} needs restarts >= 1 and sweeps > 0, got {values}"
                    )

    def preset(self, command: str, name: str) -> Dict[str, Any]:
        """
        Budget preset ``name`` for ``command`` (``sweepk`` shares the ``graphpart`` presets).

        Raises:
            KeyError: unknown preset.
        """
        family = "graphpart" if command == "sweepk" else command
        try:
            return dict(self.presets[family][name])
        except KeyError as e:
            known = ", ".join(sorted(self.presets.get(family, {})))
            raise KeyError(f"unknown preset {name!r} for {family}; known: {known}") from e


def configure_logging(config: SolverConfig, level_override: Optional[str] = None) -> logging.Logger:
    """
    Set up logging for the ``qubo_annealer`` namespace.

    A ``logging`` section with a ``version`` key is passed to ``dictConfig``
    (with a default formatter when it defines none). Otherwise a single stderr
    handler is attached at ``log_level``; ``level_override`` replaces the level
    in both cases.
    """
    logger = logging.getLogger("qubo_annealer")
    logging_config = config.logging
    if logging_config and "version" in logging_config:
        logging_config = copy.deepcopy(logging_config)
        if "formatters" not in logging_config:
            logging_config["formatters"] = {"default": {"format": DEFAULT_LOG_FORMAT}}
            for handler in logging_config.get("handlers", {}).values():
                handler.setdefault("formatter", "default")
        logging.config.dictConfig(logging_config)
        if level_override:
            logger.setLevel(LOG_LEVELS.get(level_override.lower().strip(), logging.INFO))
        return logger

    log_level = LOG_LEVELS.get((level_override or config.log_level).lower().strip(), logging.WARNING)
    logger.setLevel(log_level)
    for handler in list(logger.handlers):
        if handler.get_name() == DEFAULT_HANDLER_NAME:
            logger.removeHandler(handler)
    log_handler = logging.StreamHandler()
    log_handler.setLevel(log_level)
    log_handler.setFormatter(logging.Formatter(DEFAULT_LOG_FORMAT))
    log_handler.set_name(DEFAULT_HANDLER_NAME)
    logger.addHandler(log_handler)
    return logger
