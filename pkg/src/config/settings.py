import logging
import os
from pathlib import Path

import yaml

from src.models.bounds import OracleConfig
from src.models.numerics import QuadratureConfig, SearchConfig

logger = logging.getLogger(__name__)

TRUTHY = {"1", "true", "yes", "on"}


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in TRUTHY


def load_config():
    """Load configuration from YAML file with environment variable overrides."""
    # Default configuration
    config = {
        "quadrature": {
            "abs_tol": 1e-9,
            "rel_tol": 1e-9,
            "max_subdivisions": 200_000,
            "domain_margin_sigmas": 10.0,
            "max_depth": 15,
            "initial_panels": 8,
        },
        "grid": {"n_points": 512, "spacing": "log_linear"},
        "search": {"coarse_points": 128, "refine_tol": 1e-8},
        "oracle": {"method": "posterior_quadrature", "samples": 100_000, "seed": 20240917},
        "runtime": {"threads": os.cpu_count() or 1, "strict": False},
        "logging": {"level": "WARNING", "json": False},
    }

    # Load from YAML file if it exists
    config_path = Path(
        os.getenv("ZZBOUND_CONFIG", Path(__file__).parent.parent.parent / "zzbound.yaml")
    )
    if config_path.exists():
        try:
            with open(config_path) as f:
                yaml_config = yaml.safe_load(f)
                if yaml_config:
                    # Merge section by section so partial sections keep their defaults
                    for section, values in yaml_config.items():
                        if isinstance(values, dict) and section in config:
                            config[section].update(values)
                        else:
                            config[section] = values
                    logger.info(f"Configuration loaded from: {config_path}")
        except Exception as e:
            logger.warning(f"Failed to load {config_path.name}: {e}")
    else:
        logger.debug(f"No {config_path.name} found, using defaults")

    # Override with environment variables
    config["runtime"]["threads"] = max(
        1, int(os.getenv("ZZBOUND_THREADS", config["runtime"]["threads"]))
    )
    config["runtime"]["strict"] = _as_bool(
        os.getenv("ZZBOUND_STRICT", config["runtime"]["strict"])
    )
    config["logging"]["level"] = os.getenv("ZZBOUND_LOG_LEVEL", config["logging"]["level"]).upper()
    config["logging"]["json"] = _as_bool(os.getenv("ZZBOUND_LOG_JSON", config["logging"]["json"]))

    return config


# Load configuration
_config = load_config()

QUADRATURE_CONFIG = _config["quadrature"]
GRID_CONFIG = _config["grid"]
SEARCH_CONFIG = _config["search"]
ORACLE_CONFIG = _config["oracle"]
RUNTIME_CONFIG = _config["runtime"]
LOGGING_CONFIG = _config["logging"]


def default_quadrature() -> QuadratureConfig:
    return QuadratureConfig(**QUADRATURE_CONFIG)


def default_search() -> SearchConfig:
    return SearchConfig(**SEARCH_CONFIG)


def default_oracle() -> OracleConfig:
    """Oracle settings with the configured quadrature tolerances."""
    return OracleConfig(**ORACLE_CONFIG, quad=default_quadrature())
