"""Engine configuration and logging setup shared by the CLI, the API server and scripts."""

import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from .errors import ValidationError

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "CAYLEYWALK_CONFIG"
DEFAULT_CONFIG_FILE = "cayleywalk_config.json"
LOG_FORMAT = '%(asctime)s - {tag} - %(levelname)s - %(message)s'


@dataclass
class EngineConfig:
    vertex_cap: int = 2_000_000
    memory_floor_mb: int = 256
    family_cap: int = 8
    order_cap: int = 1 << 16
    saw_prefix_depth: int = 3
    workers: int = 1
    exact_limit: int = 60
    phi_exhaustive_size: int = 12
    phi_budget: int = 250_000
    stabilizer_vertex_cap: int = 5000
    stabilizer_max_automorphisms: int = 100_000
    extendability_max_visits: int = 1_000_000
    theorem_constant: float = 1.0
    log_level: str = "INFO"
    log_file: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def validate(self) -> bool:
        try:
            assert self.vertex_cap >= 1, "vertex_cap must be >= 1"
            assert self.memory_floor_mb >= 0, "memory_floor_mb must be >= 0"
            assert self.family_cap >= 0, "family_cap must be >= 0"
            assert self.order_cap >= 1, "order_cap must be >= 1"
            assert self.saw_prefix_depth >= 1, "saw_prefix_depth must be >= 1"
            assert self.workers >= 1, "workers must be >= 1"
            assert 0 <= self.exact_limit <= 10_000, "exact_limit must be between 0 and 10000"
            assert 1 <= self.phi_exhaustive_size <= 64, "phi_exhaustive_size must be between 1 and 64"
            assert self.phi_budget >= 1, "phi_budget must be >= 1"
            assert self.stabilizer_vertex_cap >= 1, "stabilizer_vertex_cap must be >= 1"
            assert self.stabilizer_max_automorphisms >= 1, "stabilizer_max_automorphisms must be >= 1"
            assert self.extendability_max_visits >= 1, "extendability_max_visits must be >= 1"
            assert self.theorem_constant > 0, "theorem_constant must be > 0"
            assert self.log_level.upper() in ("DEBUG", "INFO", "WARNING", "ERROR"), \
                "log_level must be DEBUG, INFO, WARNING or ERROR"
            return True
        except AssertionError as e:
            logger.error(f"Config validation failed: {e}")
            return False


def _read_config_file(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            if path.suffix.lower() in (".yaml", ".yml"):
                data = yaml.safe_load(fh)
            else:
                data = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"Config file not found: {path}", {"path": str(path)})
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ValidationError(f"Invalid config file {path}: {e}", {"path": str(path)})
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValidationError(f"Config file {path} must contain a mapping", {"path": str(path)})
    return data


def load_config(config_path: Optional[Union[str, Path]] = None, **overrides) -> EngineConfig:
    """Load an EngineConfig.

    Lookup order: explicit path, ``$CAYLEYWALK_CONFIG``, ``./cayleywalk_config.json`` if
    present, then built-in defaults. Keyword overrides whose value is not None win over
    the file.
    """
    data: Dict[str, Any] = {}
    if config_path is None:
        config_path = os.environ.get(CONFIG_ENV_VAR)
        if config_path is None and Path(DEFAULT_CONFIG_FILE).exists():
            config_path = DEFAULT_CONFIG_FILE
    if config_path is not None:
        data = _read_config_file(Path(config_path))
        logger.debug(f"Loaded configuration from {config_path}")

    data.update({k: v for k, v in overrides.items() if v is not None})

    known = {f.name for f in fields(EngineConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValidationError(f"Unknown config keys: {', '.join(unknown)}", {"keys": unknown})

    config = EngineConfig(**data)
    if not config.validate():
        raise ValidationError("Invalid engine configuration", config.to_dict())
    return config


def setup_logging(level: str = "INFO", log_file: Optional[str] = None, tag: str = "CAYLEYWALK") -> None:
    handlers = [logging.StreamHandler()]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT.format(tag=tag),
        handlers=handlers,
        force=True,
    )
