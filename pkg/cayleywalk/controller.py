import logging
import threading
import time
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .cayley import Ball, build_ball
from .config import EngineConfig
from .errors import UnsupportedGroupError, ValidationError
from .oracles import ElementOracle, PRESENTATION_ONLY, oracle_for, presentation_for, registry_names
from .words import Presentation, parse_presentation

logger = logging.getLogger(__name__)


class GroupController:
    """Holds the loaded group and the balls built for it."""

    def __init__(self, config: Optional[EngineConfig] = None):
        self.config = config or EngineConfig()
        self.presentation: Optional[Presentation] = None
        self.oracle: Optional[ElementOracle] = None
        self.group_name: Optional[str] = None
        self.presentation_file: Optional[str] = None
        self.group_loaded = False
        self._balls: Dict[int, Ball] = {}
        self._ball_lock = threading.Lock()
        logger.debug("GroupController initialized")

    def load_group(self, name: Optional[str] = None, presentation_file: Optional[Union[str, Path]] = None) -> bool:
        if (name is None) == (presentation_file is None):
            raise ValidationError("Give exactly one of a group name or a presentation file")
        if presentation_file is not None:
            path = Path(presentation_file)
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as e:
                raise ValidationError(f"Cannot read presentation file {path}: {e}", {"path": str(path)})
            presentation = parse_presentation(text, path.stem)
            oracle = None
            label = path.stem
        else:
            presentation = presentation_for(name)
            label = name.strip().lower()
            oracle = None if label in PRESENTATION_ONLY else oracle_for(label)
            if oracle is not None:
                label = oracle.name

        with self._ball_lock:
            self.presentation = presentation
            self.oracle = oracle
            self.group_name = label
            self.presentation_file = None if presentation_file is None else str(presentation_file)
            self.group_loaded = True
            self._balls.clear()
        logger.info(f"Loaded group {label} ({presentation.rank} generators, "
                    f"{'oracle' if oracle else 'presentation only'})")
        return True

    def unload_group(self):
        with self._ball_lock:
            self.presentation = None
            self.oracle = None
            self.group_name = None
            self.presentation_file = None
            self.group_loaded = False
            self._balls.clear()
        logger.info("Group unloaded")

    def set_config(self, config: EngineConfig):
        with self._ball_lock:
            self.config = config
            self._balls.clear()
        logger.info(f"Engine config updated (vertex_cap={config.vertex_cap})")

    def require_presentation(self) -> Presentation:
        if not self.group_loaded:
            raise ValidationError("No group loaded")
        return self.presentation

    def require_oracle(self) -> ElementOracle:
        self.require_presentation()
        if self.oracle is None:
            raise UnsupportedGroupError(f"'{self.group_name}' has no element oracle; only presentation "
                                        "commands are available", {"group": self.group_name})
        return self.oracle

    def ball(self, radius: int) -> Ball:
        """The ball of the given radius, built once per radius."""
        oracle = self.require_oracle()
        with self._ball_lock:
            cached = self._balls.get(radius)
            if cached is not None:
                return cached
            start = time.time()
            built = build_ball(oracle, radius, self.config.vertex_cap, self.config.memory_floor_mb)
            self._balls[radius] = built
            logger.debug(f"Cached ball r={radius} after {time.time() - start:.2f}s")
            return built

    def get_group_info(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {
            "loaded": self.group_loaded,
            "group": self.group_name,
            "presentation_file": self.presentation_file,
            "has_oracle": self.oracle is not None,
            "cached_radii": sorted(self._balls),
        }
        if self.presentation is not None:
            info["presentation"] = self.presentation.summary()
        return info

    @staticmethod
    def get_available_groups() -> Dict[str, Any]:
        return {"available_groups": registry_names(), "presentation_only": sorted(PRESENTATION_ONLY)}


def controller_for(group: Optional[str], presentation_file: Optional[str], config: EngineConfig) -> GroupController:
    controller = GroupController(config)
    controller.load_group(group, presentation_file)
    return controller
