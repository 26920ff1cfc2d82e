#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Pipeline configuration file: plain ``key = value`` lines

Keys are the long CLI flag names (``dynamic-sample`` or ``dynamic_sample``);
``#`` starts a comment. Values become click defaults, so explicit flags win.

    system = circle.txt
    box = -2,2,-2,2
    epsilon = 0.2
    delta = 1e-6
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Union

from pydantic import ValidationError

from varsample.exceptions import ConfigError
from varsample.model import PipelineConfig
from varsample.utils.common import convert_to_type

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_NAME = "varsample.conf"


class PipelineConfigManager:
    """
    Loads and validates a pipeline configuration file.

    Location: the ``--config`` path, else ./varsample.conf when it exists.
    """

    def __init__(self, config_file: Optional[Union[str, Path]] = None, search_dir: Optional[Path] = None):
        if config_file is None:
            candidate = (search_dir or Path.cwd()) / DEFAULT_CONFIG_NAME
            config_file = candidate if candidate.exists() else None
        self.config_file = Path(config_file) if config_file is not None else None
        self._values: Dict = {}
        self.config = PipelineConfig()
        if self.config_file is not None:
            self._load_config()

    def _load_config(self):
        try:
            text = self.config_file.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {self.config_file}: {e}")
        fields = PipelineConfig.model_fields
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{self.config_file}:{lineno}: expected 'key = value'")
            key = key.strip().replace("-", "_")
            if key not in fields:
                raise ConfigError(f"{self.config_file}:{lineno}: unknown key {key!r}")
            try:
                values[key] = convert_to_type(value.strip(), fields[key].annotation)
            except (ValueError, NotImplementedError) as e:
                raise ConfigError(f"{self.config_file}:{lineno}: bad value for {key}: {e}")
        try:
            self.config = PipelineConfig.model_validate(values)
        except ValidationError as e:
            raise ConfigError(f"invalid config {self.config_file}: {e}")
        self._values = values
        logger.debug(f"Loaded pipeline config from {self.config_file}: {sorted(values)}")

    @property
    def values(self) -> Dict:
        """Only the keys the file actually sets."""
        return dict(self._values)

    def default_map(self) -> Dict:
        """Defaults for every subcommand, in click's ``default_map`` shape."""
        values = dict(self._values)
        if "box" in values and values["box"] is not None:
            values["box"] = ",".join(repr(v) for v in values["box"])
        return {command: dict(values) for command in ("sample", "persist", "infer", "subsample", "verify")}
