"""Pipeline configuration: ``key = value`` file -> environment -> defaults."""

import logging
import os
from pathlib import Path
from typing import Any, Mapping, Optional

from pydantic import ValidationError

from app.core.errors import DataValidationError
from app.models.pipeline import PipelineConfig, RuleThresholds
from app.models.analysis import TsneParams

logger = logging.getLogger("skysig.config_loader")

ENV_PREFIX = "SKYSIG_"

_NESTED = {
    "tsne": set(TsneParams.model_fields) - {"seed"},
    "rules": set(RuleThresholds.model_fields),
}
_TOP_LEVEL = set(PipelineConfig.model_fields) - set(_NESTED)
_PATH_KEYS = {"catalog", "skycultures_dir", "metadata", "overrides", "output_dir", "cluster_labels"}

KNOWN_KEYS: frozenset[str] = frozenset(
    _TOP_LEVEL | {f"{group}.{name}" for group, names in _NESTED.items() for name in names}
)


def parse_config_text(text: str, source: Optional[str] = None) -> dict[str, str]:
    """Parse line-based ``key = value`` text. ``#`` starts a comment line."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataValidationError(f"expected 'key = value', got {line!r}", source, lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise DataValidationError("empty key", source, lineno)
        if key not in KNOWN_KEYS:
            raise DataValidationError(f"unknown config key {key!r}", source, lineno)
        if key in values:
            raise DataValidationError(f"duplicate config key {key!r}", source, lineno)
        values[key] = value
    return values


def env_name(key: str) -> str:
    return ENV_PREFIX + key.replace(".", "__").upper()


def get_conf(key: str, file_values: Mapping[str, str]) -> Optional[str]:
    """Lookup a configuration value with file -> env resolution."""
    val = file_values.get(key)
    if val is None:
        val = os.getenv(env_name(key))
    return val


def _nest(flat: Mapping[str, Any]) -> dict[str, Any]:
    nested: dict[str, Any] = {}
    for key, value in flat.items():
        if "." in key:
            group, name = key.split(".", 1)
            nested.setdefault(group, {})[name] = value
        else:
            nested[key] = value
    return nested


def load_pipeline_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> PipelineConfig:
    """
    Build a validated PipelineConfig.

    Args:
        path: Optional config file; relative paths inside it resolve against its directory.
        overrides: Values from the command line (``output_dir``, ``seed``) that win over everything.

    Raises:
        DataValidationError: malformed file, unknown key, or a value out of range.
    """
    file_values: dict[str, str] = {}
    base_dir = Path.cwd()
    source = None
    if path is not None:
        path = Path(path)
        source = str(path)
        if not path.is_file():
            raise DataValidationError("config file not found", source)
        file_values = parse_config_text(path.read_text(encoding="utf-8"), source)
        base_dir = path.resolve().parent

    flat: dict[str, Any] = {}
    for key in sorted(KNOWN_KEYS):
        val = get_conf(key, file_values)
        if val is None:
            continue
        if key in _PATH_KEYS:
            p = Path(val)
            val = p if p.is_absolute() else base_dir / p
        flat[key] = val
    for key, value in (overrides or {}).items():
        if value is not None:
            flat[key] = value

    try:
        config = PipelineConfig(**_nest(flat))
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ()))
        raise DataValidationError(f"invalid config value for {where}: {first.get('msg')}", source) from exc

    logger.debug("Resolved pipeline config: %s", config.model_dump(mode="json"))
    return config
