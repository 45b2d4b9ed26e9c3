import logging
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Config file is missing, unreadable or malformed."""


def parse_config(text: str, allowed: Optional[Iterable[str]] = None, source: str = "<config>") -> Dict[str, str]:
    """
    Parse line-oriented ``key = value`` settings.

    Args:
        text: File contents; ``#`` starts a comment, blank lines are skipped
        allowed: Accepted keys (long flag names); None accepts any key
        source: Name used in error messages

    Returns:
        Mapping of key to raw string value, later lines overriding earlier ones
    """
    accepted = set(allowed) if allowed is not None else None
    settings: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got {raw.strip()!r}")
        if accepted is not None and key not in accepted:
            raise ConfigError(f"{source}:{number}: unknown key {key!r}")
        settings[key] = value
    return settings


def load_config(path: Union[str, Path], allowed: Optional[Iterable[str]] = None) -> Dict[str, str]:
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {source}: {e}") from e
    settings = parse_config(text, allowed, str(source))
    logger.info("loaded %d settings from %s", len(settings), source)
    return settings
