from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Iterable, Union

from .errors import ConfigError
from .model import RateSet

__all__ = [
    "load_model",
    "model_from_json",
    "parse_params",
    "parse_window",
]

logger = logging.getLogger(__name__)


def model_from_json(text: str, source: str = "<string>") -> RateSet:
    """
    Build a rate set from the text of a model config document.

    Parameters
    ------
    text
        JSON text with a `"rates"` object, and optionally `"topology"` and `"allow_zeros"`.
    source
        Where the text came from, for error messages.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return RateSet.from_config(doc)
    except ConfigError as e:
        raise ConfigError(f"{source}: {e}") from e


def load_model(path: Union[str, Path]) -> RateSet:
    """
    Read a model config file (UTF-8 JSON).

    Examples
    --------
    ```python
    from altbd.ingress import load_model

    rates = load_model("docs/models/dam.json")
    ```
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read model file {str(path)!r}: {e.strerror}") from e
    rates = model_from_json(text, source=str(path))
    logger.debug("loaded %s model from %s", rates.topology, path)
    return rates


def _split_top_level(text: str) -> list[str]:
    # commas inside parentheses belong to expressions such as min(1, n)
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return parts


def parse_params(items: Iterable[str]) -> dict[str, str]:
    """
    Parse `k=v[,k=v...]` parameter overrides; later keys win.

    Values stay strings: the preset decides how to read them. Commas inside parentheses
    do not separate pairs.

    Examples
    --------
    ```{python}
    from altbd.ingress import parse_params

    parse_params(["lambda=1,theta=3", "beta=min(1, 0.5*n)"])
    ```
    """
    out: dict[str, str] = {}
    for item in items:
        for pair in _split_top_level(item):
            pair = pair.strip()
            if not pair:
                continue
            key, sep, value = pair.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key or not value:
                raise ConfigError(f"expected key=value, got {pair!r}")
            out[key] = value
    return out


def parse_window(text: str) -> tuple[int, int]:
    """Parse a `"w0,w1"` window with `w1 > w0 >= 2`."""
    parts = [p.strip() for p in str(text).split(",")]
    try:
        w0, w1 = (int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"a window is two integers 'w0,w1', got {text!r}") from None
    if not w1 > w0 >= 2:
        raise ConfigError(f"window must satisfy w1 > w0 >= 2, got {text!r}")
    return w0, w1
