import hashlib
import json
from collections.abc import Mapping

from pydantic import JsonValue


def _canonical(value: JsonValue) -> JsonValue:
    # 17 significant digits identify a double exactly on every platform
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, Mapping):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_canonical(v) for v in value]
    return value


def run_digest(payload: Mapping[str, JsonValue]) -> str:
    """sha256 of the canonical JSON form of payload."""
    text = json.dumps(
        _canonical(dict(payload)), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
