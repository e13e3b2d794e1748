import logging
from pathlib import Path

from dotenv import find_dotenv, load_dotenv
from pydantic import ValidationError
from pydantic_core import ErrorDetails

from goldilocks_sir.errors import ConfigParseError, ConfigValidationError
from goldilocks_sir.schemas import ScenarioConfig

logger = logging.getLogger(__name__)

_MALFORMED = {"json_invalid", "json_type"}


def _is_malformed(err: ErrorDetails) -> bool:
    # a top-level value that is not an object is malformed, not invalid
    return err["type"] in _MALFORMED or (
        err["type"] == "model_type" and not err["loc"]
    )


def load_environment() -> None:
    """
    Pull the nearest .env above the working directory into os.environ
    without overriding what is already set.
    """
    if load_dotenv(find_dotenv(usecwd=True)):
        logger.debug("loaded settings from .env")


def _location(loc: tuple[int | str, ...]) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def parse_config(text: str) -> ScenarioConfig:
    """
    Validate a JSON scenario document. Malformed documents raise
    ConfigParseError; well-formed ones that break a field invariant raise
    ConfigValidationError naming every offending field.
    """
    try:
        return ScenarioConfig.model_validate_json(text)
    except ValidationError as exc:
        errors = exc.errors()
        if any(_is_malformed(err) for err in errors):
            msg = f"Scenario document is not valid JSON: {errors[0]['msg']}"
            raise ConfigParseError(msg) from exc
        fields = [_location(err["loc"]) for err in errors]
        details = "; ".join(
            f"{field}: {err['msg']}" for field, err in zip(fields, errors, strict=True)
        )
        msg = f"Invalid scenario: {details}"
        raise ConfigValidationError(msg, fields) from exc


def load_config(path: Path) -> ScenarioConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        msg = f"Cannot read scenario file {path}: {exc}"
        raise ConfigParseError(msg) from exc
    return parse_config(text)


def serialize_config(cfg: ScenarioConfig) -> str:
    return cfg.model_dump_json(indent=2)
