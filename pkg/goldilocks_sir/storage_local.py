import logging
from pathlib import Path, PurePosixPath

from goldilocks_sir.storage import ArtifactStore, ArtifactStoreError, output_dir

logger = logging.getLogger(__name__)


def _check_name(name: str) -> PurePosixPath:
    path = PurePosixPath(name)
    if not name or path.is_absolute() or ".." in path.parts:
        msg = f"Artifact names must be relative and stay inside the store: {name!r}"
        raise ArtifactStoreError(msg)
    return path


class LocalArtifactStore(ArtifactStore):
    """
    Artifacts as files under a root directory, GOLDILOCKS_OUTPUT_DIR unless
    given explicitly.
    """

    def __init__(self, root: Path | None = None) -> None:
        self.root = root if root is not None else output_dir()

    def write_text(self, name: str, text: str) -> str:
        target = self.root.joinpath(*_check_name(name).parts)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            # newline="" keeps the "\n" row separators on every platform
            with target.open("w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            msg = f"Failed to write artifact {name}: {exc}"
            raise ArtifactStoreError(msg) from exc
        logger.debug("wrote %d characters to %s", len(text), target)
        return str(target)

    def read_text(self, name: str) -> str:
        target = self.root.joinpath(*_check_name(name).parts)
        try:
            with target.open(encoding="utf-8", newline="") as fh:
                return fh.read()
        except OSError as exc:
            msg = f"Failed to read artifact {name}: {exc}"
            raise ArtifactStoreError(msg) from exc

    def list_artifacts(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(
            p.relative_to(self.root).as_posix()
            for p in self.root.rglob("*")
            if p.is_file()
        )


class MemoryArtifactStore(ArtifactStore):
    """Dict-backed store; nothing touches the filesystem."""

    def __init__(self) -> None:
        self._texts: dict[str, str] = {}

    def write_text(self, name: str, text: str) -> str:
        key = _check_name(name).as_posix()
        self._texts[key] = text
        return f"memory://{key}"

    def read_text(self, name: str) -> str:
        key = _check_name(name).as_posix()
        try:
            return self._texts[key]
        except KeyError as exc:
            msg = f"Artifact not found: {name}"
            raise ArtifactStoreError(msg) from exc

    def list_artifacts(self) -> list[str]:
        return sorted(self._texts)
