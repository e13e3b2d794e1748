import os
from abc import ABC, abstractmethod
from pathlib import Path

from goldilocks_sir.errors import ToolkitError

DEFAULT_OUTPUT_DIR = "./runs"


class ArtifactStoreError(ToolkitError):
    """Base exception for all artifact store errors."""


class ArtifactStore(ABC):
    """
    Interface for run artifact backends. Names are relative, '/'-separated.
    """

    @abstractmethod
    def write_text(self, name: str, text: str) -> str:
        """Store text under name and return where it went."""

    @abstractmethod
    def read_text(self, name: str) -> str: ...

    @abstractmethod
    def list_artifacts(self) -> list[str]: ...


def output_dir() -> Path:
    return Path(os.getenv("GOLDILOCKS_OUTPUT_DIR", DEFAULT_OUTPUT_DIR))


def get_artifact_store(root: Path | None = None) -> ArtifactStore:
    backend = os.getenv("GOLDILOCKS_ARTIFACT_BACKEND", "local").strip().lower()
    if backend in ("", "local"):
        from goldilocks_sir.storage_local import LocalArtifactStore

        return LocalArtifactStore(root)
    if backend == "memory":
        from goldilocks_sir.storage_local import MemoryArtifactStore

        return MemoryArtifactStore()
    msg = f"Unknown artifact backend: {backend}"
    raise ValueError(msg)
