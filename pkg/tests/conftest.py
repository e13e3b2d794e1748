import logging
from collections.abc import Generator

import numpy as np
import pytest
from sqlalchemy import StaticPool, create_engine
from sqlalchemy.orm import Session, sessionmaker

from goldilocks_sir.database import Base
from goldilocks_sir.dynamics import EpiState
from goldilocks_sir.intervention import switch_state
from goldilocks_sir.storage_local import MemoryArtifactStore

# Configure basic logging for tests
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)

REFERENCE_R0 = 2.5
REFERENCE_TAU_S = 2.0
RNG_SEED = 20200417

# Use an in-memory SQLite database for testing
SQLALCHEMY_DATABASE_URL = "sqlite:///:memory:"
engine = create_engine(
    SQLALCHEMY_DATABASE_URL,
    connect_args={"check_same_thread": False},
    poolclass=StaticPool,
)
TestingSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


@pytest.fixture
def session() -> Generator[Session, None, None]:
    Base.metadata.create_all(bind=engine)
    db = TestingSessionLocal()
    try:
        yield db
    finally:
        db.close()
        Base.metadata.drop_all(bind=engine)


@pytest.fixture
def outbreak() -> EpiState:
    """(0.995, 0.005, 0), the reference initial condition."""
    return EpiState.outbreak()


@pytest.fixture(scope="session")
def switch_point() -> EpiState:
    """State reached at tau_s = 2 under r0 = 2.5."""
    return switch_state(REFERENCE_R0, EpiState.outbreak(), REFERENCE_TAU_S)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(RNG_SEED)


@pytest.fixture
def memory_store(monkeypatch: pytest.MonkeyPatch) -> MemoryArtifactStore:
    monkeypatch.setenv("GOLDILOCKS_ARTIFACT_BACKEND", "memory")
    return MemoryArtifactStore()
