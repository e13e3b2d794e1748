import os
from pathlib import Path

from sqlalchemy import Engine, create_engine
from sqlalchemy.orm import DeclarativeBase, Session, sessionmaker

DEFAULT_DATABASE_URL = "sqlite:///./runs/ledger.db"
_SQLITE_PREFIX = "sqlite:///"


class Base(DeclarativeBase):
    """Base class for ORM models."""


def database_url() -> str:
    return os.getenv("GOLDILOCKS_DATABASE_URL", DEFAULT_DATABASE_URL)


def make_engine(url: str | None = None) -> Engine:
    url = url or database_url()
    if not url.startswith(_SQLITE_PREFIX):
        return create_engine(url)
    path = url.removeprefix(_SQLITE_PREFIX)
    if path and ":memory:" not in path and not path.startswith("file:"):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
    # SQLite needs check_same_thread when sessions cross threads
    return create_engine(url, connect_args={"check_same_thread": False})


def make_session_factory(url: str | None = None) -> sessionmaker[Session]:
    """Session factory bound to the ledger, creating its tables on first use."""
    engine = make_engine(url)
    Base.metadata.create_all(bind=engine)
    return sessionmaker(autocommit=False, autoflush=False, bind=engine)
