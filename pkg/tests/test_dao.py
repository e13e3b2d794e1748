from collections.abc import Generator

import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import Session

from goldilocks_sir.dao import RunDAO
from goldilocks_sir.database import Base

DIGEST_A = "a" * 64
DIGEST_B = "b" * 64


@pytest.fixture
def in_memory_db(request: pytest.FixtureRequest) -> Generator[Session, None, None]:
    name = request.node.name  # type: ignore[attr-defined]
    db_url = f"sqlite:///file:memdb_dao_{name}?mode=memory&cache=shared&uri=true"
    engine = create_engine(
        db_url,
        connect_args={"check_same_thread": False},
    )
    Base.metadata.create_all(engine)
    with Session(engine) as session:
        yield session


def _create(dao: RunDAO, digest: str, scenario_id: str = "baseline") -> int:
    record = dao.create(
        digest=digest,
        scenario_id=scenario_id,
        s_infinity=0.1074,
        s_star=0.4,
        toolkit_version="0.3.0",
    )
    return record.id


def test_create_and_get_run(in_memory_db: Session) -> None:
    dao = RunDAO(in_memory_db)
    created = dao.create(
        digest=DIGEST_A,
        scenario_id="quasi-optimal",
        classification="QuasiOptimal",
        s_infinity=0.3942,
        s_star=0.4,
        toolkit_version="0.3.0",
        artifact_path="runs/quasi-optimal.run.json",
    )
    fetched = dao.get(created.id)
    assert fetched is not None
    assert fetched.scenario_id == "quasi-optimal"
    assert fetched.classification == "QuasiOptimal"
    assert fetched.artifact_path == "runs/quasi-optimal.run.json"
    assert dao.get_by_digest(DIGEST_A) is not None


def test_create_is_idempotent_by_digest(in_memory_db: Session) -> None:
    dao = RunDAO(in_memory_db)
    first = _create(dao, DIGEST_A)
    second = _create(dao, DIGEST_A, scenario_id="renamed")
    assert first == second
    assert len(dao.list()) == 1


def test_list_runs(in_memory_db: Session) -> None:
    dao = RunDAO(in_memory_db)
    _create(dao, DIGEST_A, "one")
    _create(dao, DIGEST_B, "two")
    runs = dao.list()
    expected_run_count = 2
    assert len(runs) == expected_run_count
    assert [r.scenario_id for r in runs] == ["one", "two"]
    assert [r.scenario_id for r in dao.list(limit=1, offset=1)] == ["two"]


def test_delete_run(in_memory_db: Session) -> None:
    dao = RunDAO(in_memory_db)
    run_id = _create(dao, DIGEST_A)
    assert dao.delete(run_id) is True
    assert dao.get(run_id) is None


def test_delete_not_found(in_memory_db: Session) -> None:
    dao = RunDAO(in_memory_db)
    assert dao.delete(9999) is False
