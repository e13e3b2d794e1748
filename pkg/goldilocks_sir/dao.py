import logging
from collections.abc import Sequence

from sqlalchemy.orm import Session

from goldilocks_sir.models import RunRecord

logger = logging.getLogger(__name__)


class RunDAO:
    """Data Access Object for RunRecord."""

    def __init__(self, db: Session) -> None:
        self.db = db

    def get(self, run_id: int) -> RunRecord | None:
        return self.db.get(RunRecord, run_id)

    def get_by_digest(self, digest: str) -> RunRecord | None:
        return self.db.query(RunRecord).filter_by(digest=digest).first()

    def list(self, limit: int = 100, offset: int = 0) -> Sequence[RunRecord]:
        return (
            self.db.query(RunRecord)
            .order_by(RunRecord.id)
            .offset(offset)
            .limit(limit)
            .all()
        )

    def create(  # noqa: PLR0913
        self,
        *,
        digest: str,
        scenario_id: str,
        s_infinity: float,
        s_star: float,
        toolkit_version: str,
        classification: str | None = None,
        artifact_path: str | None = None,
    ) -> RunRecord:
        """Record a run; a digest seen before returns the existing row."""
        existing = self.get_by_digest(digest)
        if existing is not None:
            logger.info("run %s already recorded as #%d", digest[:12], existing.id)
            return existing
        record = RunRecord(
            digest=digest,
            scenario_id=scenario_id,
            classification=classification,
            s_infinity=s_infinity,
            s_star=s_star,
            artifact_path=artifact_path,
            toolkit_version=toolkit_version,
        )
        self.db.add(record)
        self.db.commit()
        self.db.refresh(record)
        return record

    def delete(self, run_id: int) -> bool:
        record = self.get(run_id)
        if record is None:
            return False
        self.db.delete(record)
        self.db.commit()
        return True
