from collections.abc import Generator
from contextlib import contextmanager

from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session

from goldilocks_sir.database import make_session_factory
from goldilocks_sir.errors import LedgerError


def get_db(url: str | None = None) -> Generator[Session, None, None]:
    """
    Provide a ledger session and close it when the caller is done, whether
    or not an exception occurred. Database failures surface as LedgerError.
    """
    try:
        db: Session = make_session_factory(url)()
    except SQLAlchemyError as exc:
        msg = f"Cannot open the run ledger: {exc}"
        raise LedgerError(msg) from exc
    try:
        yield db
    except SQLAlchemyError as exc:
        db.rollback()
        msg = f"Run ledger operation failed: {exc}"
        raise LedgerError(msg) from exc
    finally:
        db.close()


session_scope = contextmanager(get_db)
