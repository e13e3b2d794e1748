from datetime import datetime

from sqlalchemy import DateTime, Float, String, Text, func
from sqlalchemy.orm import Mapped, mapped_column

from goldilocks_sir.database import Base


class RunRecord(Base):
    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(primary_key=True, autoincrement=True)
    digest: Mapped[str] = mapped_column(
        String(64), unique=True, index=True, nullable=False
    )
    scenario_id: Mapped[str] = mapped_column(String, nullable=False)
    classification: Mapped[str | None] = mapped_column(String, nullable=True)
    s_infinity: Mapped[float] = mapped_column(Float, nullable=False)
    s_star: Mapped[float] = mapped_column(Float, nullable=False)
    artifact_path: Mapped[str | None] = mapped_column(Text, nullable=True)
    toolkit_version: Mapped[str] = mapped_column(String, nullable=False)
    created_at: Mapped[datetime] = mapped_column(
        DateTime, server_default=func.now(), nullable=False
    )
