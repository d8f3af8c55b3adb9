from datetime import datetime, timezone

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship

from .database import Base


class SearchRun(Base):
    """Archived optimizer runs (one row per certified winner)"""
    __tablename__ = "search_runs"

    id = Column(Integer, primary_key=True, index=True)

    # Search configuration
    dim = Column(Integer, nullable=False)
    seed = Column(Integer, nullable=False)
    method = Column(String(20), nullable=False)  # nelder-mead, anneal
    restarts = Column(Integer, nullable=False)
    iterations = Column(Integer, nullable=False)
    config = Column(Text, nullable=False)  # full SearchConfig as JSON

    # Winner (exact values stored as "p/q")
    best_density = Column(String(100), nullable=False, index=True)
    best_density_decimal = Column(String(40), nullable=False)
    density_value = Column(Float, nullable=False, index=True)  # for ordering
    basis = Column(Text, nullable=False)  # JSON rows of [num, den]
    label = Column(String(200), nullable=False)
    verdict = Column(String(20), nullable=False)

    created_at = Column(DateTime(timezone=True), default=lambda: datetime.now(timezone.utc), nullable=False)

    # Relationships
    records = relationship("AuditRecord", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<SearchRun(id={self.id}, dim={self.dim}, density='{self.best_density}')>"


class AuditRecord(Base):
    """Audit rows of the winner of a search run"""
    __tablename__ = "audit_records"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("search_runs.id", ondelete="CASCADE"), nullable=False)

    report = Column(String(50), nullable=False)  # hadwiger, theorem2
    check = Column(String(100), nullable=False)
    relation = Column(String(4), nullable=False)
    lhs = Column(Text, nullable=False)
    rhs = Column(Text, nullable=False)
    satisfied = Column(Boolean, nullable=False)
    kind = Column(String(10), default="check", nullable=False)  # check, conjecture, info

    # Relationships
    run = relationship("SearchRun", back_populates="records")
