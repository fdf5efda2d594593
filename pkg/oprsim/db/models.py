"""SQLAlchemy models for the results store."""

import json
import secrets
import string
from datetime import datetime, timezone

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import DeclarativeBase, relationship

from ..records import RunRecord


def generate_sweep_id() -> str:
    """Generate a 6-character alphanumeric sweep ID."""
    chars = string.ascii_lowercase + string.digits
    return ''.join(secrets.choice(chars) for _ in range(6))


class Base(DeclarativeBase):
    pass


class Sweep(Base):
    __tablename__ = "sweeps"

    id: str = Column(String(6), primary_key=True, default=generate_sweep_id)
    label: str = Column(String(255), default="")
    config: str = Column(Text, nullable=False)  # JSON document the sweep ran with
    digest: str = Column(String(64), nullable=False)
    version: str = Column(String(20), default="")
    created_at: datetime = Column(DateTime, default=lambda: datetime.now(timezone.utc))

    runs = relationship("Run", back_populates="sweep", cascade="all, delete-orphan", order_by="Run.id")

    def get_config(self) -> dict:
        try:
            return json.loads(self.config or "{}")
        except json.JSONDecodeError:
            return {}

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "digest": self.digest,
            "version": self.version,
            "runs": len(self.runs),
            "created_at": self.created_at.isoformat() if self.created_at else None,
        }


class Run(Base):
    __tablename__ = "runs"

    id: int = Column(Integer, primary_key=True, autoincrement=True)
    sweep_id: str = Column(String(6), ForeignKey("sweeps.id"), nullable=False)
    seed: int = Column(Integer, nullable=False)
    sigma: float = Column(Float, nullable=False)
    controller: str = Column(String(20), nullable=False)
    attack_step: int = Column(Integer, nullable=True)
    alarm_step: int = Column(Integer, nullable=True)
    recovery_steps: int = Column(Integer, nullable=False)
    final_distance: float = Column(Float, nullable=False)
    success: bool = Column(Boolean, nullable=False)
    reasons: str = Column(Text, default="[]")  # JSON array

    sweep = relationship("Sweep", back_populates="runs")

    @classmethod
    def from_record(cls, record: RunRecord) -> "Run":
        return cls(
            seed=record.seed,
            sigma=record.sigma,
            controller=record.controller,
            attack_step=record.attack_step,
            alarm_step=record.alarm_step,
            recovery_steps=record.recovery_steps,
            final_distance=record.final_distance,
            success=record.success,
            reasons=json.dumps(list(record.reasons)),
        )

    def to_record(self) -> RunRecord:
        return RunRecord(
            seed=self.seed,
            sigma=self.sigma,
            controller=self.controller,
            attack_step=self.attack_step,
            alarm_step=self.alarm_step,
            recovery_steps=self.recovery_steps,
            final_distance=self.final_distance,
            success=bool(self.success),
            reasons=tuple(json.loads(self.reasons or "[]")),
        )
