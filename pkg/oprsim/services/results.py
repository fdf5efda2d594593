"""Results service - stores sweeps and their run records in the SQLite results store."""

import json
from typing import Iterable

from sqlalchemy.orm import Session

from .. import __version__
from ..config import ExperimentConfig
from ..db.models import Run, Sweep
from ..errors import OprSimError
from ..records import Aggregate, RunRecord
from .sweep import aggregate


class ResultsService:
    def __init__(self, session: Session):
        self.session = session

    def record_sweep(self, config: ExperimentConfig, records: Iterable[RunRecord], label: str = "") -> Sweep:
        """Store a finished sweep with its configuration and every run record."""
        sweep = Sweep(
            label=label,
            config=json.dumps(config.to_dict(), sort_keys=True),
            digest=config.digest(),
            version=__version__,
        )
        sweep.runs = [Run.from_record(r) for r in records]
        self.session.add(sweep)
        self.session.commit()
        return sweep

    def list_sweeps(self) -> list[Sweep]:
        return self.session.query(Sweep).order_by(Sweep.created_at.desc()).all()

    def get(self, sweep_id: str) -> Sweep:
        sweep = self.session.query(Sweep).filter(Sweep.id == sweep_id).first()
        if not sweep:
            raise OprSimError(f"Sweep '{sweep_id}' not found")
        return sweep

    def find_by_digest(self, digest: str) -> list[Sweep]:
        """Earlier sweeps run with an identical configuration."""
        return self.session.query(Sweep).filter(Sweep.digest == digest).order_by(Sweep.created_at).all()

    def get_records(self, sweep_id: str) -> list[RunRecord]:
        records = [run.to_record() for run in self.get(sweep_id).runs]
        return sorted(records, key=lambda r: r.sort_key)

    def aggregates(self, sweep_id: str) -> list[Aggregate]:
        return aggregate(self.get_records(sweep_id))

    def delete(self, sweep_id: str) -> None:
        self.session.delete(self.get(sweep_id))
        self.session.commit()
