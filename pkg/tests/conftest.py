"""Pytest configuration and fixtures."""

import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from oprsim.config import ExperimentConfig
from oprsim.db.database import reset_engine
from oprsim.db.models import Base
from oprsim.dynamics import GaussianBelief, build_default_drone_model
from oprsim.target_set import Strip


@pytest.fixture(autouse=True)
def reset_database_engine():
    """Reset the global database engine before each test."""
    reset_engine()
    yield
    reset_engine()


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def test_db():
    """Create an in-memory SQLite database for testing."""
    engine = create_engine("sqlite:///:memory:")
    Base.metadata.create_all(engine)
    SessionLocal = sessionmaker(bind=engine)
    session = SessionLocal()

    yield session

    session.close()
    Base.metadata.drop_all(engine)


@pytest.fixture
def drone():
    """Default double-integrator drone model (dt = 0.02 s)."""
    return build_default_drone_model()


@pytest.fixture
def quiet_drone():
    """Drone model with every noise source switched off."""
    return build_default_drone_model().scaled(0.0)


@pytest.fixture
def default_strip():
    """The default safe band 9.5 m <= altitude <= 10.5 m."""
    return Strip(np.array([1.0, 0.0]), 9.5, 10.5)


@pytest.fixture
def hover_belief(drone):
    """Belief at the 10 m setpoint with the sensor covariance."""
    return GaussianBelief(np.array([10.0, 0.0]), drone.R)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_config():
    """Fast config: short episode, attack at step 150, two seeds, two noise levels."""
    config = ExperimentConfig()
    return replace(
        config,
        attack=replace(config.attack, start_step=150),
        recovery=replace(config.recovery, k_max=300, horizon=300),
        sweep=replace(config.sweep, noise=(0.5, 1.0), seeds=2, episode_length=700),
    )


@pytest.fixture
def planner_script(temp_dir):
    """Write an external planner script and return the command that runs it."""

    def make(body: str) -> list[str]:
        script = temp_dir / "planner.py"
        script.write_text("import json, sys\n" + body)
        return [sys.executable, str(script)]

    return make
