"""Database module."""

from .database import get_db, get_session, init_db, reset_engine
from .models import Base, Run, Sweep

__all__ = ["get_db", "get_session", "init_db", "reset_engine", "Base", "Run", "Sweep"]
