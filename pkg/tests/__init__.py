"""Test suite for opr-sim."""
