"""opr-sim - attack recovery simulation for a GPS-spoofed drone."""

__version__ = "0.3.1"
