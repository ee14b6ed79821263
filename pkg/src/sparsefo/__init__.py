"""First-order model checking on relational structures guarded by sparse graphs."""

__version__ = "0.1.0"
