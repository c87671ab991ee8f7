"""Machining chatter detection from persistent homology of delay embeddings."""
from .errors import ChatterError, ConfigError, DataError, NumericError
from .persistence import PersistenceDiagram, cloud_persistence, rips_persistence

__version__ = "0.1.0"

__all__ = ["ChatterError", "ConfigError", "DataError", "NumericError",
           "PersistenceDiagram", "cloud_persistence", "rips_persistence"]
