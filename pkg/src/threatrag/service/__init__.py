from .config import EngineConfig, load_config
from .engine import Engine, IngestSummary

__all__ = ["EngineConfig", "load_config", "Engine", "IngestSummary"]
