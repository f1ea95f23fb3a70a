"""Exception hierarchy shared across the engine."""


class ThreatragError(Exception):
    """Base class for all engine errors."""


class ConfigError(ThreatragError):
    """Invalid configuration: bad selector syntax, missing column, bad paths."""


class IntegrityError(ThreatragError):
    """Data violates a structural contract (dimension mismatch, zero norm)."""


class ProviderError(ThreatragError):
    """Remote provider failed after retries; carries the last HTTP status."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class CorruptStoreError(ThreatragError):
    """Persisted store directory fails manifest/size consistency checks."""


class EmptyEmbeddingError(ThreatragError):
    """No in-vocabulary tokens: a sentence vector cannot be formed."""


class QuestionGenerationError(ThreatragError):
    """The generator could not produce the required number of questions."""


class NoStatementsError(ThreatragError):
    """The judge extracted zero statements; the metric is undefined."""


class OrchestrationError(ThreatragError):
    """Answer generation failed; carries the partial trace (retrieval hits)."""

    def __init__(self, message, contexts=None):
        super().__init__(message)
        self.contexts = contexts or []


class ReplayMissError(ThreatragError):
    """Replay mode found no recorded transcript for a request."""


class FetchError(ThreatragError):
    """Root URL unreachable; traversal cannot start."""
