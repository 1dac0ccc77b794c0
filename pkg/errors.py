"""
Fehlerklassen für Streaming-PCA
"""

from typing import Optional


class StreamingPCAError(Exception):
    """Basisklasse aller Fehler dieses Pakets"""


class ValidationError(StreamingPCAError, ValueError):
    """Ungültige Parameter oder Eingaben"""


class RankDeficientError(StreamingPCAError):
    def __init__(self, column: int, message: Optional[str] = None):
        self.column = column
        super().__init__(message or f"Matrix hat keinen vollen Spaltenrang (Spalte {column})")


class DegenerateBlockError(StreamingPCAError):
    def __init__(self, block: int, message: Optional[str] = None):
        self.block = block
        super().__init__(message or f"Degenerierter Block {block}: Akkumulator ist (nahezu) null")


class PartialStreamError(StreamingPCAError):
    def __init__(self, blocks_completed: int, samples_needed: int, samples_seen: int):
        self.blocks_completed = blocks_completed
        self.samples_needed = samples_needed
        self.samples_seen = samples_seen
        super().__init__(
            f"Stream vorzeitig erschöpft: {samples_seen} von {samples_needed} Samples, "
            f"{blocks_completed} Blöcke abgeschlossen"
        )


class InsufficientSamplesError(ValidationError):
    """Zu wenige Samples für den gewünschten Schedule"""


class OracleScaleError(StreamingPCAError):
    def __init__(self, p: int, limit: int):
        self.p = p
        self.limit = limit
        super().__init__(f"p={p} überschreitet die Orakel-Grenze {limit} (p×p-Matrix nicht erlaubt)")


class ContractViolationError(StreamingPCAError):
    """Verletzung des Streaming-Vertrags"""


class NotReopenableError(StreamingPCAError):
    """Stream kann nicht erneut geöffnet werden"""


class ParseError(StreamingPCAError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"Zeile {line}: {message}")
