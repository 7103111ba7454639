"""
Non-fatal findings (lints, corrections) collected while building scenarios and models
"""
from typing import Dict, List, Optional
from enum import Enum
import logging

logger = logging.getLogger(__name__)


class DiagnosticLevel(Enum):
    """Diagnostic severity"""
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"


class Diagnostic:
    """Single finding attached to a scenario, model or report"""

    def __init__(self, level: DiagnosticLevel, message: str, source: str,
                 metadata: Optional[Dict] = None):
        """
        Args:
            level: Severity
            message: Human-readable message
            source: Component that raised it (e.g. "scenario.lint")
            metadata: Extra machine-readable details
        """
        self.level = level
        self.message = message
        self.source = source
        self.metadata = metadata or {}

    def to_dict(self) -> Dict:
        return {
            'level': self.level.value,
            'message': self.message,
            'source': self.source,
            'metadata': self.metadata,
        }

    def __repr__(self) -> str:
        return f"Diagnostic({self.level.value}, {self.source}: {self.message})"


class DiagnosticLog:
    """Collects diagnostics and mirrors them to the logger"""

    def __init__(self, max_items: int = 1000):
        self.items: List[Diagnostic] = []
        self.max_items = max_items

    def handle(self, diagnostic: Diagnostic):
        self.items.append(diagnostic)
        if len(self.items) > self.max_items:
            self.items = self.items[-self.max_items:]

        log_level = {
            DiagnosticLevel.INFO: logger.info,
            DiagnosticLevel.WARNING: logger.warning,
            DiagnosticLevel.ERROR: logger.error,
        }.get(diagnostic.level, logger.info)
        log_level(f"[{diagnostic.level.value.upper()}] {diagnostic.source}: {diagnostic.message}")

    def warn(self, message: str, source: str, **metadata) -> Diagnostic:
        diagnostic = Diagnostic(DiagnosticLevel.WARNING, message, source, metadata)
        self.handle(diagnostic)
        return diagnostic
