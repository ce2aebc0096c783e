from typing import Any, Dict, List, Optional


class PhaseDiagramError(ValueError):
    """Base class for every domain failure raised by the library."""


class DomainError(PhaseDiagramError):
    pass


class PreconditionError(PhaseDiagramError):
    pass


class SizeLimitError(PhaseDiagramError):
    pass


class UnsupportedGraphError(PhaseDiagramError):
    pass


class ConvergenceError(PhaseDiagramError):
    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class WitnessSearchError(PhaseDiagramError):
    """The epsilon schedule ran out; `defects` holds (eps, t defect, h_p defect) per attempt."""

    def __init__(self, message: str, defects: Optional[List[Dict[str, float]]] = None):
        super().__init__(message)
        self.defects = defects or []


class SamplerStateError(PhaseDiagramError):
    pass
