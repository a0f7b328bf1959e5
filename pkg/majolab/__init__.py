"""Majorization laboratory: entanglement spectra of boundary chains and CFT towers, and checks of their ordering."""

from majolab.errors import ComputationError, InputError, MajolabError
from majolab.majorization import Distribution, FlowDirection, FlowReport, Verdict, canonicalize, flow_report, majorizes

__all__ = (
    "MajolabError",
    "InputError",
    "ComputationError",
    "Distribution",
    "FlowDirection",
    "FlowReport",
    "Verdict",
    "canonicalize",
    "majorizes",
    "flow_report",
)
