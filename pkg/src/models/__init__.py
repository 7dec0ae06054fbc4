# Data models for verification records and reports
from src.models.reports import (
    Verdict,
    VerificationRecord,
    AssumptionReport,
    LorentzNorm,
    DecayReport,
    ConvergenceLog,
    RunManifest,
)

__all__ = [
    "Verdict",
    "VerificationRecord",
    "AssumptionReport",
    "LorentzNorm",
    "DecayReport",
    "ConvergenceLog",
    "RunManifest",
]
