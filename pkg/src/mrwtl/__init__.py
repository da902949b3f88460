"""Signal-matched rational wavelet transforms learned in the lifting framework."""

from .errors import (
    LengthMismatch,
    MrwtlError,
    NoConvergence,
    NotDecomposable,
    NotFIRInvertible,
    OddTapCount,
    TooShortSignal,
)
from .multirate import LaurentFilter, RationalRate, Signal
from .polyphase import MBandFilterBank, PRCertificate, RationalFilterBank, certify
from .lazy import SubbandSignals, block_merge, block_split, mband_lazy, rational_lazy
from .lifting import LiftingModel, PredictStep, UpdateStep, learn_mrwtl
from .transform import (
    CoeffPyramid,
    analyze,
    analyze_multilevel,
    standard_bank,
    synthesize,
    synthesize_multilevel,
)

__version__ = "0.1.0"

__all__ = [
    "LaurentFilter",
    "RationalRate",
    "Signal",
    "MBandFilterBank",
    "RationalFilterBank",
    "PRCertificate",
    "certify",
    "SubbandSignals",
    "block_split",
    "block_merge",
    "mband_lazy",
    "rational_lazy",
    "PredictStep",
    "UpdateStep",
    "LiftingModel",
    "learn_mrwtl",
    "CoeffPyramid",
    "analyze",
    "synthesize",
    "analyze_multilevel",
    "synthesize_multilevel",
    "standard_bank",
    "MrwtlError",
    "NotFIRInvertible",
    "NotDecomposable",
    "LengthMismatch",
    "TooShortSignal",
    "OddTapCount",
    "NoConvergence",
]
