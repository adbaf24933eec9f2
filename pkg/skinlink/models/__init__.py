from .schemas import (
    DetectionScheme,
    JitterReport,
    LinkGeometry,
    McConfig,
    MetricsReport,
    RunConfig,
    RxConfig,
    SubBand,
    SubBandSpec,
    SweepAxis,
    SweepRow,
    TxConfig,
    ValidationReport,
    ValidationRow,
)

__all__ = [
    "DetectionScheme",
    "JitterReport",
    "LinkGeometry",
    "McConfig",
    "MetricsReport",
    "RunConfig",
    "RxConfig",
    "SubBand",
    "SubBandSpec",
    "SweepAxis",
    "SweepRow",
    "TxConfig",
    "ValidationReport",
    "ValidationRow",
]
