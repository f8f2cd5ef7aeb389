from scenefill.metrics.quality import PSNR_CAP_DB, mean_db, psnr, ssim
from scenefill.metrics.report import FrameMetrics, MetricReport, evaluate_sequence, load_report
from scenefill.metrics.temporal import TemporalScores, temporal_consistency

__all__ = [
    "FrameMetrics",
    "MetricReport",
    "PSNR_CAP_DB",
    "TemporalScores",
    "evaluate_sequence",
    "load_report",
    "mean_db",
    "psnr",
    "ssim",
    "temporal_consistency",
]
