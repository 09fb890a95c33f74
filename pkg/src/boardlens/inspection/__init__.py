"""Board inspection: color gating, surface checks, synthetic boards,
batch experiments and DeepPCB-style evaluation."""

from .config import PipelineConfig, load_config
from .deeppcb import DeepPcbConfig, DeepPcbSample, evaluate_deeppcb, ingest_deeppcb
from .experiment import ExperimentPlan, GroupSpec, load_plan, run_experiment
from .pipeline import classify_roi, letterbox, run_pipeline
from .report import InspectionReport, append_removal
from .synth import GroundTruth, generate_board, reference_board

__all__ = [
    "DeepPcbConfig", "DeepPcbSample", "ExperimentPlan", "GroundTruth", "GroupSpec",
    "InspectionReport", "PipelineConfig", "append_removal", "classify_roi",
    "evaluate_deeppcb", "generate_board", "ingest_deeppcb", "letterbox", "load_config",
    "load_plan", "reference_board", "run_experiment", "run_pipeline",
]
