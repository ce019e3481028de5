"""Learning-free offline refinement of 3D multi-object tracking results.

Finalized tracklet sets from one or more upstream trackers are cleaned of
ghost tracks, re-identified across gaps, disentangled where identities were
merged, fused across trackers and finally smoothed.
"""

from .config import CategoryConfig, ConfigError, PipelineConfig, RefineWeights, config_from_dict
from .core import (BoxState, IdAllocator, InvalidInputError, NumericalError, TrackerOutput,
                   Tracklet, validate, wrap_angle)
from .pipeline import run_pipeline, run_scenes

__all__ = [
    "BoxState", "CategoryConfig", "ConfigError", "IdAllocator", "InvalidInputError",
    "NumericalError", "PipelineConfig", "RefineWeights", "TrackerOutput", "Tracklet",
    "config_from_dict", "run_pipeline", "run_scenes", "validate", "wrap_angle",
]
__version__ = "0.1.0"
