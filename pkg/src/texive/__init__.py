"""Driver/passenger detection from 20 Hz smartphone inertial traces."""

from .config import DEFAULT_CONFIG, PipelineConfig
from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["DEFAULT_CONFIG", "PipelineConfig", "KERNEL_BACKEND", "__version__"]
