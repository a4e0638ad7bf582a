"""Focal stack analysis and geometric refocusing toolkit."""

from .errors import (
    AlignmentDiverged,
    BadManifest,
    CorruptContainer,
    DegenerateDepths,
    DegenerateScene,
    DimensionMismatch,
    EmptyTargets,
    FsrError,
    MissingSlices,
    NonContiguousExtended,
    VersionMismatch,
)
from .geometry import CameraGeometry
from .kernels import KernelShape, gaussian_kernel, shape_for_position
from .stack import FocalStack, align_stack, load_stack, save_stack
from .synth import SceneLayer, SyntheticScene, synth_stack

__version__ = "0.1.0"
