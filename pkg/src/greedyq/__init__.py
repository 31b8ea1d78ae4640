"""Greedy quantization sequences and their evaluation toolkit."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .distributions import (
    Distribution1D,
    DistributionND,
    EmptyCellError,
    MomentOverflowError,
    cell_inertia_p,
    make_builtin,
    parse_distribution,
    restricted_centroid,
)
from .greedy1d import (
    GreedySequence,
    build_greedy_1d,
    build_greedy_symmetric,
    forgy_newton,
    inertia_table,
    lloyd_fixed_point,
)
from .quantization import (
    DistortionRecord,
    Quantizer,
    VoronoiWeights,
    cubature,
    distortion_exact_1d,
    distortion_mc,
    nearest,
    voronoi_weights,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "Distribution1D",
    "DistributionND",
    "EmptyCellError",
    "MomentOverflowError",
    "cell_inertia_p",
    "make_builtin",
    "parse_distribution",
    "restricted_centroid",
    "GreedySequence",
    "build_greedy_1d",
    "build_greedy_symmetric",
    "forgy_newton",
    "inertia_table",
    "lloyd_fixed_point",
    "DistortionRecord",
    "Quantizer",
    "VoronoiWeights",
    "cubature",
    "distortion_exact_1d",
    "distortion_mc",
    "nearest",
    "voronoi_weights",
]
