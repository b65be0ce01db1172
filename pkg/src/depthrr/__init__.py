"""Depth-map compression via range reduction and sinusoidal RGB encoding."""

from .analysis import (ErrorReport, SweepRow, bits_per_pixel,
                       min_periods_for_target, raw_size_report, rms_error,
                       sweep)
from .approximation import (ApproximationSpec, SphereParams, Thumbnail,
                            block_mean_thumbnail, build_approximation,
                            fit_sphere, rasterize_sphere, upsample_bicubic)
from .codec import (CodecConfig, EncodedImage, dd_decode, dd_encode,
                    fringe_width, mwd_decode, mwd_encode)
from .container import (Sidecar, read_container, read_depth, write_container,
                        write_depth)
from .geometry import (DepthMap, DepthStats, Grid, add, depth_stats,
                       make_hemisphere, subtract)
from .pipeline import decode_depth, encode_depth
from .transforms import apply_transform, compose_transform

__version__ = "0.1.0"
