"""Floating bodies and floating areas of convex bodies in real space forms.

Everything works in the projective (Klein-type) model: bodies are
Euclidean convex bodies inside the model domain, measured with the
density (1 + lam |x|^2)^(-(n+1)/2).
"""

from __future__ import annotations

from ._numerics import QuadratureError, RootFindingError
from .bodies import (BodyError, BoundarySamples, ConvexBody, EmptyWulff, Polytope, Quadric, Smooth2D,
                     TruncatedQuadric, ball, body_from_spec, direction_grid, ellipsoid, hausdorff_distance,
                     linear_image, transform_quadric, wulff_shape)
from .capvolume import (CapDepthProfile, FloatingBodyResult, FloatingEnvelope, OutOfRange, cap_depth_solve,
                        cap_depths, cap_measure, cap_measure_mc, floating_body, lambda_measure, sandwich_deltas,
                        section_mass)
from .floatarea import (ConvergenceReport, FloatingAreaResult, ball_floating_area_closed, cone_volume_difference,
                        constant_c_n, derivative_estimate, floating_area, floating_measure, lambda_volume,
                        symmetric_difference_volume)
from .spaceform import (DomainError, SpaceForm, atan_lambda, distance, distance_to_origin, klein_translate,
                        tan_lambda, translation_matrix, volume_density)

__version__ = "0.1.0"

__all__ = [
    "BodyError", "BoundarySamples", "CapDepthProfile", "ConvergenceReport", "ConvexBody", "DomainError",
    "EmptyWulff", "FloatingAreaResult", "FloatingBodyResult", "FloatingEnvelope", "OutOfRange", "Polytope",
    "QuadratureError", "Quadric", "RootFindingError", "Smooth2D", "SpaceForm", "TruncatedQuadric",
    "atan_lambda", "ball", "ball_floating_area_closed", "body_from_spec", "cap_depth_solve", "cap_depths",
    "cap_measure", "cap_measure_mc", "cone_volume_difference", "constant_c_n", "derivative_estimate",
    "direction_grid", "distance", "distance_to_origin", "ellipsoid", "floating_area", "floating_body",
    "floating_measure", "hausdorff_distance", "klein_translate", "lambda_measure", "lambda_volume",
    "linear_image", "sandwich_deltas", "section_mass", "symmetric_difference_volume", "tan_lambda",
    "transform_quadric", "translation_matrix", "volume_density", "wulff_shape",
]
