"""kobdyn: certified Kobayashi-metric brackets and automorphism dynamics
on bounded convex domains in C^d, with a Frankel-style rescaling pipeline
and rank-one matrix-group utilities."""

from .bracket import MetricBracket
from .domains import (AffineImage, AffineMap, Ball, BoundaryPoint,
                      ComplexHyperplane, ConvexDomain, DomainError,
                      GeneralizedEllipsoid, SmoothIntersection,
                      local_hausdorff_distance)
from .metric import (AlmostGeodesic, GromovProduct, almost_geodesic_certificate,
                     distance, geodesic_between, gromov_product,
                     infinitesimal_metric, normal_line_curve,
                     orbit_hausdorff_distance, visibility_witness)

__all__ = [
    "AffineImage", "AffineMap", "AlmostGeodesic", "Ball", "BoundaryPoint",
    "ComplexHyperplane", "ConvexDomain", "DomainError", "GeneralizedEllipsoid",
    "GromovProduct", "MetricBracket", "SmoothIntersection",
    "almost_geodesic_certificate", "distance", "geodesic_between",
    "gromov_product", "infinitesimal_metric", "local_hausdorff_distance",
    "normal_line_curve", "orbit_hausdorff_distance", "visibility_witness",
]

__version__ = "0.1.0"
