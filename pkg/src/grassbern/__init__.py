"""Oriented Grassmannians under the Plucker embedding, barrier regions and harmonic-map experiments."""
from .multivec import MultiVector, inner_mult, is_simple, rank_space, scalar_product, wedge
from .grassmann import (
    GeodesicPath,
    GrassPoint,
    OrientedFrame,
    TangentCanonical,
    closed_geodesic_period,
    diameter,
    dist,
    exp_map,
    geodesic_eval,
    in_BG,
    kozlov_canonical,
    log_map,
    oriented_principal_angles,
    plucker,
    t_crit,
    type_k_directions,
    w_product,
)

__all__ = [
    "MultiVector", "inner_mult", "is_simple", "rank_space", "scalar_product", "wedge",
    "GeodesicPath", "GrassPoint", "OrientedFrame", "TangentCanonical", "closed_geodesic_period",
    "diameter", "dist", "exp_map", "geodesic_eval", "in_BG", "kozlov_canonical", "log_map",
    "oriented_principal_angles", "plucker", "t_crit", "type_k_directions", "w_product",
]
