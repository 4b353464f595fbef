"""Numerical workbench for isotropic positions, volume products and M-ellipsoids of convex bodies."""
from .ballbodies import ExpMeasure, RadialBody, ball_body, body_from_function, l_ratio
from .bodies import (
    AffineMap,
    ConvexBody,
    Ellipsoid,
    HPolytope,
    VPolytope,
    ball,
    ball_volume,
    body_from_dict,
    body_to_dict,
    convex_hull_union,
    cross_polytope,
    cube,
    difference_body,
    minkowski_sum,
    polar,
    simplex,
)
from .covering import CoveringEstimate, covering_profile, greedy_net, verify_lemma_2_1
from .errors import *  # noqa: F401,F403
from .laplace import klartag_body, klartag_search, log_laplace
from .mposition import MPositionCert, m_ellipsoid, m_position_image, reverse_bm_check
from .randgeom import (
    SampleConfig,
    exact_volume,
    isotropic_constant,
    isotropic_transform,
    mc_volume,
    moments,
    sample_uniform,
)
from .santalo import mahler_bound, santalo_point, volume_product
from .zoo import ExperimentReport, ZooSpec, generate_zoo, run_suite, version

__version__ = version()
