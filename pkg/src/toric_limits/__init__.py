"""Regular subdivisions, secondary fans, translated toric varieties and their Hausdorff limits."""

from .configurations import grid, pentagon, segment, unit_square
from .degeneration import (
    DegenerationReport,
    LimitEquations,
    ToricComplex,
    complex_sample,
    limit_equations,
    one_param_weight,
    sequence_limit,
    verify_toric_degeneration,
)
from .hausdorff import DistanceReport, hausdorff, l1, net_radius
from .pointconfig import (
    PointConfiguration,
    affine_function_space,
    faces_of_configuration,
    new_configuration,
    reduce_mod_aff,
    taut,
)
from .secfan import (
    SequenceSpec,
    is_sigma_bounded,
    minimum_face_of_boundedness,
    sample_secondary_fan,
    secondary_cone,
    sigma_decomposition,
)
from .subdivision import (
    Subdivision,
    affine_certificate,
    convex_certificate,
    induced_subdivision,
    minimal_nonfaces,
    upper_envelope,
)
from .toric import (
    PointCloud,
    affine_relations_basis,
    binomial_residuals,
    birch_inverse,
    parametrize,
    project_to_face,
    sample_variety,
    translate,
)

__version__ = "0.1.0"
