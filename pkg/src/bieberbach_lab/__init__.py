"""Numerical verification lab for a coefficient estimate on conformal disc embeddings."""

from .attractor import (AmbientExtension, TangentAttractor,
                        ambient_second_derivative, conformal_attractor,
                        extend_normal, tangential_attractor)
from .estimate import (EstimateReport, HolomorphicGerm, classical_bieberbach,
                       evaluate_theorem, helicoid_scan, lemma22_check,
                       lemma24_battery, lemma24_residual, theorem_battery)
from .flow import (AmbientField, FlowTrajectory, build_field, check_lemma21,
                   integrate_flow)
from .geometry import (SURFACE_BUILDERS, FrameAtPoint, SurfacePatch,
                       build_surface, christoffels, covariant_derivative,
                       covariant_hessian, covariant_hessian_complex, dilated,
                       frame_at, metric, mobius_recentered,
                       second_fundamental, second_fundamental_complex)
from .jets import (ComplexVec, Jet2Scalar, Jet2Vector, complex_z_derivatives,
                   lift_chart)

__version__ = "0.1.0"
