"""Weyl remainder of surfaces of revolution via Bohr-Sommerfeld lattice counting."""
from .profiles import ProfileError, SurfaceProfile, make_profile, volume
from .geodesics import (CriticalPoint, DegenerateSurfaceError, GeodesicClass, critical_points,
                        enumerate_closed_geodesics, omega, omega_prime, tau, turning_points)
from .bscurve import SpectralCurve, build_curve, curvature, support_Y, x_norm
from .counting import ErrorSeries, count_bs, error_series
from .analysis import (DistributionSummary, FourierMode, b2_distance, distribution, partial_sum,
                       phi_k, predicted_modes, project_mode)

__version__ = "0.1.0"
