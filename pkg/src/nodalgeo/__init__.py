"""Nodal domains, level-set indicatrices and Sasaki lift lengths on
model surfaces, with an inequality-verification harness."""

from .grid import (GridField, default_resolution, gradient_l2, grid_to_csv,
                   l2_norm, laplacian_l2, lp_norm, mean_value, sample,
                   total_weight)
from .levelsets import (DegenerateFieldError, IrregularLevelError, LevelSweep,
                        SweepSpec, banach_indicatrix, extract_level,
                        leray_form_check, leray_length, run_sweep,
                        sweep_to_csv)
from .nodal import (NodalDomain, NodalDomainSet, count_above, domains_to_csv,
                    extract_domains, extrema_moments, fill_inradii, inradius)
from .sasaki import (UnsupportedModelError, co_area_bound, hessian_mass_bound,
                     level_lift_length, lift_length, systole)
from .surfaces import (ChartDomainError, ConfigError, FieldExpr, ModeSpec,
                       PoleSingularityError, SurfaceModel, combination,
                       disc_paraboloid, euclidean_rectangle, eval,
                       eval_gradient, eval_hessian, flat_torus, laplacian,
                       rect_mode, round_sphere, sphere_mode, torus_mode,
                       unit_disc, zonal_mode)
from .verify import (FROZEN_CAPS, InequalityReport, ScalingFit,
                     check_bochner_identity, check_courant_count,
                     check_eighth_moment, check_extrema_sums,
                     check_high_extrema_count, check_indicatrix_bound,
                     check_sixth_moment, check_sup_norm, random_torus_combo,
                     rect_dirichlet_family, reports_to_json, scaling_study,
                     torus_diag_family, zonal_family)

__version__ = "0.1.0"
