from geoconvex.checker.engine import PairInequality, run_sweep, SweepProblem, Thresholds
from geoconvex.checker.falsify import falsify
from geoconvex.checker.function import FunctionOnManifold, RealFunction
from geoconvex.checker.geodesic import (audit_endpoint_derivatives, check_differential_criterion,
                                        check_geodesic_convex, check_geodesic_phi_convex,
                                        check_local_min_criterion, verify_restriction_equivalence)
from geoconvex.checker.interval import (audit_mean_value, audit_three_point, check_g_preinvex,
                                        check_lipschitz_bound, check_phi_convex_interval,
                                        check_phi_preinvex, check_slope_inequality)
from geoconvex.checker.theorems import (check_composition, check_g_preinvex_composition, check_phi_limit,
                                        check_pushforward, check_sup_family, check_weighted_sum)
