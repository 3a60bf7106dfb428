"""Numerical laboratory for value distribution of indefinite ternary quadratic forms."""

__version__ = "0.1.0"

from .enumeration import ApproxRecord, Box, brute_min, fiber_min, points_in_box, values_in_window
from .ergodic import (Indicator, OrbitAverageEstimate, ball_indicator, base_points,
                      box_indicator, measure_lower_bound_check, orbit_average,
                      random_form, rogers_rhs, second_moment_experiment, siegel_transform)
from .errors import (BadBox, BadDelta, BallEmpty, EmptySearch, IllConditioned,
                     LabError, NotAdmissible, WrongSignature, ZeroDeterminant)
from .experiments import (AdmissibilityCheck, Schedule, ScheduleReport, ScheduleRow,
                          admissible, bad_set_fraction, power_schedule, profile,
                          run_schedule, sample_forms, schedule_preset,
                          shrinking_target_fraction)
from .forms import Q0, GroupElement, TernaryForm, act, normalize, q0_eval, signature
from .spin import (KakCoords, SpinElement, ball_mass, ball_mass_rejection, boost,
                   h_norm, kak_compose, kak_decompose, random_spin, rotation,
                   sample_ball, spin_cover)
from .targets import TargetRegion, lattice_hits, make_region, mc_volume, sample_region
