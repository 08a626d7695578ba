"""Point sets, discrepancy and dispersion metrics, cubature errors, greedy
equal-weight cubature and sampling-discretization checks."""

from .errors import (BudgetExceeded, ConstructionInvalid, InvalidParameter, NumericFailure,
                     QMCError, ScheduleFailure)
from .pointgen import (PointSet, corput_net, fibonacci_set, frolov_basis, frolov_periodized,
                       frolov_points, halton_set, random_uniform, read_points, regular_grid,
                       write_points)
from .discrepancy import (AxisBox, fixed_volume_discrepancy, l2_star_discrepancy,
                          lq_discrepancy_mc, optimized_smooth_discrepancy,
                          periodic_smooth_discrepancy, r_discrepancy_l2, smooth_discrepancy,
                          star_discrepancy_exact)
from .dispersion import dispersion_2d, dispersion_nd
from .cubature import CubatureRule, diaphony, worst_case_error_w2r

__version__ = "0.1.0"
