"""Phase-only adjustment of a sensor array's response at a single angle."""
from .adjuster import (AdjustmentReport, AdjustmentSpec, adjust, choose_psi,
                       compose_h, compose_rotation_problem, reference_weight,
                       sort_edges, triangle_adjust)
from .array_model import (ArrayGeometry, build_preassigned_weight, from_db,
                          power_response, sample_pattern, steering_vector, to_db)
from .errors import (DegenerateMainBeam, Infeasible, InfeasibleEdges, NoFeasiblePsi,
                     PhaseAdjustError)
from .polygon import (PhaseArcSet, is_polygon_feasible, select_phase,
                      sequential_construct, triangle_construct)

__version__ = "0.1.0"
