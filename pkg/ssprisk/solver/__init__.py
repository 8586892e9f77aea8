from .solver import (SolverConfig, SaddlePair, SolveReport, solve_saddle,
                     best_response_x, best_response_y, duality_gap,
                     kkt_residual)
