'''
Numerical tolerances shared across the package
    FEAS_TOL (float): absolute tolerance of the feasibility checks
    GAP_CLAMP (float): duality gaps in [-GAP_CLAMP, 0) are clamped to 0
    RISK_FLOOR (float): excess risks below -RISK_FLOOR signal oracle failure
    FD_STEP (float): step of the central finite differences
    FD_RTOL (float): relative error accepted by the gradient check
    POP_INNER_TOL (float): default best-response tolerance of population oracles
    GAP_INNER_TOL (float): default best-response tolerance inside duality gaps
    MIN_DRAWS (int): minimum number of Rademacher draws for moment estimates
    MAX_GRID_RESOLUTION (float): coarsest l1 grid spacing for suprema
'''

FEAS_TOL = 1e-12
GAP_CLAMP = 1e-10
RISK_FLOOR = 1e-8
FD_STEP = 1e-6
FD_RTOL = 1e-5
POP_INNER_TOL = 1e-9
GAP_INNER_TOL = 1e-7
MIN_DRAWS = 100
MAX_GRID_RESOLUTION = 0.05
