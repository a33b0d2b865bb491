"""Numerical tolerances and iteration budgets.

Module-level constants so callers can override them before use. The
defaults are the values the test suite pins.
"""

# symmetric eigensolver (cyclic Jacobi)
JACOBI_OFF_TOL = 1e-14      # stop when off(S) <= tol * ||S||_F
JACOBI_MAX_SWEEPS = 100
SYM_INPUT_TOL = 1e-12       # relative asymmetry tolerated on input

# general eigensolver (Hessenberg + shifted QR)
QR_MAX_SWEEPS_PER_N = 100   # total sweep budget is this times n

# singular values / rank
SVD_OFF_TOL = 1e-14
SVD_MAX_SWEEPS = 60
RANK_REL_TOL = 1e-9         # sigma > tol * sigma_max counts toward rank

# matrix exponential (scaling and squaring, order-7 Pade core)
EXPM_SCALED_NORM = 0.5      # scale so ||M|| / 2^s <= this

# Lyapunov / Riccati
LYAP_RESIDUAL_TOL = 1e-10   # times (1 + ||Q||_F)
CARE_RESIDUAL_TOL = 1e-9    # times (1 + ||P||_F^2)
CARE_SYM_TOL = 1e-10        # absolute asymmetry allowed in P
SIGN_MAX_ITER = 100
SIGN_CONV_TOL = 1e-12

# grounded Laplacian M-matrix test
M_MATRIX_TOL = 1e-12        # inverse entries may dip this far below zero

# Lyapunov trace monitoring
INTERVAL_SLACK = 1e-9       # V(t) <= V(t_s) * (1 + slack) inside an interval
RATIO_REL_SLACK = 1e-12     # V(t_{s+1})/V(t_s) <= rho * (1 + slack)

# time grid
GRID_DIV_TOL = 1e-12        # relative error allowed when snapping to the grid

# stabilizability test
EIG_REAL_GUARD = 1e-12      # eigenvalues with Re >= -guard are treated as unstable
