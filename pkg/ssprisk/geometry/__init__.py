from .geometry import (GeometrySpec, EuclideanBall, EuclideanBox,
                       TruncatedSimplex, ProductGeometry, norm, dual_norm,
                       project, prox_step)
from .projections import (project_simplex, project_truncated_simplex,
                          project_ball, project_box, simplex_grid)
