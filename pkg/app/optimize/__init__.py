from app.optimize.ga import GAConfig, GAResult, brute_force_minimize, ga_minimize
from app.optimize.grid import OptimizedPoint, load_points, optimize_grid, persist_points

__all__ = [
    "GAConfig",
    "GAResult",
    "OptimizedPoint",
    "brute_force_minimize",
    "ga_minimize",
    "load_points",
    "optimize_grid",
    "persist_points",
]
