"""Physics-constrained data-driven computational mechanics."""

from ._core import (
    MaterialDataset,
    Metric,
    Problem,
    convex_project,
    gen_linear_truss,
    gen_plane_stress,
    gen_sigmoid_truss,
    m_norm,
    model_solve,
    nearest,
    nnls,
    plane_stress_metric,
    problem_beam,
    problem_one_bar,
    problem_truss15,
    read_csv,
    solve,
    write_csv,
)

__all__ = [
    "MaterialDataset",
    "Metric",
    "Problem",
    "convex_project",
    "gen_linear_truss",
    "gen_plane_stress",
    "gen_sigmoid_truss",
    "m_norm",
    "model_solve",
    "nearest",
    "nnls",
    "plane_stress_metric",
    "problem_beam",
    "problem_one_bar",
    "problem_truss15",
    "read_csv",
    "solve",
    "write_csv",
]
