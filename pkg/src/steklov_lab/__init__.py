"""Steklov eigenvalues of surfaces with a thin strip attached."""

from __future__ import annotations

from .analytic import admissible_window, disk_spectrum, h_star, limit_spectrum, rectangle_spectrum
from .assembly import assemble_boundary_mass, assemble_stiffness
from .errors import (
    GlueMismatch,
    InfeasibleWindow,
    InvalidArgument,
    InvalidMesh,
    NoCrossing,
    NotSPD,
    NumericalError,
    SteklovLabError,
    ValidationError,
)
from .experiments import (
    ClusteredDisk,
    GluedFamily,
    check_lemma_inequalities,
    converge_eps,
    find_h_multiplicity,
    sweep_h,
    topology_of_attachment,
    verify_monotonicity,
)
from .mesh import (
    BoundaryArc,
    BoundaryChain,
    GlueSpec,
    Mesh,
    glue,
    make_annulus_mesh,
    make_disk_mesh,
    make_rectangle_mesh,
    read_mesh,
    write_mesh,
)
from .steklov import Condition, SteklovProblem, Spectrum, solve_mixed_bvp, solve_steklov

__version__ = "0.1.0"
