"""Steklov problems with mixed boundary conditions, solved by condensation."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .assembly import assemble_boundary_mass, assemble_stiffness
from .errors import InvalidArgument
from .mesh import Mesh, rectangle_submesh
from .numerics import DofPartition, factor_spd, multiplets, schur_complement, sym_generalized_eig


class Condition(str, Enum):
    SPECTRAL = "spectral"
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @classmethod
    def parse(cls, value: "Condition | str") -> "Condition":
        try:
            return cls(str(value.value if isinstance(value, Condition) else value).lower())
        except ValueError:
            raise InvalidArgument(f"unknown boundary condition {value!r}") from None


@dataclass(frozen=True)
class SteklovProblem:
    """Mesh plus a condition per boundary label.

    Labels missing from ``conditions`` are Spectral.
    """

    mesh: Mesh
    conditions: Mapping[str, Condition | str] = field(default_factory=dict)
    weight: object = None
    count: int = 6
    lumped: bool = False

    def __post_init__(self) -> None:
        labels = self.mesh.labels
        unknown = set(self.conditions) - labels
        if unknown:
            raise InvalidArgument(f"condition given for unknown label(s) {sorted(unknown)}")
        full = {lab: Condition.SPECTRAL for lab in labels}
        full.update({k: Condition.parse(v) for k, v in self.conditions.items()})
        object.__setattr__(self, "conditions", full)
        if not any(c is Condition.SPECTRAL for c in full.values()):
            raise InvalidArgument("problem has no Spectral label")
        if self.count < 1:
            raise InvalidArgument("count must be positive")

    def labels_with(self, cond: Condition) -> set[str]:
        return {lab for lab, c in self.conditions.items() if c is cond}

    def partition(self) -> DofPartition:
        """Dirichlet dominates at label interfaces, then Spectral, else eliminated."""
        n = self.mesh.n_vertices
        kind = np.zeros(n, dtype=np.int8)  # 0 = E, 1 = F, 2 = D
        for u, v, lab in self.mesh.boundary_edges():
            c = self.conditions[lab]
            code = 2 if c is Condition.DIRICHLET else 1 if c is Condition.SPECTRAL else 0
            kind[u] = max(kind[u], code)
            kind[v] = max(kind[v], code)
        return DofPartition(
            F=np.flatnonzero(kind == 1), E=np.flatnonzero(kind == 0), D=np.flatnonzero(kind == 2)
        )


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with B-normalized boundary vectors and their extensions."""

    values: np.ndarray
    vectors: np.ndarray  # (|F|, k) boundary values
    fields: np.ndarray  # (n_vertices, k), zero on D
    residuals: np.ndarray
    partition: DofPartition
    B: np.ndarray  # dense spectral mass on F
    label_mass: Mapping[str, np.ndarray]  # per label: (k,) fraction of B-mass
    mesh_hash: str
    multiplets: tuple[tuple[int, ...], ...]

    @property
    def count(self) -> int:
        return len(self.values)

    def report(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.values],
            "residuals": [float(r) for r in self.residuals],
            "region_masses": {k: [float(x) for x in v] for k, v in self.label_mass.items()},
            "multiplets": [list(g) for g in self.multiplets],
            "mesh_hash": self.mesh_hash,
            "n_spectral": int(len(self.partition.F)),
        }


def _label_masses(mesh: Mesh, labels: Iterable[str], F: np.ndarray, Y: np.ndarray, w, lumped) -> dict:
    out = {}
    for lab in sorted(labels):
        B = assemble_boundary_mass(mesh, [lab], w, lumped)[F][:, F]
        out[lab] = np.einsum("ij,ij->j", Y, B @ Y)
    return out


def solve_steklov(p: SteklovProblem, K: sp.spmatrix | None = None) -> Spectrum:
    mesh = p.mesh
    part = p.partition()
    F, E = part.F, part.E
    if p.count > len(F):
        raise InvalidArgument(f"count {p.count} exceeds spectral dofs {len(F)}")
    K = assemble_stiffness(mesh) if K is None else sp.csr_matrix(K)
    spectral = p.labels_with(Condition.SPECTRAL)
    Bfull = assemble_boundary_mass(mesh, spectral, p.weight, p.lumped)
    B = Bfull[F][:, F].toarray()
    fac = factor_spd(K[E][:, E]) if len(E) else None
    S = schur_complement(K, part, fac)
    eig = sym_generalized_eig(S, B, p.count)
    Y = eig.vectors
    # fix signs so results are reproducible
    idx = np.argmax(np.abs(Y), axis=0)
    Y = Y * np.sign(Y[idx, np.arange(Y.shape[1])])
    fields = np.zeros((mesh.n_vertices, Y.shape[1]))
    fields[F] = Y
    if len(E):
        fields[E] = -fac.solve((K[E][:, F] @ Y))
    masses = _label_masses(mesh, spectral, F, Y, p.weight, p.lumped)
    return Spectrum(
        values=eig.values,
        vectors=Y,
        fields=fields,
        residuals=eig.residuals,
        partition=part,
        B=B,
        label_mass=masses,
        mesh_hash=mesh.fingerprint(),
        multiplets=eig.multiplets,
    )


def harmonic_extension(
    mesh: Mesh,
    values: np.ndarray,
    fixed: np.ndarray | None = None,
    K: sp.spmatrix | None = None,
) -> np.ndarray:
    """Discrete harmonic field equal to ``values`` on ``fixed`` vertices.

    ``fixed`` defaults to all boundary vertices; free boundary vertices get
    the natural (zero Neumann) condition. ``values`` may be given on the
    fixed vertices only or on all vertices.
    """
    n = mesh.n_vertices
    fixed = mesh.boundary_vertices() if fixed is None else np.asarray(fixed, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    if values.shape[0] == n:
        vals = values[fixed]
    elif values.shape[0] == len(fixed):
        vals = values
    else:
        raise InvalidArgument("values must be given on all vertices or on the fixed set")
    if len(fixed) == 0:
        raise InvalidArgument("need at least one fixed vertex")
    K = assemble_stiffness(mesh) if K is None else sp.csr_matrix(K)
    mask = np.ones(n, dtype=bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    out = np.zeros((n,) + vals.shape[1:])
    out[fixed] = vals
    if len(free):
        fac = factor_spd(K[free][:, free])
        out[free] = -fac.solve(K[free][:, fixed] @ vals)
    return out


def dirichlet_energy(K: sp.spmatrix, u: np.ndarray) -> float:
    return float(u @ (K @ u))


@dataclass(frozen=True)
class MixedSolution:
    """Solution on the rectangle of a glued mesh; ``field`` follows ``vertices``."""

    field: np.ndarray
    vertices: np.ndarray  # glued ids in rectangle-local order
    seam: np.ndarray  # local indices of I_eps vertices
    argmax: int  # local index of max |field|
    max_value: float

    @property
    def max_on_seam(self) -> bool:
        return bool(np.abs(self.field[self.seam]).max() >= self.max_value)


def solve_mixed_bvp(glued: Mesh, data, region: str = "rect") -> MixedSolution:
    """Harmonic on the rectangle, ``data`` on I_eps, zero Neumann on the free sides.

    ``data`` is indexed like ``glued.vertex_sets['I_eps']`` or is a field on all
    glued vertices.
    """
    if region not in glued.regions:
        raise InvalidArgument(f"mesh has no region {region!r}")
    sub, gids, seam_local = rectangle_submesh(glued, region)
    data = np.asarray(data, dtype=float)
    suffix = region[4:]
    seam_g = glued.vertex_sets[f"I_eps{suffix}"]
    if data.shape[0] == glued.n_vertices:
        vals = data[seam_g]
    elif data.shape[0] == len(seam_g):
        vals = data
    else:
        raise InvalidArgument("data must be given on I_eps or on all vertices")
    field_ = harmonic_extension(sub, vals, seam_local)
    a = np.abs(field_)
    i = int(np.argmax(a))
    return MixedSolution(field_, gids, seam_local, i, float(a[i]))


def boundary_mass_split(spec: Spectrum, regions: Mapping[str, Iterable[str]]) -> dict[str, np.ndarray]:
    """Fraction of each eigenvector's boundary mass in each region (a label group)."""
    covered: set[str] = set()
    for labs in regions.values():
        labs = set(labs)
        if labs & covered:
            raise InvalidArgument("regions overlap")
        covered |= labs
    spectral = set(spec.label_mass)
    if not spectral <= covered:
        raise InvalidArgument(f"regions miss spectral label(s) {sorted(spectral - covered)}")
    total = sum(spec.label_mass.values())
    out = {}
    for name, labs in regions.items():
        m = sum((spec.label_mass[lab] for lab in labs if lab in spectral), np.zeros_like(total))
        out[name] = m / total
    return out


def glued_regions(mesh: Mesh) -> dict[str, list[str]]:
    """Boundary regions of a glued surface: the rectangle's free sides vs the rest."""
    rect = sorted(lab for lab in mesh.labels if lab.startswith("free_"))
    base = sorted(lab for lab in mesh.labels if not lab.startswith("free_"))
    return {"base": base, "rect": rect}


__all__ = [
    "Condition",
    "SteklovProblem",
    "Spectrum",
    "solve_steklov",
    "harmonic_extension",
    "dirichlet_energy",
    "MixedSolution",
    "solve_mixed_bvp",
    "boundary_mass_split",
    "glued_regions",
    "multiplets",
]
