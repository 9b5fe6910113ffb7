"""Literal dense implementation of the discrete diffeomorphism group.

Flux matrices, the cartesian flat and sparsity operators, Lie derivatives,
weak-equality pressure recovery, and Kelvin-Noether pairings on small
meshes.  This module is the brute-force oracle against which the stencil
operators in :mod:`geovar.grid` are certified; grids are capped at 256
cells and everything is stored dense.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintViolated, NotWeaklyNull, SupportViolation
from .grid import GridSpec, StaggeredVectorField, divergence_cell
from .lie_core import AlgebraMatrix, pairing

__all__ = [
    "MeshIndex",
    "DiscreteOneForm",
    "DiscreteZeroForm",
    "to_flux_matrix",
    "field_from_flux_matrix",
    "flat",
    "sparsify",
    "lie_deriv_one_form",
    "lie_deriv_vector",
    "recover_pressure",
    "kelvin_quantity",
    "cross_helicity",
    "loop_field",
    "edge_field_of_one_form",
    "dense_psi",
    "dense_lorentz",
    "dense_fluid_step",
    "dense_mhd_step",
    "dense_advect_field",
]

_MAX_CELLS = 256


@dataclass(frozen=True)
class DiscreteOneForm:
    """Antisymmetric matrix representing a discrete one-form."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        scale = max(1.0, np.abs(m).max(initial=0.0))
        if np.abs(m + m.T).max(initial=0.0) > 1e-12 * scale:
            raise ValueError("one-form matrix is not antisymmetric")
        object.__setattr__(self, "entries", m)


@dataclass(frozen=True)
class DiscreteZeroForm:
    """Vector of cell averages."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.isfinite(v).all():
            raise ValueError("zero-form entries must be finite")
        object.__setattr__(self, "values", v)


class MeshIndex:
    """Cell indexing, adjacency, and two-away tables for an nx x ny mesh.

    Periodic meshes need nx, ny >= 5: on a 3-wide torus adjacent and
    two-away relations coincide, and on a 4-wide torus a two-away
    transfer pierces two interfaces of the same cell, so the printed
    flat/sparsity operators leave the constraint space.
    """

    def __init__(self, grid: GridSpec):
        if grid.nx * grid.ny > _MAX_CELLS:
            raise ValueError(f"oracle meshes are capped at {_MAX_CELLS} cells")
        if grid.periodic and (grid.nx < 5 or grid.ny < 5):
            raise ValueError("periodic oracle meshes need nx, ny >= 5")
        self.grid = grid
        self.n = grid.nx * grid.ny
        self.omega = np.full(self.n, grid.eps**2)
        nx, ny = grid.nx, grid.ny
        self._neighbors: list[list[int]] = [[] for _ in range(self.n)]
        for i in range(nx):
            for j in range(ny):
                c = self.index(i, j)
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    nb = self.cell_at(i + di, j + dj)
                    if nb is not None:
                        self._neighbors[c].append(nb)
        self._neighbor_sets = [set(nbs) for nbs in self._neighbors]
        self.adjacent = np.zeros((self.n, self.n), dtype=bool)
        for c, nbs in enumerate(self._neighbors):
            for nb in nbs:
                self.adjacent[c, nb] = True

    def index(self, i: int, j: int) -> int:
        return i * self.grid.ny + j

    def coords(self, c: int) -> tuple[int, int]:
        return divmod(c, self.grid.ny)

    def cell_at(self, i: int, j: int) -> int | None:
        nx, ny = self.grid.nx, self.grid.ny
        if self.grid.periodic:
            return self.index(i % nx, j % ny)
        if 0 <= i < nx and 0 <= j < ny:
            return self.index(i, j)
        return None

    def neighbors(self, c: int) -> list[int]:
        return self._neighbors[c]

    def common_neighbors(self, a: int, b: int) -> list[int]:
        return sorted(self._neighbor_sets[a] & self._neighbor_sets[b])

    def two_away(self, c: int) -> dict[int, int]:
        """Two-away cells of c mapped to their flat-operator weight w."""
        i, j = self.coords(c)
        out: dict[int, int] = {}
        for di, dj, w in (
            (2, 0, 2), (-2, 0, 2), (0, 2, 2), (0, -2, 2),
            (1, 1, 1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1),
        ):
            nb = self.cell_at(i + di, j + dj)
            if nb is None or nb == c or nb in self._neighbor_sets[c]:
                continue
            out[nb] = w
        return out

    def adjacent_pairs(self) -> list[tuple[int, int, tuple[int, int]]]:
        """Ordered adjacent pairs (c, nb, direction offset), +x/+y only."""
        pairs = []
        for i in range(self.grid.nx):
            for j in range(self.grid.ny):
                c = self.index(i, j)
                for d in ((1, 0), (0, 1)):
                    nb = self.cell_at(i + d[0], j + d[1])
                    if nb is not None:
                        pairs.append((c, nb, d))
        return pairs


@functools.lru_cache(maxsize=16)
def mesh_index(grid: GridSpec) -> MeshIndex:
    return MeshIndex(grid)


# ---------------------------------------------------------------------------
# Flux matrices
# ---------------------------------------------------------------------------


def _flux_entries(w: StaggeredVectorField) -> np.ndarray:
    mesh = mesh_index(w.grid)
    g = w.grid
    a = np.zeros((mesh.n, mesh.n))
    coef = 1.0 / (2.0 * g.eps)
    for i in range(g.u_shape[0]):
        for j in range(g.ny):
            left = mesh.cell_at(i - 1, j)
            right = mesh.cell_at(i, j)
            if left is None or right is None:
                continue
            a[left, right] -= coef * w.u[i, j]
            a[right, left] += coef * w.u[i, j]
    for i in range(g.nx):
        for j in range(g.v_shape[1]):
            bottom = mesh.cell_at(i, j - 1)
            top = mesh.cell_at(i, j)
            if bottom is None or top is None:
                continue
            a[bottom, top] -= coef * w.v[i, j]
            a[top, bottom] += coef * w.v[i, j]
    return a


def to_flux_matrix(w: StaggeredVectorField, div_tol: float = 1e-10) -> AlgebraMatrix:
    """Flux matrix of a divergence-free edge field: A_mn = -flux/(2 eps)."""
    dmax = np.abs(divergence_cell(w).values).max()
    if dmax > div_tol:
        raise ConstraintViolated(f"field divergence {dmax:.3e} exceeds {div_tol:.1e}")
    if w.wall_normal_max() > div_tol:
        raise ConstraintViolated("wall-normal edge values must vanish")
    return AlgebraMatrix(_flux_entries(w), mesh_index(w.grid).omega)


def field_from_flux_matrix(a: AlgebraMatrix, grid: GridSpec) -> StaggeredVectorField:
    """Read edge values back out of a flux matrix (inverse of to_flux_matrix)."""
    mesh = mesh_index(grid)
    u = np.zeros(grid.u_shape)
    v = np.zeros(grid.v_shape)
    for i in range(grid.u_shape[0]):
        for j in range(grid.ny):
            left, right = mesh.cell_at(i - 1, j), mesh.cell_at(i, j)
            if left is not None and right is not None:
                u[i, j] = -2.0 * grid.eps * a.entries[left, right]
    for i in range(grid.nx):
        for j in range(grid.v_shape[1]):
            bottom, top = mesh.cell_at(i, j - 1), mesh.cell_at(i, j)
            if bottom is not None and top is not None:
                v[i, j] = -2.0 * grid.eps * a.entries[bottom, top]
    return StaggeredVectorField(grid, u, v)


# ---------------------------------------------------------------------------
# Flat and sparsity operators
# ---------------------------------------------------------------------------


def flat(c: AlgebraMatrix, grid: GridSpec) -> DiscreteOneForm:
    """Cartesian flat operator: 2 eps^2 C on neighbors, weighted sums two-away."""
    mesh = mesh_index(grid)
    m = c.entries
    off_support = ~mesh.adjacent & ~np.eye(mesh.n, dtype=bool)
    scale = max(1.0, np.abs(m).max(initial=0.0))
    if np.abs(m[off_support]).max(initial=0.0) > 1e-12 * scale:
        raise SupportViolation("flat operator input must be supported on adjacent pairs")
    eps2 = grid.eps**2
    out = np.zeros_like(m)
    out[mesh.adjacent] = 2.0 * eps2 * m[mesh.adjacent]
    for a in range(mesh.n):
        for b, w in mesh.two_away(a).items():
            s = sum(m[a, k] + m[k, b] for k in mesh.common_neighbors(a, b))
            out[a, b] = w * eps2 * s
    return DiscreteOneForm(out)


def _sparsify_entries(a: np.ndarray, mesh: MeshIndex) -> np.ndarray:
    out = np.zeros_like(a)

    def at(pos: tuple[int, int]) -> int | None:
        return mesh.cell_at(pos[0], pos[1])

    for c, nb, d in mesh.adjacent_pairs():
        i, j = mesh.coords(c)
        p = (-d[1], d[0])
        val = 0.0
        back = at((i - d[0], j - d[1]))
        if back is not None:
            val += a[back, nb]
        ahead = at((i + 2 * d[0], j + 2 * d[1]))
        if ahead is not None:
            val += a[c, ahead]
        for pp in (p, (-p[0], -p[1])):
            side_c = at((i + pp[0], j + pp[1]))
            if side_c is not None:
                val += 0.5 * a[side_c, nb]
            side_n = at((i + d[0] + pp[0], j + d[1] + pp[1]))
            if side_n is not None:
                val += 0.5 * a[c, side_n]
        out[c, nb] = val
        out[nb, c] = -val
    return out


def sparsify(a: np.ndarray, grid: GridSpec) -> AlgebraMatrix:
    """Cartesian sparsity operator: weighted sum of two-away transfers
    piercing each interface; lands back in the adjacent-support space and
    satisfies <Z^flat, A> = <Z^flat, A_down> for all Z there."""
    mesh = mesh_index(grid)
    return AlgebraMatrix(_sparsify_entries(a, mesh), mesh.omega)


def lie_deriv_one_form(a: AlgebraMatrix, c_flat: DiscreteOneForm | np.ndarray) -> np.ndarray:
    """L_A C^flat = -[A, C^flat Omega] Omega^-1."""
    cf = c_flat.entries if isinstance(c_flat, DiscreteOneForm) else np.asarray(c_flat)
    omega = a.cell_volumes
    m = cf * omega[None, :]
    comm = a.entries @ m - m @ a.entries
    return -comm / omega[None, :]


def lie_deriv_vector(a: AlgebraMatrix, b: AlgebraMatrix, grid: GridSpec) -> AlgebraMatrix:
    """L_A B = -[A, B], post-composed with the sparsity operator."""
    comm = a.entries @ b.entries - b.entries @ a.entries
    return sparsify(-comm, grid)


# ---------------------------------------------------------------------------
# Weak equalities: pressure recovery
# ---------------------------------------------------------------------------


def recover_pressure(c_flat: DiscreteOneForm, grid: GridSpec, tol: float = 1e-8) -> DiscreteZeroForm:
    """Recover mean-zero P with C^flat_ij = P_i - P_j on adjacent pairs.

    Solved as least squares on the cell-adjacency graph; raises
    NotWeaklyNull if the residual exceeds tol (the one-form is then not a
    discrete pressure gradient).
    """
    mesh = mesh_index(grid)
    n = mesh.n
    lap = np.zeros((n, n))
    rhs = np.zeros(n)
    for c in range(n):
        for nb in mesh.neighbors(c):
            lap[c, c] += 1.0
            lap[c, nb] -= 1.0
            rhs[c] += c_flat.entries[c, nb]
    lap[0, :] = 0.0
    lap[0, 0] = 1.0
    rhs0 = rhs.copy()
    rhs0[0] = 0.0
    p = np.linalg.solve(lap, rhs0)
    p -= p.mean()
    resid = max(
        abs(p[c] - p[nb] - c_flat.entries[c, nb])
        for c in range(n)
        for nb in mesh.neighbors(c)
    )
    if resid > tol:
        raise NotWeaklyNull(f"gradient residual {resid:.3e} exceeds {tol:.1e}")
    return DiscreteZeroForm(p)


# ---------------------------------------------------------------------------
# Kelvin-Noether pairings
# ---------------------------------------------------------------------------


def kelvin_quantity(y: AlgebraMatrix, gamma: AlgebraMatrix, h: float, grid: GridSpec) -> float:
    """<(I + (h/2) L_Y) Y^flat, Gamma> in the dropped-cubic convention.

    This is (dtau^-1_{-hY})* Y^flat paired with Gamma after the cubic
    terms are dropped; it is the combination conserved exactly by the
    cubic-dropped update equations.
    """
    yf = flat(y, grid).entries
    m = yf + 0.5 * h * lie_deriv_one_form(y, yf)
    return pairing(m, gamma.entries, y.cell_volumes)


def cross_helicity(y: AlgebraMatrix, r: AlgebraMatrix, h: float, grid: GridSpec) -> float:
    """Discrete cross-helicity: the Kelvin quantity with Gamma = R."""
    return kelvin_quantity(y, r, h, grid)


def loop_field(grid: GridSpec, i: int, j: int) -> StaggeredVectorField:
    """Unit discrete loop circulating around vertex (i, j).

    Pairing flat(w) with its flux matrix returns eps^3 times the vertex
    curl of w: the discrete circulation around the smallest loop.
    """
    u = np.zeros(grid.u_shape)
    v = np.zeros(grid.v_shape)
    nx, ny = grid.nx, grid.ny
    if grid.periodic:
        u[i % nx, (j - 1) % ny] = 1.0
        u[i % nx, j % ny] = -1.0
        v[i % nx, j % ny] = 1.0
        v[(i - 1) % nx, j % ny] = -1.0
    else:
        if not (1 <= i <= nx - 1 and 1 <= j <= ny - 1):
            raise ValueError("loop vertex must be interior on a walled grid")
        u[i, j - 1] = 1.0
        u[i, j] = -1.0
        v[i, j] = 1.0
        v[i - 1, j] = -1.0
    return StaggeredVectorField(grid, u, v)


# ---------------------------------------------------------------------------
# Dense oracle steppers (matrix-form update equations, cubic terms dropped)
# ---------------------------------------------------------------------------


def edge_field_of_one_form(m: np.ndarray, grid: GridSpec) -> StaggeredVectorField:
    """Edge values of the adjacent entries of a one-form (entry = -eps * value)."""
    mesh = mesh_index(grid)
    u = np.zeros(grid.u_shape)
    v = np.zeros(grid.v_shape)
    for i in range(grid.u_shape[0]):
        for j in range(grid.ny):
            left, right = mesh.cell_at(i - 1, j), mesh.cell_at(i, j)
            if left is not None and right is not None:
                u[i, j] = -m[left, right] / grid.eps
    for i in range(grid.nx):
        for j in range(grid.v_shape[1]):
            bottom, top = mesh.cell_at(i, j - 1), mesh.cell_at(i, j)
            if bottom is not None and top is not None:
                v[i, j] = -m[bottom, top] / grid.eps
    return StaggeredVectorField(grid, u, v)


def dense_psi(w: StaggeredVectorField) -> StaggeredVectorField:
    """Edge field of the adjacent entries of L_Y Y^flat (matrix route).

    Equals psi_op(w) modulo a discrete gradient; the momentum solve
    absorbs the difference into the pressure.
    """
    y = to_flux_matrix(w)
    m = lie_deriv_one_form(y, flat(y, w.grid).entries)
    return edge_field_of_one_form(m, w.grid)


def dense_lorentz(b: StaggeredVectorField) -> StaggeredVectorField:
    """Edge field of L_R R^flat: the magnetic force one-form."""
    return dense_psi(b)


def dense_fluid_step(w_prev: StaggeredVectorField, h: float, cfg, forcing: StaggeredVectorField | None = None):
    """Matrix-form fluid momentum update (cubic dropped), solved densely.

    Same Picard-plus-projection driver as the production path, but with
    the advection operator evaluated through dense flat/Lie-derivative
    matrices instead of stencils.
    """
    from .timestepper import momentum_solve

    grid = w_prev.grid
    explicit = (-0.5 * h) * dense_psi(w_prev)
    if forcing is not None:
        explicit = explicit + h * forcing
    result = momentum_solve(w_prev, explicit, lambda wn: (-0.5 * h) * dense_psi(wn), grid, cfg, h)
    return StaggeredVectorField(grid, result.u, result.v), result


def _pack(w: StaggeredVectorField) -> np.ndarray:
    return np.concatenate([w.u.ravel(), w.v.ravel()])


def _unpack(x: np.ndarray, grid: GridSpec) -> StaggeredVectorField:
    nu = int(np.prod(grid.u_shape))
    return StaggeredVectorField(grid, x[:nu].reshape(grid.u_shape), x[nu:].reshape(grid.v_shape))


def dense_advect_field(
    adv: StaggeredVectorField, b_prev: StaggeredVectorField, h: float
) -> StaggeredVectorField:
    """Trapezoidal sparsified Lie advection, assembled and solved densely.

    (I + (h/2) L_down) B_new = (I - (h/2) L_down) B_prev with
    L_down(B) = sparsify(-[Y_adv, B]): the matrix form of the magnetic
    update and of discrete-loop pushforward.
    """
    grid = adv.grid
    mesh = mesh_index(grid)
    y = to_flux_matrix(adv).entries

    def lie_down(x: np.ndarray) -> np.ndarray:
        b = _flux_entries(_unpack(x, grid))
        comm = _sparsify_entries(-(y @ b - b @ y), mesh)
        return _pack(edge_field_of_one_form(comm * (2.0 * grid.eps**2), grid))

    dim = _pack(b_prev).size
    op = np.empty((dim, dim))
    basis = np.zeros(dim)
    for idx in range(dim):
        basis[:] = 0.0
        basis[idx] = 1.0
        op[:, idx] = lie_down(basis)
    lhs = np.eye(dim) + 0.5 * h * op
    rhs = (np.eye(dim) - 0.5 * h * op) @ _pack(b_prev)
    return _unpack(np.linalg.solve(lhs, rhs), grid)


def dense_mhd_step(
    w_prev: StaggeredVectorField, b_prev: StaggeredVectorField, h: float, cfg
):
    """Matrix-form MHD step: dense magnetic advection, then dense momentum
    solve with the level-k Lorentz force."""
    b_new = dense_advect_field(w_prev, b_prev, h)
    w_new, result = dense_fluid_step(w_prev, h, cfg, forcing=dense_lorentz(b_new))
    return w_new, b_new, result
