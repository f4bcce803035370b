"""Discretized Hilbert-space primitives.

Grids, factor spaces, states, dense operators, tensor products and the
discrete inner product.  Everything here is dense and immutable; this module
is the correctness layer on which the dynamics and measurement machinery is
built.

Units: hbar = 1 and particle mass m = 1/2 throughout, so the kinetic energy
operator is -d^2/dx^2 and a plane wave exp(i k x) has energy k^2 and group
velocity 2 k.  All lengths and times are dimensionless.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContractError,
    EmptyRegionError,
    ParameterError,
    StructureError,
)

HBAR = 1.0

HERMITICITY_TOL = 1e-10
NORMALIZATION_TOL = 1e-12

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class Grid:
    """Uniform 1D grid with inclusive endpoints, x_j = x_min + j*dx."""

    n_points: int
    x_min: float
    x_max: float

    def __post_init__(self):
        if self.n_points < 3:
            raise ParameterError("grid needs at least 3 points")
        if not self.x_max > self.x_min:
            raise ParameterError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)


@dataclass(frozen=True)
class FactorSpace:
    """One tensor factor: a position grid, a spin-1/2, or a pointer grid.

    The canonical ordering of factors in a composite space is
    position (x) spin (x) pointer; all tensor builders in this package
    follow it.
    """

    kind: str  # "position" | "spin" | "pointer"
    grid: Grid | None = None

    def __post_init__(self):
        if self.kind in ("position", "pointer"):
            if self.grid is None:
                raise StructureError(f"{self.kind} factor requires a grid")
        elif self.kind == "spin":
            if self.grid is not None:
                raise StructureError("spin factor carries no grid")
        else:
            raise StructureError(f"unknown factor kind {self.kind!r}")

    @property
    def dimension(self) -> int:
        return 2 if self.kind == "spin" else self.grid.n_points

    @property
    def weight(self) -> float:
        """Quadrature weight of one cell: dx for continuous factors, 1 for spin."""
        return 1.0 if self.kind == "spin" else self.grid.dx


def position_space(grid: Grid) -> FactorSpace:
    return FactorSpace("position", grid)


def spin_space() -> FactorSpace:
    return FactorSpace("spin")


def pointer_space(grid: Grid) -> FactorSpace:
    return FactorSpace("pointer", grid)


def space_dimension(space: tuple[FactorSpace, ...]) -> int:
    dim = 1
    for f in space:
        dim *= f.dimension
    return dim


def space_weight(space: tuple[FactorSpace, ...]) -> float:
    w = 1.0
    for f in space:
        w *= f.weight
    return w


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Complex amplitude vector on an ordered product of factor spaces.

    `representation_time` records the instant the amplitudes refer to;
    propagation returns new states with an updated time stamp.
    """

    space: tuple[FactorSpace, ...]
    amplitudes: np.ndarray
    representation_time: float = 0.0

    def __post_init__(self):
        space = tuple(self.space)
        object.__setattr__(self, "space", space)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size != space_dimension(space):
            raise StructureError(
                f"amplitude vector of length {amps.size} does not match "
                f"space dimension {space_dimension(space)}"
            )
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def cell_weight(self) -> float:
        return space_weight(self.space)

    def norm(self) -> float:
        return float(np.sqrt(self.cell_weight) * np.linalg.norm(self.amplitudes))

    def normalized(self) -> "QuantumState":
        n = self.norm()
        if n == 0.0:
            raise ParameterError("cannot normalize the zero state")
        return QuantumState(self.space, self.amplitudes / n, self.representation_time)

    def at_time(self, t: float) -> "QuantumState":
        return QuantumState(self.space, self.amplitudes, t)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense complex matrix on an ordered product of factor spaces."""

    space: tuple[FactorSpace, ...]
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        space = tuple(self.space)
        object.__setattr__(self, "space", space)
        mat = np.asarray(self.matrix, dtype=complex)
        dim = space_dimension(space)
        if mat.shape != (dim, dim):
            raise StructureError(
                f"matrix shape {mat.shape} does not match space dimension {dim}"
            )
        if self.hermitian:
            defect = np.max(np.abs(mat - mat.conj().T)) if dim else 0.0
            if defect >= HERMITICITY_TOL:
                raise ContractError(
                    f"matrix declared hermitian but |M - M^dag| = {defect:.3e}"
                )
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def apply(self, state: QuantumState) -> QuantumState:
        if tuple(state.space) != self.space:
            raise StructureError("operator and state live on different spaces")
        return QuantumState(
            state.space, self.matrix @ state.amplitudes, state.representation_time
        )


@dataclass(frozen=True)
class Region:
    """Spatial interval [x_lo, x_hi); resolved on a grid by the half-open rule.

    A grid point x_j belongs to the region iff x_lo <= x_j < x_hi, so
    adjacent regions partition the grid without double counting.
    """

    x_lo: float
    x_hi: float

    def __post_init__(self):
        if not self.x_hi > self.x_lo:
            raise ParameterError("region needs x_lo < x_hi")

    def indices(self, grid: Grid) -> np.ndarray:
        x = grid.points
        idx = np.nonzero((x >= self.x_lo) & (x < self.x_hi))[0]
        if idx.size == 0:
            raise EmptyRegionError(
                f"region [{self.x_lo}, {self.x_hi}) contains no grid point"
            )
        return idx

    def indicator(self, grid: Grid) -> np.ndarray:
        ind = np.zeros(grid.n_points)
        ind[self.indices(grid)] = 1.0
        return ind


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """Discrete inner product <a|b>, conjugate-linear in the first argument.

    Continuous factors contribute their cell width dx as quadrature weight.
    """
    if tuple(a.space) != tuple(b.space):
        raise StructureError("inner product between states on different spaces")
    return complex(a.cell_weight * np.vdot(a.amplitudes, b.amplitudes))


def projector(region: Region, grid: Grid) -> OperatorMatrix:
    """Diagonal 0/1 projector onto the grid points inside `region`."""
    diag = region.indicator(grid)
    return OperatorMatrix(
        (position_space(grid),), np.diag(diag.astype(complex)), hermitian=True
    )


def identity_operator(space) -> OperatorMatrix:
    space = tuple(space) if isinstance(space, (tuple, list)) else (space,)
    return OperatorMatrix(space, np.eye(space_dimension(space)), hermitian=True)


def spin_operator(matrix: np.ndarray, hermitian: bool = True) -> OperatorMatrix:
    return OperatorMatrix((spin_space(),), matrix, hermitian=hermitian)


def tensor_extend(op: OperatorMatrix, full_space) -> OperatorMatrix:
    """Extend `op` to `full_space` by tensoring identities on absent factors.

    The factors of `op` must appear in `full_space` in the same relative
    order; they need not be contiguous.
    """
    full_space = tuple(full_space)
    positions = []
    j = 0
    for f in op.space:
        while j < len(full_space) and full_space[j] != f:
            j += 1
        if j == len(full_space):
            raise StructureError(
                "operator factor not found in full space (or out of order)"
            )
        positions.append(j)
        j += 1

    dims = [f.dimension for f in full_space]
    m = len(full_space)
    # einsum: out[r0..r(m-1), c0..c(m-1)] = op[r_S, c_S] * prod_j eye[r_j, c_j]
    letters = "abcdefghijkl"
    row = [letters[k] for k in range(m)]
    col = [letters[k + m] for k in range(m)]
    op_dims = [dims[p] for p in positions]
    op_tensor = op.matrix.reshape(op_dims + op_dims)
    subscripts = ["".join(row[p] for p in positions) + "".join(col[p] for p in positions)]
    operands = [op_tensor]
    for k in range(m):
        if k not in positions:
            subscripts.append(row[k] + col[k])
            operands.append(np.eye(dims[k]))
    out_sub = "".join(row) + "".join(col)
    expr = ",".join(subscripts) + "->" + out_sub
    full = np.einsum(expr, *operands)
    dim = space_dimension(full_space)
    return OperatorMatrix(full_space, full.reshape(dim, dim), hermitian=op.hermitian)


def gaussian_packet(grid: Grid, x0: float, sigma: float, k0: float) -> QuantumState:
    """Normalized Gaussian wavepacket exp(-(x-x0)^2/(4 sigma^2)) exp(i k0 x).

    `sigma` is the position-space standard deviation.  Raises if the packet
    is unresolvable on the grid; warns if its tails come within 5 sigma of a
    boundary.
    """
    if sigma <= 0:
        raise ParameterError("sigma must be positive")
    if sigma <= 3 * grid.dx:
        raise ParameterError(
            f"sigma = {sigma} unresolvable: need sigma > 3 dx = {3 * grid.dx}"
        )
    if x0 - grid.x_min < 5 * sigma or grid.x_max - x0 < 5 * sigma:
        warnings.warn("packet support within 5 sigma of a grid boundary")
    x = grid.points
    amps = np.exp(-((x - x0) ** 2) / (4.0 * sigma**2)) * np.exp(1j * k0 * x)
    state = QuantumState((position_space(grid),), amps)
    return state.normalized()


def gaussian_pointer(grid: Grid, width: float) -> QuantumState:
    """Gaussian pointer profile centered at q = 0 with standard deviation `width`."""
    return gaussian_packet(grid, 0.0, width, 0.0)


def eigendecompose(op: OperatorMatrix):
    """Eigenvalues (ascending) and discrete-orthonormal eigenvectors of a
    hermitian operator."""
    if not op.hermitian:
        raise ContractError("eigendecompose requires a hermitian operator")
    vals, vecs = np.linalg.eigh(op.matrix)
    scale = 1.0 / np.sqrt(space_weight(op.space))
    states = [
        QuantumState(op.space, scale * vecs[:, k]) for k in range(vals.size)
    ]
    return vals.real, states


def position_operator(grid: Grid) -> OperatorMatrix:
    return OperatorMatrix(
        (position_space(grid),), np.diag(grid.points.astype(complex)), hermitian=True
    )


def momentum_operator(grid: Grid) -> OperatorMatrix:
    """-i hbar d/dx with central differences and hard-wall boundaries."""
    n = grid.n_points
    m = np.zeros((n, n), dtype=complex)
    c = -1j * HBAR / (2.0 * grid.dx)
    for j in range(n):
        if j + 1 < n:
            m[j, j + 1] = c
        if j - 1 >= 0:
            m[j, j - 1] = -c
    return OperatorMatrix((position_space(grid),), m, hermitian=True)


def fourier_momentum_values(grid: Grid) -> np.ndarray:
    """Momentum eigenvalues of the DFT-periodic momentum operator on `grid`."""
    return 2.0 * np.pi * HBAR * np.fft.fftfreq(grid.n_points, d=grid.dx)


def fourier_momentum_operator(grid: Grid) -> OperatorMatrix:
    """Dense momentum operator diagonalized by the DFT (periodic boundary).

    Satisfies [p, q] = -i hbar up to edge effects and generates exact grid
    translations; used as the pointer momentum.
    """
    n = grid.n_points
    f = np.fft.fft(np.eye(n), axis=0)
    finv = np.fft.ifft(np.eye(n), axis=0)
    mat = finv @ np.diag(fourier_momentum_values(grid).astype(complex)) @ f
    mat = 0.5 * (mat + mat.conj().T)  # kill roundoff asymmetry
    return OperatorMatrix((pointer_space(grid),), mat, hermitian=True)


def basis_cell_state(grid: Grid, index: int, space=None, time: float = 0.0) -> QuantumState:
    """Normalized indicator of a single grid cell (cell-averaged postselector)."""
    if not 0 <= index < grid.n_points:
        raise ParameterError("cell index outside grid")
    amps = np.zeros(grid.n_points, dtype=complex)
    amps[index] = 1.0 / np.sqrt(grid.dx)
    return QuantumState(space or (position_space(grid),), amps, time)
