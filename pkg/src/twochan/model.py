"""Finite-dimensional model of a coupled pair of spectral channels.

Each channel Hamiltonian is kept in the representation where it acts by
multiplication: a list of discrete eigenvalues plus quadrature grids for any
continuum bands.  All operator algebra is done in weight-normalized
coordinates, i.e. a function f is represented by the vector sqrt(w_i) f(l_i)
and an integral operator with kernel K(l, m) by the matrix
sqrt(w_i) K(l_i, m_j) sqrt(w_j).  In these coordinates the channel inner
product is the plain complex dot product, adjoints are conjugate transposes,
and every operator identity of the continuous theory becomes an exact matrix
identity at fixed grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StructuralError

__all__ = [
    "Band",
    "SpectralOperator",
    "CouplingBlock",
    "TwoChannelProblem",
    "LinearTermReduction",
    "assemble_full",
    "spectral_gap",
    "hilbert_schmidt_norm",
    "reduce_linear_term",
    "inner",
]

HERMITICITY_RTOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def trapezoid_weights(a: float, b: float, n: int) -> np.ndarray:
    """Composite-trapezoid weights on n equispaced points covering [a, b]."""
    h = (b - a) / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = h / 2.0
    return w


@dataclass(frozen=True)
class Band:
    """One finite continuum interval (a, b) discretized by n_points nodes."""

    a: float
    b: float
    n_points: int
    rule: str = "trapezoid"

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise StructuralError(f"band endpoints must be finite, got ({self.a}, {self.b})")
        if not self.a < self.b:
            raise StructuralError(f"band needs a < b, got ({self.a}, {self.b})")
        if self.n_points < 2:
            raise StructuralError(f"band needs n_points >= 2, got {self.n_points}")
        if self.rule != "trapezoid":
            raise StructuralError(f"unknown quadrature rule {self.rule!r}")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n_points)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.a, self.b, self.n_points)


@dataclass(frozen=True)
class SpectralOperator:
    """A self-adjoint channel Hamiltonian in its diagonal representation.

    The index set is the concatenation of the (sorted) discrete eigenvalues
    and the grids of all continuum bands; discrete points carry unit weight.
    """

    discrete_eigenvalues: tuple[float, ...] = ()
    continuum_bands: tuple[Band, ...] = ()
    points: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        discrete = tuple(sorted(float(x) for x in self.discrete_eigenvalues))
        if any(not np.isfinite(x) for x in discrete):
            raise StructuralError("discrete eigenvalues must be finite")
        bands = tuple(self.continuum_bands)
        for i, u in enumerate(bands):
            for v in bands[i + 1:]:
                if max(u.a, v.a) <= min(u.b, v.b):
                    raise StructuralError(f"bands ({u.a},{u.b}) and ({v.a},{v.b}) overlap")
            for x in discrete:
                if u.a <= x <= u.b:
                    raise StructuralError(
                        f"discrete eigenvalue {x} lies inside continuum band ({u.a},{u.b})"
                    )
        if not discrete and not bands:
            raise StructuralError("channel spectrum is empty")
        pts = [np.asarray(discrete, dtype=float)] + [band.grid for band in bands]
        wts = [np.ones(len(discrete))] + [band.weights for band in bands]
        object.__setattr__(self, "discrete_eigenvalues", discrete)
        object.__setattr__(self, "continuum_bands", bands)
        object.__setattr__(self, "points", _readonly(np.concatenate(pts)))
        object.__setattr__(self, "weights", _readonly(np.concatenate(wts)))

    @property
    def n(self) -> int:
        return self.points.size

    @property
    def n_discrete(self) -> int:
        return len(self.discrete_eigenvalues)

    @property
    def grid_points(self) -> np.ndarray:
        return self.points[self.n_discrete:]

    @property
    def is_band_point(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[: self.n_discrete] = False
        return mask

    @property
    def is_band_endpoint(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        offset = self.n_discrete
        for band in self.continuum_bands:
            mask[offset] = True
            mask[offset + band.n_points - 1] = True
            offset += band.n_points
        return mask

    @property
    def is_band_interior(self) -> np.ndarray:
        return self.is_band_point & ~self.is_band_endpoint

    @property
    def purely_discrete(self) -> bool:
        return not self.continuum_bands

    def intervals(self) -> list[tuple[float, float]]:
        """The spectrum as closed intervals; points appear as [x, x]."""
        out = [(x, x) for x in self.discrete_eigenvalues]
        out += [(band.a, band.b) for band in self.continuum_bands]
        return out

    def band_of(self, index: int) -> Band | None:
        """Owning band of a grid index, None for discrete indices."""
        offset = self.n_discrete
        for band in self.continuum_bands:
            if offset <= index < offset + band.n_points:
                return band
            offset += band.n_points
        return None

    @property
    def norm(self) -> float:
        """Operator norm of the multiplication operator: max |point|."""
        return float(np.max(np.abs(self.points)))


@dataclass(frozen=True)
class CouplingBlock:
    """Off-diagonal coupling as raw kernel samples over two index sets.

    ``entries[i, j]`` is the kernel value B(l_i, m_j) with rows indexed by
    ``row_op`` and columns by ``col_op``.  Entries on continuum-band
    endpoints are forced to zero, matching the boundary-vanishing kernel
    assumption; the weighted matrix used in all operator products is
    sqrt(w_row) B sqrt(w_col).
    """

    entries: np.ndarray
    row_op: SpectralOperator
    col_op: SpectralOperator

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.shape != (self.row_op.n, self.col_op.n):
            raise StructuralError(
                f"coupling shape {e.shape} does not match index sets "
                f"({self.row_op.n}, {self.col_op.n})"
            )
        if not np.all(np.isfinite(e)):
            raise StructuralError("coupling entries must be finite")
        e = e.copy()
        e[self.row_op.is_band_endpoint, :] = 0.0
        e[:, self.col_op.is_band_endpoint] = 0.0
        object.__setattr__(self, "entries", _readonly(e))

    @property
    def row_weights(self) -> np.ndarray:
        return self.row_op.weights

    @property
    def col_weights(self) -> np.ndarray:
        return self.col_op.weights

    @property
    def weighted(self) -> np.ndarray:
        """Matrix of the integral operator in weight-normalized coordinates."""
        return (
            np.sqrt(self.row_weights)[:, None]
            * self.entries
            * np.sqrt(self.col_weights)[None, :]
        )

    def conjugate_transpose(self) -> "CouplingBlock":
        return CouplingBlock(self.entries.conj().T, self.col_op, self.row_op)


def _interval_distance(u: tuple[float, float], v: tuple[float, float]) -> float:
    return max(0.0, max(u[0], v[0]) - min(u[1], v[1]))


@dataclass(frozen=True)
class TwoChannelProblem:
    """The pair (A1, A2) with coupling B12 (B21 is its conjugate transpose)."""

    a1: SpectralOperator
    a2: SpectralOperator
    b12: CouplingBlock

    def __post_init__(self):
        if self.b12.entries.shape != (self.a1.n, self.a2.n):
            raise StructuralError(
                f"coupling block is {self.b12.entries.shape}, expected "
                f"({self.a1.n}, {self.a2.n})"
            )
        if self.b12.row_op is not self.a1 and self.b12.row_op != self.a1:
            raise StructuralError("coupling row index set differs from channel 1")
        if self.b12.col_op is not self.a2 and self.b12.col_op != self.a2:
            raise StructuralError("coupling column index set differs from channel 2")

    @classmethod
    def from_entries(cls, a1: SpectralOperator, a2: SpectralOperator,
                     entries: np.ndarray) -> "TwoChannelProblem":
        return cls(a1, a2, CouplingBlock(entries, a1, a2))

    @property
    def b21(self) -> CouplingBlock:
        return self.b12.conjugate_transpose()

    @property
    def gap(self) -> float:
        return spectral_gap(self)

    @property
    def hs_norm(self) -> float:
        return hilbert_schmidt_norm(self.b12)

    @property
    def n1(self) -> int:
        return self.a1.n

    @property
    def n2(self) -> int:
        return self.a2.n

    def channel(self, alpha: int) -> SpectralOperator:
        if alpha == 1:
            return self.a1
        if alpha == 2:
            return self.a2
        raise StructuralError(f"channel index must be 1 or 2, got {alpha}")

    def coupling_from(self, alpha: int) -> np.ndarray:
        """Weighted matrix of B_{alpha,beta} (maps channel beta to alpha)."""
        wb = self.b12.weighted
        return wb if alpha == 1 else wb.conj().T

    def swapped(self) -> "TwoChannelProblem":
        """The mirrored problem with the channels exchanged."""
        return TwoChannelProblem(self.a2, self.a1, self.b21)


def inner(f: np.ndarray, g: np.ndarray) -> complex:
    """Channel inner product <f, g> in weight-normalized coordinates.

    Linear in the first argument, conjugate-linear in the second.
    """
    return complex(np.vdot(g, f))


def assemble_full(problem: TwoChannelProblem) -> np.ndarray:
    """The full two-channel Hamiltonian as one Hermitian matrix.

    Diagonal blocks are the multiplication operators, off-diagonal blocks the
    weighted coupling; Hermiticity is exact by construction.
    """
    wb = problem.b12.weighted
    n1, n2 = problem.n1, problem.n2
    full = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    full[:n1, :n1] = np.diag(problem.a1.points)
    full[n1:, n1:] = np.diag(problem.a2.points)
    full[:n1, n1:] = wb
    full[n1:, :n1] = wb.conj().T
    return full


def spectral_gap(problem: TwoChannelProblem) -> float:
    """dist(sigma_1, sigma_2), with bands entering via interval endpoints.

    Returns 0.0 for overlapping spectra (the non-separated case).
    """
    s1, s2 = problem.a1.intervals(), problem.a2.intervals()
    if not s1 or not s2:
        raise StructuralError("spectral gap undefined for an empty spectrum")
    return min(_interval_distance(u, v) for u in s1 for v in s2)


def hilbert_schmidt_norm(block: CouplingBlock) -> float:
    """Weighted Hilbert-Schmidt norm: sqrt(sum w_i w_j |B_ij|^2).

    The squared terms are summed in sorted order so the value is exactly
    invariant under conjugate transposition of the block.
    """
    squares = (
        block.row_weights[:, None] * block.col_weights[None, :]
        * np.abs(block.entries) ** 2
    )
    return float(np.sqrt(np.sum(np.sort(squares, axis=None))))


@dataclass(frozen=True)
class LinearTermReduction:
    """Result of removing linear spectral-parameter terms from the coupling.

    ``problem`` is the reduced standard two-channel problem; ``map1`` and
    ``map2`` translate its eigenvector coordinates back to the original ones,
    u_alpha = map_alpha @ u_alpha_reduced.
    """

    problem: TwoChannelProblem
    map1: np.ndarray
    map2: np.ndarray


def _check_self_adjoint(n: np.ndarray, name: str) -> np.ndarray:
    n = np.asarray(n, dtype=complex)
    if n.ndim != 2 or n.shape[0] != n.shape[1]:
        raise StructuralError(f"{name} must be a square matrix")
    scale = max(1.0, np.linalg.norm(n))
    if np.linalg.norm(n - n.conj().T) > 1e-12 * scale:
        raise DomainError(f"{name} is not self-adjoint")
    return n


def reduce_linear_term(problem: TwoChannelProblem, n1: np.ndarray,
                       n2: np.ndarray) -> LinearTermReduction:
    """Absorb linear-in-z potential terms N_alpha into a standard problem.

    Transforms A -> (I+N)^{-1/2} A (I+N)^{-1/2} and
    B -> (I+N1)^{-1/2} B (I+N2)^{-1/2}, then rediagonalizes the transformed
    channel operators so the result is again a diagonal-representation
    problem.  Requires purely discrete channels and I + N_alpha positive
    definite (N_alpha >= (delta - 1) I with delta > 0).
    """
    if not (problem.a1.purely_discrete and problem.a2.purely_discrete):
        raise StructuralError("linear-term reduction requires purely discrete channels")
    mats = [_check_self_adjoint(n1, "n1"), _check_self_adjoint(n2, "n2")]
    ops = [problem.a1, problem.a2]
    for n_mat, op in zip(mats, ops):
        if n_mat.shape[0] != op.n:
            raise StructuralError(f"linear term is {n_mat.shape[0]}x{n_mat.shape[0]}, "
                                  f"channel has dimension {op.n}")
    if all(np.linalg.norm(m) == 0.0 for m in mats):
        eye1, eye2 = np.eye(problem.n1), np.eye(problem.n2)
        return LinearTermReduction(problem, eye1, eye2)

    inv_sqrts, rotations, spectra = [], [], []
    for n_mat, op in zip(mats, ops):
        evals, evecs = np.linalg.eigh(np.eye(op.n) + n_mat)
        if evals.min() <= 0.0:
            raise DomainError(f"I + N has non-positive eigenvalue {evals.min():.3e}")
        inv_sqrt = (evecs / np.sqrt(evals)) @ evecs.conj().T
        a_prime = inv_sqrt @ np.diag(op.points) @ inv_sqrt
        new_evals, rot = np.linalg.eigh(a_prime)
        inv_sqrts.append(inv_sqrt)
        rotations.append(rot)
        spectra.append(new_evals)

    b_reduced = (rotations[0].conj().T @ inv_sqrts[0] @ problem.b12.entries
                 @ inv_sqrts[1] @ rotations[1])
    a1_new = SpectralOperator(tuple(spectra[0]))
    a2_new = SpectralOperator(tuple(spectra[1]))
    # eigh sorts ascending while SpectralOperator re-sorts its input, so the
    # reduced coupling columns already match the stored eigenvalue order.
    reduced = TwoChannelProblem.from_entries(a1_new, a2_new, b_reduced)
    return LinearTermReduction(
        reduced,
        inv_sqrts[0] @ rotations[0],
        inv_sqrts[1] @ rotations[1],
    )
