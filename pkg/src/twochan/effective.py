"""Energy-independent effective Hamiltonians and their derived structure.

Given a graph operator Q21, each channel gets H_alpha = A_alpha + W_alpha
with the energy-independent potential W_alpha = B_{alpha,beta} Q_{beta,alpha}
and the weight X_alpha = I + Q_{alpha,beta} Q_{alpha,beta}^* that makes
H_alpha self-adjoint in the inner product [f, g] = <X f, g>.  The same Q
block-diagonalizes or triangularizes the full Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, StructuralError
from .model import TwoChannelProblem, assemble_full
from .riccati import RiccatiSolution

__all__ = [
    "EffectiveChannel",
    "BlockDiagonalization",
    "Triangularization",
    "build_effective",
    "block_diagonalize",
    "triangularize",
    "weighted_inner_product",
    "symmetrize",
    "spectral_match_defect",
    "weighted_selfadjointness_defect",
    "graph_invariance_defect",
    "graph_orthogonality_defect",
    "qx_unitarity_defect",
    "v_consistency_defect",
]


@dataclass(frozen=True)
class EffectiveChannel:
    """Per-channel effective structure: H = A + W and the weight X >= I."""

    h: np.ndarray
    w: np.ndarray
    x_weight: np.ndarray
    channel: int


def _graph_blocks(solution: RiccatiSolution, channel: int) -> tuple[np.ndarray, np.ndarray]:
    """(Q_{beta,alpha}, Q_{alpha,beta}) for the requested channel alpha."""
    if channel == 1:
        return solution.q21, solution.q12
    if channel == 2:
        return solution.q12, solution.q21
    raise StructuralError(f"channel index must be 1 or 2, got {channel}")


def build_effective(problem: TwoChannelProblem, solution: RiccatiSolution,
                    channel: int) -> EffectiveChannel:
    """H_alpha = A_alpha + B_{alpha,beta} Q_{beta,alpha} for one channel."""
    q_in, q_out = _graph_blocks(solution, channel)
    b_out = problem.coupling_from(channel)
    w = b_out @ q_in
    h = np.diag(problem.channel(channel).points.astype(complex)) + w
    x = np.eye(q_out.shape[0]) + q_out @ q_out.conj().T
    return EffectiveChannel(h=h, w=w, x_weight=x, channel=channel)


@dataclass(frozen=True)
class BlockDiagonalization:
    """Similarity transform record for H' = Q_full^{-1} H Q_full."""

    q_full: np.ndarray
    q_full_inv: np.ndarray
    h_prime: np.ndarray
    defect: float  # norm of the off-diagonal blocks of H'


def block_diagonalize(problem: TwoChannelProblem,
                      solution: RiccatiSolution) -> BlockDiagonalization:
    """Reduce the full Hamiltonian to block-diagonal form via the graph.

    The inverse uses the explicit formula
    Q_full^{-1} = diag(X1^{-1}, X2^{-1}) [[I, -Q12], [-Q21, I]],
    whose validity rests on X_alpha >= I.
    """
    n1, n2 = problem.n1, problem.n2
    q21, q12 = solution.q21, solution.q12
    q_full = np.block([[np.eye(n1), q12], [q21, np.eye(n2)]])
    x1 = np.eye(n1) + q12 @ q12.conj().T
    x2 = np.eye(n2) + q21 @ q21.conj().T
    top = np.linalg.solve(x1, np.hstack([np.eye(n1), -q12]))
    bottom = np.linalg.solve(x2, np.hstack([-q21, np.eye(n2)]))
    q_inv = np.vstack([top, bottom])
    h_prime = q_inv @ assemble_full(problem) @ q_full
    defect = max(
        float(np.linalg.norm(h_prime[:n1, n1:], 2)),
        float(np.linalg.norm(h_prime[n1:, :n1], 2)),
    )
    return BlockDiagonalization(q_full=q_full, q_full_inv=q_inv,
                                h_prime=h_prime, defect=defect)


@dataclass(frozen=True)
class Triangularization:
    """Record for H^(alpha) = O_alpha^{-1} H O_alpha in (alpha, beta) order."""

    o_alpha: np.ndarray
    h_tri: np.ndarray
    defect: float  # norm of the lower-left block


def triangularize(problem: TwoChannelProblem, solution: RiccatiSolution,
                  channel: int) -> Triangularization:
    """Bring H to triangular form [[H_alpha, B_ab], [0, H_beta^*]]."""
    q_in, _ = _graph_blocks(solution, channel)
    alpha = problem.channel(channel)
    beta = problem.channel(3 - channel)
    b_ab = problem.coupling_from(channel)
    full = np.block([
        [np.diag(alpha.points.astype(complex)), b_ab],
        [b_ab.conj().T, np.diag(beta.points.astype(complex))],
    ])
    na, nb = alpha.n, beta.n
    o_alpha = np.block([[np.eye(na), np.zeros((na, nb))], [q_in, np.eye(nb)]])
    o_inv = np.block([[np.eye(na), np.zeros((na, nb))], [-q_in, np.eye(nb)]])
    h_tri = o_inv @ full @ o_alpha
    defect = float(np.linalg.norm(h_tri[na:, :na], 2))
    return Triangularization(o_alpha=o_alpha, h_tri=h_tri, defect=defect)


def weighted_inner_product(f: np.ndarray, g: np.ndarray,
                           x_weight: np.ndarray) -> complex:
    """[f, g] = <X f, g>, linear in f and conjugate-linear in g."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape != g.shape or f.shape[0] != x_weight.shape[0]:
        raise StructuralError(
            f"inner-product dimensions disagree: {f.shape}, {g.shape}, "
            f"weight {x_weight.shape}"
        )
    return complex(np.vdot(g, x_weight @ f))


def _weight_sqrts(x_weight: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    evals, evecs = np.linalg.eigh(x_weight)
    if evals.min() <= 0.0:
        raise NumericalError(
            f"weight operator has non-positive eigenvalue {evals.min():.3e}"
        )
    root = (evecs * np.sqrt(evals)) @ evecs.conj().T
    inv_root = (evecs / np.sqrt(evals)) @ evecs.conj().T
    return root, inv_root


def symmetrize(effective: EffectiveChannel) -> np.ndarray:
    """H'' = X^{1/2} H X^{-1/2}: Hermitian, same spectrum as H.

    Its eigenvectors are X^{1/2} psi, not those of the original spectral
    problem; both pictures are exported by the harness.
    """
    root, inv_root = _weight_sqrts(effective.x_weight)
    return root @ effective.h @ inv_root


# ---------------------------------------------------------------------------
# Defect functionals used by the verification stage.

def spectral_match_defect(problem: TwoChannelProblem, eff1: EffectiveChannel,
                          eff2: EffectiveChannel) -> float:
    """Max distance between sorted eigenvalues of H1 (+) H2 and the full H."""
    direct = np.concatenate([np.linalg.eigvals(eff1.h), np.linalg.eigvals(eff2.h)])
    full = np.linalg.eigvalsh(assemble_full(problem)).astype(complex)
    return float(np.max(np.abs(np.sort_complex(direct) - np.sort_complex(full))))


def weighted_selfadjointness_defect(effective: EffectiveChannel) -> float:
    """||X H - H^* X||, the matrix form of self-adjointness in [.,.]."""
    x, h = effective.x_weight, effective.h
    return float(np.linalg.norm(x @ h - h.conj().T @ x, 2))


def graph_invariance_defect(problem: TwoChannelProblem, solution: RiccatiSolution,
                            eff1: EffectiveChannel) -> float:
    """||H [I; Q21] - [I; Q21] H1||: invariance of the graph subspace."""
    g = np.vstack([np.eye(problem.n1), solution.q21])
    return float(np.linalg.norm(assemble_full(problem) @ g - g @ eff1.h, 2))


def graph_orthogonality_defect(problem: TwoChannelProblem,
                               solution: RiccatiSolution) -> float:
    """Entrywise Gram block of the two graph subspaces (should vanish)."""
    g1 = np.vstack([np.eye(problem.n1), solution.q21])
    g2 = np.vstack([solution.q12, np.eye(problem.n2)])
    return float(np.max(np.abs(g1.conj().T @ g2)))


def qx_unitarity_defect(problem: TwoChannelProblem,
                        solution: RiccatiSolution) -> float:
    """||U^* U - I|| for U = Q_full X^{-1/2}, X = diag(X1, X2)."""
    block = block_diagonalize(problem, solution)
    n1 = problem.n1
    x1 = np.eye(n1) + solution.q12 @ solution.q12.conj().T
    x2 = np.eye(problem.n2) + solution.q21 @ solution.q21.conj().T
    _, inv_root1 = _weight_sqrts(x1)
    _, inv_root2 = _weight_sqrts(x2)
    inv_root = np.block([
        [inv_root1, np.zeros((n1, problem.n2))],
        [np.zeros((problem.n2, n1)), inv_root2],
    ])
    u = block.q_full @ inv_root
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]), 2))


def v_consistency_defect(problem: TwoChannelProblem,
                         effective: EffectiveChannel) -> float:
    """Max over eigenpairs (z, psi) of ||W psi - B (z - A_beta)^{-1} B^* psi||.

    Verifies that eigenvectors of H_alpha solve the original
    energy-dependent problem with V_alpha(z) in place of W_alpha.
    """
    beta = problem.channel(3 - effective.channel)
    b_ab = problem.coupling_from(effective.channel)
    evals, evecs = np.linalg.eig(effective.h)
    worst = 0.0
    for z, psi in zip(evals, evecs.T):
        resolvent = (z - beta.points) ** -1
        v_psi = b_ab @ (resolvent * (b_ab.conj().T @ psi))
        defect = np.linalg.norm(effective.w @ psi - v_psi) / np.linalg.norm(psi)
        worst = max(worst, float(defect))
    return worst
