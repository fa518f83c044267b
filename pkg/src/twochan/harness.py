"""Batch pipeline: solve -> verify -> scatter with structured reporting.

Stages run in dependency order (everything needs the Riccati solve); a
failed downstream stage is recorded in its own section without aborting
independent work.  Check failures are collected as dotted names in the
summary, and the report mapping is deterministic for fixed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    PartitionOverlapError,
    StructuralError,
    TwoChanError,
)
from .model import TwoChannelProblem, assemble_full
from .problem_io import ParsedProblem, problem_to_mapping
from .riccati import certify_contraction, solve_riccati
from .effective import (
    block_diagonalize,
    build_effective,
    graph_orthogonality_defect,
    qx_unitarity_defect,
    spectral_match_defect,
    symmetrize,
    triangularize,
    v_consistency_defect,
    weighted_selfadjointness_defect,
)
from .spectral import (
    adjoint_eigen_defect,
    biorthogonality_defect,
    completeness_check,
    dual_system,
    energy_dependent_residual,
    kernel_smoothness_probe,
    partition_spectrum,
    weight_identity_check,
)
from .scattering import scatter_channel

__all__ = ["RunConfig", "RunReport", "run", "VERIFY_TOLERANCES"]

STAGES = ("solve", "verify", "scatter")
SCHEMA_TAG = "twochan-report/1"

VERIFY_TOLERANCES = {
    "block_diag": 1e-10,
    "block_diag_h1": 1e-10,
    "block_diag_h2": 1e-10,
    "triangular": 1e-10,
    "qx_unitarity": 1e-10,
    "graph_invariance": 1e-10,
    "graph_orthogonality": 1e-10,
    "spectral_match_rel": 1e-8,          # * (1 + spectral radius)
    "x_weight_floor": 1e-10,             # 1 - min eig X
    "max_imag_rel": 1e-8,                # * spectral radius of H_alpha
    "weighted_selfadjoint_rel": 1e-10,   # * ||X|| ||H||
    "symmetrized_hermiticity_rel": 1e-9, # * ||H''||
    "v_consistency": 1e-8,
    "biorthogonality": 1e-9,
    "completeness": 1e-8,
    "weight_identity": 1e-8,
    "adjoint_residual": 1e-9,
    "energy_dependent": 1e-8,
}


@dataclass(frozen=True)
class RunConfig:
    """One batch run: which stages, which tolerances, where the output goes."""

    problem_path: str
    stages: tuple[str, ...] = ("solve",)
    tol: float = 1e-12
    max_iter: int = 200
    delta: float = 1.0
    seed: int = 0
    eps_ladder: tuple[float, ...] | None = None
    onshell_tol: float = 1e-3
    channel: int | None = None
    dump_operators: bool = False

    def __post_init__(self):
        if not self.stages:
            raise StructuralError("stage set must be non-empty")
        unknown = set(self.stages) - set(STAGES)
        if unknown:
            raise StructuralError(f"unknown stage(s) {sorted(unknown)}")
        for name in ("tol", "delta", "onshell_tol"):
            if getattr(self, name) <= 0:
                raise StructuralError(f"{name} must be positive")
        if self.max_iter < 1:
            raise StructuralError("max_iter must be a positive integer")


@dataclass
class RunReport:
    """Report mapping plus the aggregated pass/fail state."""

    mapping: dict
    passed: bool
    failures: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def _matrix_tree(m: np.ndarray) -> list:
    def fmt(z: complex):
        return float(z.real) if z.imag == 0.0 else f"{z.real!r}{z.imag:+}j"
    return [[fmt(complex(v)) for v in row] for row in np.asarray(m)]


def _norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


class _Checks:
    """Collects (name, value, bound) triples and the resulting failures."""

    def __init__(self, prefix: str, failures: list[str]):
        self.prefix = prefix
        self.failures = failures
        self.table: dict = {}

    def add(self, name: str, value: float, bound: float) -> None:
        self.table[name] = {"value": float(value), "bound": float(bound)}
        if not value <= bound:
            self.failures.append(f"{self.prefix}.{name}")


def _solve_section(problem: TwoChannelProblem, config: RunConfig, solution,
                   failures: list[str]) -> dict:
    certificate = certify_contraction(problem, config.delta)
    residual_bound = config.tol * (1.0 + problem.a1.norm + problem.a2.norm)
    checks = _Checks("solver", failures)
    checks.add("riccati_residual", solution.riccati_residual, residual_bound)
    section = {
        "certified": bool(solution.certified),
        "iterations": int(solution.iterations),
        "final_step_norm": float(solution.final_step_norm),
        "riccati_residual": float(solution.riccati_residual),
        "residual_bound": residual_bound,
        "q21_norm": _norm(solution.q21),
        "max_iterate_norm": float(solution.max_iterate_norm),
        "certificate": {
            "delta": certificate.delta,
            "bound": certificate.bound,
            "hs_norm": certificate.hs_norm,
            "passed": certificate.passed,
            "corollary_bound": certificate.corollary_bound,
        },
        "checks": checks.table,
        "iteration_table": [
            [k, float(step), float(resid)] for k, step, resid in solution.steps
        ],
    }
    if problem.n1 * problem.n2 <= 16 or config.dump_operators:
        section["q21"] = _matrix_tree(solution.q21)
    return section


def _graph_invariance(problem: TwoChannelProblem, solution, eff, channel: int) -> float:
    if channel == 1:
        g = np.vstack([np.eye(problem.n1), solution.q21])
    else:
        g = np.vstack([solution.q12, np.eye(problem.n2)])
    return _norm(assemble_full(problem) @ g - g @ eff.h)


def _verify_section(problem: TwoChannelProblem, config: RunConfig, solution,
                    failures: list[str]) -> dict:
    eff = {1: build_effective(problem, solution, 1),
           2: build_effective(problem, solution, 2)}
    full_eigs = np.linalg.eigvalsh(assemble_full(problem))
    spectral_radius = float(np.max(np.abs(full_eigs))) if full_eigs.size else 0.0
    tol = VERIFY_TOLERANCES

    checks = _Checks("effective", failures)
    bd = block_diagonalize(problem, solution)
    n1 = problem.n1
    checks.add("block_diag", bd.defect, tol["block_diag"])
    checks.add("block_diag_h1", _norm(bd.h_prime[:n1, :n1] - eff[1].h), tol["block_diag_h1"])
    checks.add("block_diag_h2", _norm(bd.h_prime[n1:, n1:] - eff[2].h), tol["block_diag_h2"])
    for alpha in (1, 2):
        tri = triangularize(problem, solution, alpha)
        checks.add(f"triangular_{alpha}", tri.defect, tol["triangular"])
    checks.add("qx_unitarity", qx_unitarity_defect(problem, solution), tol["qx_unitarity"])
    checks.add("graph_orthogonality", graph_orthogonality_defect(problem, solution),
               tol["graph_orthogonality"])
    checks.add("spectral_match", spectral_match_defect(problem, eff[1], eff[2]),
               tol["spectral_match_rel"] * (1.0 + spectral_radius))

    section: dict = {"defects": checks.table, "channels": {}}
    for alpha in (1, 2):
        e = eff[alpha]
        sub = _Checks(f"effective.channel{alpha}", failures)
        evals = np.linalg.eigvals(e.h)
        radius = float(np.max(np.abs(evals))) if evals.size else 0.0
        x_eigs = np.linalg.eigvalsh(e.x_weight)
        sub.add("x_weight_floor", 1.0 - float(x_eigs.min()), tol["x_weight_floor"])
        sub.add("max_imag", float(np.max(np.abs(evals.imag))),
                tol["max_imag_rel"] * max(radius, 1e-300))
        sub.add("weighted_selfadjoint", weighted_selfadjointness_defect(e),
                tol["weighted_selfadjoint_rel"] * _norm(e.x_weight) * max(_norm(e.h), 1e-300))
        h_sym = symmetrize(e)
        sub.add("symmetrized_hermiticity", _norm(h_sym - h_sym.conj().T),
                tol["symmetrized_hermiticity_rel"] * max(_norm(h_sym), 1e-300))
        sub.add("v_consistency", v_consistency_defect(problem, e), tol["v_consistency"])
        sub.add("graph_invariance", _graph_invariance(problem, solution, e, alpha),
                tol["graph_invariance"])
        channel_section = {
            "eigenvalues": [float(v) for v in np.sort(evals.real)],
            "checks": sub.table,
        }
        if config.dump_operators:
            channel_section["w_operator"] = _matrix_tree(e.w)
            channel_section["x_weight"] = _matrix_tree(e.x_weight)
        section["channels"][f"channel{alpha}"] = channel_section

    try:
        sys1, sys2, partition = partition_spectrum(
            problem, solution, effectives=(eff[1], eff[2]))
    except PartitionOverlapError as exc:
        failures.append("spectral.partition_overlap")
        section["spectral"] = {"error": str(exc)}
        return section

    spectral: dict = {
        "partition": [
            {"z": float(z), "channel": int(label), "residual": float(res)}
            for z, label, res in zip(partition.values, partition.labels,
                                     partition.residuals)
        ],
        "counts": {"channel1": int(sys1.values.size), "channel2": int(sys2.values.size)},
    }
    if sys1.values.size != problem.n1 or sys2.values.size != problem.n2:
        failures.append("spectral.partition_counts")
    for alpha, system in ((1, sys1), (2, sys2)):
        sub = _Checks(f"spectral.channel{alpha}", failures)
        op = problem.channel(alpha)
        system = dual_system(problem, solution, system)
        sub.add("biorthogonality", biorthogonality_defect(system), tol["biorthogonality"])
        sub.add("adjoint_residual", adjoint_eigen_defect(eff[alpha], system),
                tol["adjoint_residual"])
        sub.add("energy_dependent", energy_dependent_residual(problem, system),
                tol["energy_dependent"])
        if op.purely_discrete:
            sub.add("completeness", completeness_check(system), tol["completeness"])
            sub.add("weight_identity",
                    weight_identity_check(system, eff[alpha].x_weight),
                    tol["weight_identity"])
        entry: dict = {"checks": sub.table}
        if op.continuum_bands:
            stats = kernel_smoothness_probe(eff[alpha].w, op)
            entry["smoothness"] = {
                "holder_quotient": stats.holder_quotient,
                "decay_sup": stats.decay_sup,
                "theta": stats.theta,
                "gamma": stats.gamma,
            }
        spectral[f"channel{alpha}"] = entry
    section["spectral"] = spectral
    return section


def _scatter_section(problem: TwoChannelProblem, config: RunConfig, solution,
                     failures: list[str]) -> dict:
    if config.channel is not None:
        channels = [config.channel]
    else:
        channels = [alpha for alpha in (1, 2)
                    if problem.channel(alpha).continuum_bands]
    if not channels:
        raise StructuralError("no channel has a continuum band to scatter on")
    section: dict = {}
    for alpha in channels:
        result = scatter_channel(
            problem, solution, alpha,
            epsilon_ladder=config.eps_ladder,
            onshell_tol=config.onshell_tol,
        )
        checks = _Checks(f"scattering.channel{alpha}", failures)
        checks.add("unitarity", result.unitarity_defect, config.onshell_tol)
        checks.add("onshell_relative", result.onshell_defect_relative,
                   config.onshell_tol)
        checks.add("theorem8", result.theorem8_defect, config.onshell_tol)
        table = []
        for k, lam in enumerate(result.onshell_energies):
            s = result.s_extrapolated[k]
            table.append({
                "lambda": float(lam),
                "re_s": float(s.real),
                "im_s": float(s.imag),
                "abs_s": float(abs(s)),
                "onshell_defect": float(result.onshell_defects[k]),
            })
        section[f"channel{alpha}"] = {
            "eps_ladder": [float(e) for e in result.epsilon_ladder],
            "wave_ladder": [float(e) for e in result.wave_ladder],
            "unitarity_defect": float(result.unitarity_defect),
            "onshell_defect": float(result.onshell_defect),
            "onshell_defect_relative": float(result.onshell_defect_relative),
            "theorem8_defect": float(result.theorem8_defect),
            "extrapolation_corrections": [
                float(c) for c in result.extrapolation.corrections
            ],
            "extrapolation_warning": bool(result.extrapolation.warning),
            "checks": checks.table,
            "table": table,
        }
    return section


def run(parsed: ParsedProblem, config: RunConfig) -> RunReport:
    """Execute the requested stages and assemble the report mapping."""
    problem = parsed.problem
    failures: list[str] = []
    errors: list[str] = []
    wanted = set(config.stages)
    mapping: dict = {
        "schema": SCHEMA_TAG,
        "config": {
            "problem": config.problem_path,
            "stages": sorted(wanted, key=STAGES.index),
            "tol": config.tol,
            "max_iter": config.max_iter,
            "delta": config.delta,
            "seed": config.seed,
            "eps_ladder": (list(config.eps_ladder)
                           if config.eps_ladder is not None else None),
            "onshell_tol": config.onshell_tol,
            "dump_operators": config.dump_operators,
        },
        "problem": {
            **problem_to_mapping(problem, solver=parsed.solver or None),
            "gap": problem.gap,
            "hs_norm": problem.hs_norm,
        },
    }

    solution = solve_riccati(problem, tol=config.tol, max_iter=config.max_iter,
                             delta=config.delta)
    mapping["solver"] = _solve_section(problem, config, solution, failures)

    if "verify" in wanted:
        try:
            mapping["verify"] = _verify_section(problem, config, solution, failures)
        except TwoChanError as exc:
            errors.append(f"verify: {exc}")
            mapping["verify"] = {"error": str(exc)}
    if "scatter" in wanted:
        try:
            mapping["scatter"] = _scatter_section(problem, config, solution, failures)
        except TwoChanError as exc:
            errors.append(f"scatter: {exc}")
            mapping["scatter"] = {"error": str(exc)}

    passed = not failures and not errors
    mapping["summary"] = {
        "passed": passed,
        "failures": list(failures),
        "errors": list(errors),
    }
    return RunReport(mapping=mapping, passed=passed, failures=failures, errors=errors)
