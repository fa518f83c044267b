"""Problem-definition files: strict YAML schema, round-trippable.

Sections: ``channel1`` / ``channel2`` (each with ``discrete: [..]`` and/or
``bands: [{a, b, n}]``), ``coupling`` (either ``matrix: [[..]]`` row-major or
``kernel: {family: .., <params>}``) and an optional ``solver`` section with
``tol``, ``max_iter``, ``delta``.  Unknown keys are rejected with the key
path; YAML syntax errors carry line/column.  Complex matrix entries are
written as strings ("0.5+0.3j") and parsed with complex().
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import ProblemFileError, TwoChanError
from .kernels import sample_coupling
from .model import Band, CouplingBlock, SpectralOperator, TwoChannelProblem, hilbert_schmidt_norm

__all__ = ["ParsedProblem", "parse_problem", "load_problem", "problem_to_mapping",
           "dump_problem"]

_CHANNEL_KEYS = {"discrete", "bands"}
_BAND_KEYS = {"a", "b", "n", "rule"}
_TOP_KEYS = {"channel1", "channel2", "coupling", "solver"}
_COUPLING_KEYS = {"matrix", "kernel"}
_SOLVER_KEYS = {"tol", "max_iter", "delta"}


@dataclass(frozen=True)
class ParsedProblem:
    """A validated problem plus the solver defaults from its file."""

    problem: TwoChannelProblem
    solver: dict
    mapping: dict


def _fail(message: str, location: str) -> ProblemFileError:
    return ProblemFileError(message, location=location)


def _require_mapping(node, location: str) -> dict:
    if not isinstance(node, dict):
        raise _fail(f"expected a mapping, got {type(node).__name__}", location)
    return node


def _check_keys(node: dict, allowed: set, location: str) -> None:
    unknown = set(node) - allowed
    if unknown:
        raise _fail(f"unknown key {sorted(unknown)[0]!r}", location)


def _real(value, location: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(f"expected a number, got {value!r}", location)
    return float(value)


def _complex(value, location: str) -> complex:
    if isinstance(value, bool):
        raise _fail(f"expected a number, got {value!r}", location)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.strip().strip("()").replace(" ", ""))
        except ValueError:
            raise _fail(f"cannot parse complex number {value!r}", location) from None
    raise _fail(f"expected a number or complex string, got {value!r}", location)


def _parse_channel(node, location: str) -> SpectralOperator:
    node = _require_mapping(node, location)
    _check_keys(node, _CHANNEL_KEYS, location)
    discrete = node.get("discrete", [])
    if not isinstance(discrete, list):
        raise _fail("'discrete' must be a list", f"{location}.discrete")
    eigenvalues = tuple(
        _real(v, f"{location}.discrete[{i}]") for i, v in enumerate(discrete)
    )
    bands = []
    raw_bands = node.get("bands", [])
    if not isinstance(raw_bands, list):
        raise _fail("'bands' must be a list", f"{location}.bands")
    for i, raw in enumerate(raw_bands):
        loc = f"{location}.bands[{i}]"
        raw = _require_mapping(raw, loc)
        _check_keys(raw, _BAND_KEYS, loc)
        for key in ("a", "b", "n"):
            if key not in raw:
                raise _fail(f"band is missing {key!r}", loc)
        n = raw["n"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise _fail(f"'n' must be an integer, got {n!r}", f"{loc}.n")
        bands.append(Band(_real(raw["a"], f"{loc}.a"), _real(raw["b"], f"{loc}.b"),
                          n, raw.get("rule", "trapezoid")))
    try:
        return SpectralOperator(eigenvalues, tuple(bands))
    except TwoChanError as exc:
        raise _fail(str(exc), location) from exc


def _parse_coupling(node, a1: SpectralOperator, a2: SpectralOperator,
                    location: str) -> np.ndarray:
    node = _require_mapping(node, location)
    _check_keys(node, _COUPLING_KEYS, location)
    if ("matrix" in node) == ("kernel" in node):
        raise _fail("coupling needs exactly one of 'matrix' or 'kernel'", location)
    if "matrix" in node:
        rows = node["matrix"]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise _fail("'matrix' must be a list of rows", f"{location}.matrix")
        entries = np.array(
            [[_complex(v, f"{location}.matrix[{i}][{j}]")
              for j, v in enumerate(row)] for i, row in enumerate(rows)],
            dtype=complex,
        ) if rows else np.zeros((0, 0), dtype=complex)
        if entries.shape != (a1.n, a2.n):
            raise _fail(
                f"matrix is {entries.shape}, channels need ({a1.n}, {a2.n})",
                f"{location}.matrix",
            )
        return entries
    spec = _require_mapping(node["kernel"], f"{location}.kernel")
    if "family" not in spec:
        raise _fail("kernel needs a 'family'", f"{location}.kernel")
    params = dict(spec)
    family = params.pop("family")
    scale_hs = params.pop("scale_hs", None)
    try:
        entries = sample_coupling(family, params, a1, a2)
    except TwoChanError as exc:
        raise _fail(str(exc), f"{location}.kernel") from exc
    if scale_hs is not None:
        target = _real(scale_hs, f"{location}.kernel.scale_hs")
        hs = hilbert_schmidt_norm(CouplingBlock(entries, a1, a2))
        if hs == 0.0:
            raise _fail("cannot rescale an identically zero kernel",
                        f"{location}.kernel.scale_hs")
        entries = entries * (target / hs)
    return entries


def _parse_solver(node, location: str) -> dict:
    node = _require_mapping(node, location)
    _check_keys(node, _SOLVER_KEYS, location)
    out = {}
    if "tol" in node:
        out["tol"] = _real(node["tol"], f"{location}.tol")
        if out["tol"] <= 0:
            raise _fail("'tol' must be positive", f"{location}.tol")
    if "max_iter" in node:
        max_iter = node["max_iter"]
        if isinstance(max_iter, bool) or not isinstance(max_iter, int) or max_iter < 1:
            raise _fail(f"'max_iter' must be a positive integer, got {max_iter!r}",
                        f"{location}.max_iter")
        out["max_iter"] = max_iter
    if "delta" in node:
        out["delta"] = _real(node["delta"], f"{location}.delta")
        if out["delta"] <= 0:
            raise _fail("'delta' must be positive", f"{location}.delta")
    return out


def parse_problem(mapping) -> ParsedProblem:
    """Validate a problem mapping (as loaded from YAML)."""
    mapping = _require_mapping(mapping, "<root>")
    _check_keys(mapping, _TOP_KEYS, "<root>")
    for key in ("channel1", "channel2", "coupling"):
        if key not in mapping:
            raise _fail(f"missing required section {key!r}", "<root>")
    a1 = _parse_channel(mapping["channel1"], "channel1")
    a2 = _parse_channel(mapping["channel2"], "channel2")
    entries = _parse_coupling(mapping["coupling"], a1, a2, "coupling")
    solver = _parse_solver(mapping.get("solver", {}), "solver")
    try:
        problem = TwoChannelProblem.from_entries(a1, a2, entries)
    except TwoChanError as exc:
        raise _fail(str(exc), "coupling") from exc
    return ParsedProblem(problem=problem, solver=solver, mapping=mapping)


def load_problem(path) -> ParsedProblem:
    """Parse a problem file; syntax errors carry line/column."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        location = (f"line {mark.line + 1}, column {mark.column + 1}"
                    if mark is not None else None)
        raise ProblemFileError(exc.problem or "invalid YAML", location=location) from exc
    except yaml.YAMLError as exc:
        raise ProblemFileError(f"invalid YAML: {exc}") from exc
    return parse_problem(raw)


def _format_complex(z: complex) -> object:
    if z.imag == 0.0:
        return float(z.real)
    return f"{z.real!r}{z.imag:+}j"


def problem_to_mapping(problem: TwoChannelProblem, solver: dict | None = None) -> dict:
    """Serialize a problem to the file mapping (matrix-form coupling)."""
    out: dict = {}
    for name, op in (("channel1", problem.a1), ("channel2", problem.a2)):
        section: dict = {}
        if op.discrete_eigenvalues:
            section["discrete"] = [float(x) for x in op.discrete_eigenvalues]
        if op.continuum_bands:
            section["bands"] = [
                {"a": float(b.a), "b": float(b.b), "n": int(b.n_points)}
                for b in op.continuum_bands
            ]
        out[name] = section
    out["coupling"] = {
        "matrix": [[_format_complex(v) for v in row] for row in problem.b12.entries]
    }
    if solver:
        out["solver"] = dict(solver)
    return out


def dump_problem(problem: TwoChannelProblem, path, solver: dict | None = None) -> None:
    """Write a problem file that reparses to an equal problem."""
    mapping = problem_to_mapping(problem, solver=solver)
    Path(path).write_text(
        yaml.safe_dump(mapping, sort_keys=False, default_flow_style=None),
        encoding="utf-8",
    )
