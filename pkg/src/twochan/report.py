"""Report serialization and plot-ready table emission.

Reports are YAML trees mirroring the problem-file syntax, written
atomically; identical config and problem file give byte-identical output.
Tables are tab-separated text with a units-tagged header row and a fixed
column order.
"""

from __future__ import annotations

import os
from pathlib import Path

import yaml

from .errors import ReportError

__all__ = ["render_report", "write_report", "emit_tables"]

_TABLE_SPECS = {
    "solver_iterations": {
        "section": "solver",
        "header": ["k[1]", "step_norm[1]", "residual[energy]"],
    },
    "scattering": {
        "section": "scatter",
        "header": ["lambda[energy]", "re_s[1]", "im_s[1]", "abs_s[1]",
                   "onshell_defect[1]"],
    },
}


def render_report(mapping: dict) -> str:
    return yaml.safe_dump(mapping, sort_keys=False, default_flow_style=None,
                          width=100)


def write_report(mapping: dict, path) -> None:
    """Serialize and atomically replace the target file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(render_report(mapping), encoding="utf-8")
    os.replace(tmp, path)


def _format_row(values) -> str:
    out = []
    for v in values:
        out.append(repr(float(v)) if isinstance(v, float) else str(v))
    return "\t".join(out)


def available_tables(mapping: dict) -> list[str]:
    names = []
    if "solver" in mapping and "iteration_table" in mapping.get("solver", {}):
        names.append("solver_iterations")
    scatter = mapping.get("scatter", {})
    for key, value in scatter.items():
        if isinstance(value, dict) and "table" in value:
            names.append(f"scattering_{key}")
    return names


def emit_tables(mapping: dict, outdir, tables: list[str] | None = None) -> list[Path]:
    """Write the requested delimited tables; one file per table.

    ``tables`` defaults to everything available in the report; asking for a
    missing table raises ReportError listing what exists.
    """
    have = available_tables(mapping)
    wanted = tables if tables is not None else have
    missing = [t for t in wanted if t not in have]
    if missing:
        raise ReportError(
            f"table(s) {missing} not present in the report; available: {have}"
        )
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in wanted:
        lines = []
        if name == "solver_iterations":
            lines.append("\t".join(_TABLE_SPECS["solver_iterations"]["header"]))
            for k, step, resid in mapping["solver"]["iteration_table"]:
                lines.append(_format_row([int(k), float(step), float(resid)]))
        else:
            channel_key = name.removeprefix("scattering_")
            lines.append("\t".join(_TABLE_SPECS["scattering"]["header"]))
            for row in mapping["scatter"][channel_key]["table"]:
                lines.append(_format_row([
                    float(row["lambda"]), float(row["re_s"]), float(row["im_s"]),
                    float(row["abs_s"]), float(row["onshell_defect"]),
                ]))
        path = outdir / f"{name}.tsv"
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
        os.replace(tmp, path)
        written.append(path)
    return written
