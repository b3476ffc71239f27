"""Convergence-study report rendering (markdown tables and CSV).

Markdown tables use the compact scientific notation ``1.29(-2)`` common in
convergence tables; CSV files carry full-precision floats.  Both emissions
contain the same numbers and echo all run parameters, so a table is
self-describing.
"""

import math
import os

from .grid import Field, norm


def error_ratio(w: Field, u: Field, u_exact: Field) -> float:
    """Guess quality |w - u|_2 / |u - exact|_2 over interior nodes.

    Returns +inf when the discrete solution matches the exact samples (zero
    denominator).
    """
    gap = Field.zeros(u.grid)
    gap.interior[...] = w.interior - u.interior
    err = Field.zeros(u.grid)
    err.interior[...] = u.interior - u_exact.interior
    denom = norm(err, "rms")
    if denom == 0.0:
        return math.inf
    return norm(gap, "rms") / denom


def format_sci(x: float) -> str:
    """Compact scientific notation: 0.0129 -> '1.29(-2)', 8.0 -> '8.00(0)'."""
    if x == 0.0:
        return "0.00(0)"
    if not math.isfinite(x):
        return str(x)
    expo = math.floor(math.log10(abs(x)))
    mant = x / 10.0**expo
    # rounding the mantissa can push it to 10.00; renormalize
    if abs(round(mant, 2)) >= 10.0:
        mant /= 10.0
        expo += 1
    return f"{mant:.2f}({expo})"


def _column_orders(values):
    """Per-level convergence orders aligned with the level rows.

    ``values`` may contain None (direct levels / baseline finest); orders are
    computed between consecutive defined entries and left blank elsewhere.
    """
    orders = [None] * len(values)
    for i in range(1, len(values)):
        a, b = values[i - 1], values[i]
        if a is not None and b is not None and a > 0.0 and b > 0.0:
            orders[i] = math.log2(a / b)
    return orders


def _table_rows(report):
    """Raw table cells shared by the markdown and CSV renderers."""
    levels = report.levels
    l2_orders = _column_orders([lv.err_l2 for lv in levels])
    max_orders = _column_orders([lv.err_max for lv in levels])
    gap_orders = _column_orders([lv.guess_gap_l2 for lv in levels])
    rows = []
    for lv, o2, om, og in zip(levels, l2_orders, max_orders, gap_orders):
        rows.append({
            "mesh_n": lv.n,
            "iterations": lv.iterations,
            "err_l2": lv.err_l2,
            "order_l2": o2,
            "err_max": lv.err_max,
            "order_max": om,
            "guess_gap_l2": lv.guess_gap_l2,
            "order_gap": og,
            "error_ratio": lv.error_ratio,
            "relres": lv.relres,
        })
    return rows


def _params_line(report) -> str:
    cfg = report.config
    forcing = "literal" if cfg.literal_forcing else "standard"
    return (f"problem={cfg.problem} bc={cfg.bc_kind.value} mode={cfg.mode.value} "
            f"eps={cfg.eps:g} precond={cfg.precond.value} coarse_n={cfg.coarse_n} "
            f"levels={cfg.extra_levels} forcing={forcing} seed={cfg.seed} "
            f"direct_levels={report.direct_levels}")


_COLUMNS = ["mesh_n", "iterations", "err_l2", "order_l2", "err_max",
            "order_max", "guess_gap_l2", "order_gap", "error_ratio", "relres"]


def render_markdown(report) -> str:
    rows = _table_rows(report)

    def cell(value, fmt=format_sci):
        if value is None:
            return ""
        if isinstance(value, int):
            return str(value)
        return fmt(value)

    def order_cell(value):
        return "" if value is None else f"{value:.2f}"

    lines = [
        f"# convergence study: problem {report.config.problem}",
        "",
        f"parameters: {_params_line(report)}",
        "",
        "| Mesh | Iters | L2 error | order | Linf error | order "
        "| guess gap L2 | order | err ratio | rel res |",
        "|---|---|---|---|---|---|---|---|---|---|",
    ]
    for r in rows:
        n = r["mesh_n"]
        lines.append(
            f"| {n}x{n}x{n} | {r['iterations']} "
            f"| {cell(r['err_l2'])} | {order_cell(r['order_l2'])} "
            f"| {cell(r['err_max'])} | {order_cell(r['order_max'])} "
            f"| {cell(r['guess_gap_l2'])} | {order_cell(r['order_gap'])} "
            f"| {cell(r['error_ratio'])} | {cell(r['relres'])} |"
        )
    lines += [
        "",
        f"extrapolated solution: Linf error {format_sci(report.extrap_err_max)}, "
        f"L2 error {format_sci(report.extrap_err_l2)}",
        f"work units: {report.work_units:.2f}",
        "",
    ]
    return "\n".join(lines)


def render_csv(report) -> str:
    rows = _table_rows(report)

    def cell(value):
        if value is None:
            return ""
        if isinstance(value, int):
            return str(value)
        return repr(float(value))

    lines = [f"# {_params_line(report)}", ",".join(_COLUMNS)]
    for r in rows:
        lines.append(",".join(cell(r[c]) for c in _COLUMNS))
    lines.append(f"# extrap_err_l2={report.extrap_err_l2!r}")
    lines.append(f"# extrap_err_max={report.extrap_err_max!r}")
    lines.append(f"# work_units={report.work_units!r}")
    return "\n".join(lines) + "\n"


def report_stem(report) -> str:
    cfg = report.config
    parts = [f"excmg3d_p{cfg.problem}", cfg.bc_kind.value, cfg.mode.value]
    if cfg.literal_forcing:
        parts.append("literal")
    return "_".join(parts)


def emit_report(report, fmt: str = "both", out_dir: str = ".",
                stem: str | None = None) -> list:
    """Write the report files and return their paths.

    ``fmt`` is one of csv, markdown, both.  Serial runs produce bit-identical
    files for identical configurations.
    """
    if fmt not in ("csv", "markdown", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    if not report.levels:
        raise ValueError("report has no levels; nothing to emit")
    os.makedirs(out_dir, exist_ok=True)
    stem = stem or report_stem(report)
    paths = []
    if fmt in ("markdown", "both"):
        path = os.path.join(out_dir, stem + ".md")
        with open(path, "w") as fh:
            fh.write(render_markdown(report))
        paths.append(path)
    if fmt in ("csv", "both"):
        path = os.path.join(out_dir, stem + ".csv")
        with open(path, "w") as fh:
            fh.write(render_csv(report))
        paths.append(path)
    return paths
