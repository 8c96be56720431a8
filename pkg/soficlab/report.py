"""
Experiment orchestration and report emission.

Each subcommand runner turns a validated config into a Report: a JSON-ready
body plus flat rows for CSV output. Exact quantities are "p/q" strings and
every sampled quantity is flagged as an estimate.
"""

import json
import logging
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from soficlab import __version__
from soficlab.ball_group import check_relator_freeness
from soficlab.bass_serre import (
    fundamental_presentation,
    hnn_amalgam_decomposition,
    hypotheses_recorded,
    integer_line_chain,
    render_presentation,
    spanning_tree,
)
from soficlab.config import (
    ExperimentConfig,
    GraphOfGroupsConfig,
    NormalFormConfig,
    VerifyConfig,
    build_actions,
    build_context,
    build_graph_of_groups,
)
from soficlab.core_groups import similarity_defect
from soficlab.graph_products import k_normal_form, rewrite_concat_counting
from soficlab.quasi_actions import render_key, sorted_keys, verify_special
from soficlab.sofic_builder import build_construction, measure_conditions
from soficlab.utils import format_rational, resolve_budget

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["kind", "g1", "g2", "name", "value", "passed"]


@dataclass
class Report:
    """Outcome of one subcommand run."""

    subcommand: str
    passed: bool
    body: Dict[str, Any]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    seed: Optional[int] = None
    seconds: float = 0.0
    table: Optional[pd.DataFrame] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "passed": self.passed,
            "seed": self.seed,
            "versions": versions(),
            "seconds": round(self.seconds, 4),
            **self.body,
        }


def versions() -> Dict[str, str]:
    return {
        "soficlab": __version__,
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "python": platform.python_version(),
    }


def _cell(key: Any) -> str:
    return json.dumps(render_key(key), separators=(",", ":"))


def _defect_row(g1: Any, g2: Any, value) -> Dict[str, Any]:
    return {"kind": "defect", "g1": _cell(g1), "g2": _cell(g2), "name": "", "value": format_rational(value), "passed": ""}


def _verdict_row(name: str, passed: bool, value: Any = "") -> Dict[str, Any]:
    return {"kind": "verdict", "g1": "", "g2": "", "name": name, "value": value, "passed": bool(passed)}


def run_verify(config: VerifyConfig) -> Report:
    """Check one quasi-action table against the special (F, ε) conditions."""
    start = time.perf_counter()
    group = config.group.build(resolve_budget()["table_cells"])
    table, F = config.action.build(group)
    if config.F is not None:
        F = config.F
    report = verify_special(table, F, config.epsilon, group)

    rows = []
    keys = sorted_keys(set(F))
    for g1 in keys:
        for g2 in keys:
            composed = table[g1].then(table[g2])
            rows.append(_defect_row(g1, g2, similarity_defect(table[group.multiply(g1, g2)], composed)))
    if rows:
        rows += [
            _verdict_row("cond_a", report.cond_a),
            _verdict_row("cond_b", report.cond_b),
            _verdict_row("cond_c", not report.cond_c),
            _verdict_row("cond_d", report.cond_d_max_defect <= report.epsilon, format_rational(report.cond_d_max_defect)),
        ]
    body = {"carrier": table.carrier_size, "F_size": len(keys), **report.to_dict()}
    return Report("verify", report.passed, body, rows, config.seed, time.perf_counter() - start)


def _build_and_measure(config: ExperimentConfig, seed: int, threads: int):
    budget = resolve_budget(config.budget.overrides())
    context, actions = build_actions(config)
    out = build_construction(
        context,
        actions,
        config.N,
        mode=config.mode,
        radius=config.radius_override,
        budget=budget,
        seed=seed,
        workers=threads,
    )
    return out, measure_conditions(out)


def run_build(config: ExperimentConfig, seed: Optional[int] = None, threads: Optional[int] = None) -> Report:
    """Build the graph-product quasi-action and measure every condition."""
    seed = config.seed if seed is None else seed
    threads = config.threads if threads is None else threads
    start = time.perf_counter()
    out, measurement = _build_and_measure(config, seed, threads)

    rows = [_defect_row(g1, g2, value) for (g1, g2), value in measurement.pair_defects.items()]
    if rows:
        conditions = measurement.conditions
        rows += [
            _verdict_row("cond_a", conditions.cond_a),
            _verdict_row("cond_b", conditions.cond_b),
            _verdict_row("cond_c", not conditions.cond_c),
            _verdict_row("cond_d", measurement.bound_holds, format_rational(conditions.cond_d_max_defect)),
            _verdict_row("coordinate_bounds", measurement.coordinate_bounds_hold),
            _verdict_row("condition1", measurement.condition1_holds),
            _verdict_row("condition2", measurement.condition2_holds),
        ]
    body = {
        "N": out.N,
        "radius": out.radius,
        "mode": out.mode,
        "n": out.n,
        "threads": threads,
        "input": [r.to_dict() for r in out.input_reports],
        "fixed_point_free": sum(1 for g in out.F if not g.is_identity()) - len(measurement.conditions.cond_c),
        **measurement.to_dict(),
    }
    return Report("build", measurement.passed, body, rows, seed, time.perf_counter() - start)


def run_bench(config: ExperimentConfig, repeat: int = 3, seed: Optional[int] = None,
              threads: Optional[int] = None) -> Report:
    """Time `repeat` build-and-measure runs and summarize them with pandas."""
    seed = config.seed if seed is None else seed
    threads = config.threads if threads is None else threads
    timings = []
    passed = True
    for i in range(repeat):
        start = time.perf_counter()
        _, measurement = _build_and_measure(config, seed, threads)
        timings.append({"run": i, "seconds": time.perf_counter() - start, "F_size": measurement.F_size})
        passed = passed and measurement.passed
        logger.info("bench run %d/%d: %.3fs", i + 1, repeat, timings[-1]["seconds"])
    frame = pd.DataFrame(timings)
    summary = frame["seconds"].describe()
    body = {"repeat": repeat, "timings": {k: round(float(v), 6) for k, v in summary.items()}}
    return Report("bench", passed, body, seed=seed, seconds=float(frame["seconds"].sum()), table=summary.to_frame())


def run_nf(config: NormalFormConfig) -> Report:
    """Normalize g1 and g2, split them relative to k and multiply with merger counts. A missing g2 is the identity."""
    context = build_context(config.graph, config.vertex_groups)
    g1 = context.element(config.g1)
    g2 = context.element(config.g2)
    form1 = k_normal_form(g1, config.k)
    form2 = k_normal_form(g2, config.k)
    product, h_count, g_count = rewrite_concat_counting(form1, form2)

    def describe(g, form):
        return {
            "canonical": render_key(g),
            "text": str(g),
            "syllable_length": g.syllable_length,
            "support": sorted(g.support),
            "k_normal_form": [{"x": render_key(x), "y": y} for x, y in form.blocks],
        }

    violations = form1.violations() + form2.violations() + product.violations()
    passed = not violations and h_count <= context.n and g_count <= 1
    body = {
        "k": config.k,
        "g1": describe(g1, form1),
        "g2": describe(g2, form2),
        "product": describe(g1 * g2, product),
        "h_reducing": h_count,
        "g_reducing": g_count,
        "violations": violations,
    }
    rows = [
        _verdict_row("h_reducing", h_count <= context.n, h_count),
        _verdict_row("g_reducing", g_count <= 1, g_count),
        _verdict_row("normal_forms", not violations),
    ]
    return Report("nf", passed, body, rows)


def run_ballgroup(gens: int, radius: int, seed: int = 0, exhaustive: Optional[bool] = None,
                  samples: Optional[int] = None) -> Report:
    start = time.perf_counter()
    budget = resolve_budget()
    result = check_relator_freeness(
        gens,
        radius,
        seed,
        exhaustive=exhaustive,
        samples=samples if samples is not None else budget["samples"],
        carrier_budget=budget["carrier"],
    )
    body = {**result, "estimate": result["mode"] == "sampled"}
    rows = [_verdict_row("relator_free", result["passed"], result["words_checked"])]
    return Report("ballgroup", result["passed"], body, rows, seed, time.perf_counter() - start)


def run_gog(config: GraphOfGroupsConfig) -> Report:
    """Fundamental-group presentation and decomposition of a graph of groups."""
    body: Dict[str, Any] = {}
    if config.vertices:
        gog = build_graph_of_groups(config)
        T = spanning_tree(gog) if config.tree is None else config.tree
        presentation = fundamental_presentation(gog, T)
        body.update({
            "tree": list(T),
            "edge_status": [edge.status for edge in gog.edges],
            "generators": list(presentation.generators),
            "relators": [r.render() for r in presentation.relators],
            "presentation": render_presentation(presentation),
            "decomposition": hnn_amalgam_decomposition(gog, T).to_dict(),
            "amenable_edge_groups": hypotheses_recorded(gog),
        })
    if config.chain is not None:
        chain = config.chain
        body["chain"] = integer_line_chain(chain.H, chain.K, chain.lo, chain.hi, chain.L).to_dict()
    rows = [_verdict_row("edge_maps", True, ",".join(body.get("edge_status", [])))]
    return Report("gog", True, body, rows)


def run(config: Union[ExperimentConfig, VerifyConfig, NormalFormConfig, GraphOfGroupsConfig], **kwargs) -> Report:
    """Dispatch a validated config to its runner. Keyword arguments go to run_build."""
    if isinstance(config, ExperimentConfig):
        return run_build(config, **kwargs)
    if isinstance(config, VerifyConfig):
        return run_verify(config)
    if isinstance(config, NormalFormConfig):
        return run_nf(config)
    if isinstance(config, GraphOfGroupsConfig):
        return run_gog(config)
    raise TypeError(f"no runner for {type(config).__name__}")


def emit_json(report: Report, path: Optional[Union[str, Path]] = None) -> str:
    text = json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
    return text


def emit_csv(report: Report, path: Union[str, Path]) -> Path:
    """
    Write the report rows with a fixed column order.

    A report without rows still gets the header line. Bench reports write
    their timing summary instead.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if report.table is not None:
        report.table.to_csv(path, index_label="statistic", lineterminator="\n")
    else:
        frame = pd.DataFrame(report.rows, columns=CSV_COLUMNS)
        frame.to_csv(path, index=False, lineterminator="\n")
    logger.info("wrote %d rows to %s", len(report.rows), path)
    return path
