"""Command-line entry point.

Subcommands: ingest raw CSVs into per-category logs, print log stats, run
a single prediction, run the full evaluation, generate synthetic data,
and launch the HTTP service. Exit codes: 0 ok, 1 usage error, 2 data
error.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click

from . import evaluation, eventlog, synth
from .errors import EmptyLog, NextactError
from .eventlog import (
    END_ACTIVITY,
    IngestReport,
    TraceQuery,
    build_logs,
    load_log_json,
    read_diagnosis_csv,
    read_procedure_csv,
    save_log_json,
    stats,
    write_diagnosis_csv,
    write_procedure_csv,
)
from .predictor import MODES, predict
from .similarity import VARIANTS, config_for_variant
from .taxonomy import load_taxonomy_auto, save_taxonomy_tsv

log = logging.getLogger(__name__)


def _parse_alpha(text: str | None) -> tuple[float, float] | None:
    if text is None:
        return None
    parts = text.split(",")
    try:
        a1, a2 = (float(p) for p in parts)
    except ValueError:
        raise click.UsageError(f"--alpha expects two comma-separated numbers, got {text!r}")
    return a1, a2


def _parse_diagnoses(text: str) -> tuple[tuple[str, int], ...]:
    out = []
    for item in text.split(","):
        code, sep, seq = item.strip().partition(":")
        if not sep or not code:
            raise click.UsageError(f"--diagnoses items must look like CODE:SEQ, got {item!r}")
        try:
            out.append((code, int(seq)))
        except ValueError:
            raise click.UsageError(f"bad seq number in {item!r}")
    return tuple(out)


def _parse_events(text: str) -> tuple[str, ...]:
    events = tuple(c.strip() for c in text.split(",") if c.strip())
    if not events:
        raise click.UsageError("--events must list at least one code")
    return events


@click.group()
@click.option("--threads", type=int, default=1, show_default=True, help="worker processes for evaluation; 0 = all cores")
@click.pass_context
def cli(ctx, threads: int):
    """Next-activity prediction toolkit."""
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    ctx.obj = {"threads": threads if threads > 0 else (os.cpu_count() or 1)}


@cli.command()
@click.option("--diagnoses", "diagnoses_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--procedures", "procedures_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--min-cases", type=int, default=500, show_default=True)
@click.option("--diag-tax", type=click.Path(exists=True, dir_okay=False), help="validate diagnosis codes against this taxonomy file")
@click.option("--proc-tax", type=click.Path(exists=True, dir_okay=False), help="validate procedure codes against this taxonomy file")
@click.option("--on-unknown", type=click.Choice(["drop", "fail"]), default="drop", show_default=True)
def ingest(diagnoses_file, procedures_file, out_dir, min_cases, diag_tax, proc_tax, on_unknown):
    """Build per-category event logs from interchange CSVs."""
    diag_records = read_diagnosis_csv(diagnoses_file)
    proc_records = read_procedure_csv(procedures_file)
    dt = load_taxonomy_auto(diag_tax) if diag_tax else None
    pt = load_taxonomy_auto(proc_tax) if proc_tax else None
    report = IngestReport()
    logs = build_logs(
        proc_records,
        diag_records,
        min_cases=min_cases,
        diag_tax=dt,
        proc_tax=pt,
        diagnosis_taxonomy=dt.id if dt else "icd10cm",
        procedure_taxonomy=pt.id if pt else "icd10pcs",
        on_unknown=on_unknown,
        report=report,
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for category, lg in logs.items():
        path = out / f"log_{category}.json"
        save_log_json(lg, path)
        click.echo(f"{category}: kept {len(lg.cases)} cases -> {path}")
    for category, count in sorted(report.small_groups.items()):
        click.echo(f"{category}: dropped (only {count} cases, min is {min_cases})")
    click.echo(
        f"cases total {report.total_cases}, no procedures {report.dropped_no_procedures}, "
        f"no primary diagnosis {report.dropped_no_primary}, "
        f"unknown-code records {report.dropped_unknown_code}, "
        f"diagnoses beyond seq 10 {report.diagnoses_truncated}"
    )
    if not logs:
        click.echo("warning: no category reached the case threshold", err=True)


def _load_bundle(log_file, tax_cm, tax_pcs):
    lg = load_log_json(log_file)
    diag_tax = load_taxonomy_auto(tax_cm, tax_id=lg.diagnosis_taxonomy)
    proc_tax = load_taxonomy_auto(tax_pcs, tax_id=lg.procedure_taxonomy)
    return lg, diag_tax, proc_tax


@cli.command("predict")
@click.option("--log", "log_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--tax-cm", required=True, type=click.Path(exists=True, dir_okay=False), help="diagnosis taxonomy file")
@click.option("--tax-pcs", required=True, type=click.Path(exists=True, dir_okay=False), help="procedure taxonomy file")
@click.option("--diagnoses", required=True, help='diagnosis list as "CODE:SEQ,CODE:SEQ,..."')
@click.option("--events", required=True, help="comma-separated activity codes seen so far")
@click.option("-n", "top_n", type=int, default=5, show_default=True)
@click.option("--variant", type=click.Choice(list(VARIANTS)), default="T", show_default=True)
@click.option("--mode", type=click.Choice(list(MODES)), default="score_sum", show_default=True)
@click.option("--alpha", default=None, help='static mixing weights "A1,A2" (defaults to length-based)')
@click.option("--explain", type=int, default=3, show_default=True, help="supporters shown per candidate")
@click.option("--json", "as_json", is_flag=True, help="print the full JSON result instead of a table")
def predict_cmd(log_file, tax_cm, tax_pcs, diagnoses, events, top_n, variant, mode, alpha, explain, as_json):
    """Predict the next activities for a running case."""
    lg, diag_tax, proc_tax = _load_bundle(log_file, tax_cm, tax_pcs)
    alpha_pair = _parse_alpha(alpha)
    config = config_for_variant(
        variant, alpha_mode="static" if alpha_pair else "dynamic", alpha=alpha_pair
    )
    query = TraceQuery(_parse_diagnoses(diagnoses), _parse_events(events))
    for code, _ in query.diagnoses:
        if code not in diag_tax:
            raise NextactError(f"unknown diagnosis code {code!r}")
    for code in query.events:
        if code not in proc_tax:
            raise NextactError(f"unknown procedure code {code!r}")
    result = predict(query, lg, diag_tax, proc_tax, n=top_n, config=config, mode=mode)
    if as_json:
        click.echo(result.to_json(explain_top=explain))
        return
    if not result.candidates:
        click.echo("no comparable historical cases")
        return
    click.echo(f"{'rank':<5}{'code':<10}{'score':<12}{'supporters':<11}description")
    for rank, cand in enumerate(result.candidates, start=1):
        desc = "end of treatment" if cand.activity == END_ACTIVITY else (proc_tax.description(cand.activity) or "")
        click.echo(f"{rank:<5}{cand.activity:<10}{cand.score:<12.4f}{len(cand.supporters):<11}{desc}")
        for s in cand.supporters[:explain]:
            bd = s.breakdown
            click.echo(
                f"     via {s.case_id}: sim_trace={bd.sim_trace:.4f} "
                f"(list={bd.sim_list:.4f}, cf={bd.sim_cf:.4f}, alpha={bd.alpha[0]:.3f}/{bd.alpha[1]:.3f})"
            )


@cli.command()
@click.option("--log", "log_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--tax-cm", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--tax-pcs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-n", "top_n", type=int, default=5, show_default=True)
@click.option("--mode", type=click.Choice(list(MODES)), default="score_sum", show_default=True)
@click.option("--variant-only", type=click.Choice(list(VARIANTS)), default=None, help="evaluate a single variant; skips the paired test")
@click.option("--alpha", default=None, help='static mixing weights "A1,A2"')
@click.option("--sample", type=int, default=None, help="evaluate a random subset of this many cases")
@click.option("--seed", type=int, default=0, show_default=True, help="seed for --sample selection")
@click.option("--t-test", "t_test", type=click.Choice(["paired", "welch"]), default="paired", show_default=True, help="significance test for the variant comparison")
@click.option("--out", "out_file", required=True, type=click.Path(dir_okay=False))
@click.pass_context
def evaluate(ctx, log_file, tax_cm, tax_pcs, top_n, mode, variant_only, alpha, sample, seed, t_test, out_file):
    """Leave-one-out evaluation; writes CSV, per-prefix CSV and JSON."""
    lg, diag_tax, proc_tax = _load_bundle(log_file, tax_cm, tax_pcs)
    if len(lg.cases) < 2:
        raise EmptyLog(f"log {lg.id!r} has {len(lg.cases)} case(s); need at least 2 for leave-one-out")
    alpha_pair = _parse_alpha(alpha)
    report = evaluation.evaluate_log(
        lg,
        diag_tax,
        proc_tax,
        n=top_n,
        mode=mode,
        variants=(variant_only,) if variant_only else ("T", "B"),
        alpha_mode="static" if alpha_pair else "dynamic",
        alpha=alpha_pair,
        workers=ctx.obj["threads"],
        sample=sample,
        seed=seed,
        test=t_test,
    )
    out = Path(out_file)
    out.parent.mkdir(parents=True, exist_ok=True)
    prefix_path = out.with_name(out.stem + "_prefix.csv")
    json_path = out.with_suffix(".json")
    evaluation.write_report_csv([report], out)
    evaluation.write_prefix_csv([report], prefix_path)
    evaluation.write_report_json([report], json_path)
    click.echo(f"wrote {out}, {prefix_path}, {json_path}")
    avg_t = report.avg_sim.get("T")
    avg_b = report.avg_sim.get("B")
    click.echo(
        "avg_sim_T="
        + (f"{avg_t:.6f}" if avg_t is not None else "-")
        + " avg_sim_B="
        + (f"{avg_b:.6f}" if avg_b is not None else "-")
        + " p_value="
        + (f"{report.p_value:.6g}" if report.p_value is not None else "-")
    )


@cli.command("stats")
@click.option("--log", "log_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def stats_cmd(log_file, as_json):
    """Print descriptive statistics of a log."""
    lg = load_log_json(log_file)
    s = stats(lg)
    if as_json:
        click.echo(json.dumps({"id": lg.id, **s.to_dict()}, sort_keys=True))
        return
    click.echo(f"log {lg.id}")
    for key, value in s.to_dict().items():
        click.echo(f"  {key}: {value}")


@cli.command("synth")
@click.option("--seed", type=int, required=True)
@click.option("--cases", type=int, default=200, show_default=True)
@click.option("--profile", type=click.Choice(list(synth.PROFILES)), default="clustered", show_default=True)
@click.option("--templates", type=int, default=8, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def synth_cmd(seed, cases, profile, templates, out_dir):
    """Generate a synthetic log plus matching taxonomy and CSV files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    procs, diags, diag_tax, proc_tax = synth.synthetic_records(seed, cases, profile, templates)
    logs = build_logs(
        procs,
        diags,
        min_cases=1,
        diagnosis_taxonomy=diag_tax.id,
        procedure_taxonomy=proc_tax.id,
        diag_tax=diag_tax,
        proc_tax=proc_tax,
        on_unknown="fail",
    )
    save_taxonomy_tsv(diag_tax, out / "diagnosis_taxonomy.tsv")
    save_taxonomy_tsv(proc_tax, out / "procedure_taxonomy.tsv")
    write_diagnosis_csv(diags, out / "diagnoses.csv")
    write_procedure_csv(procs, out / "procedures.csv")
    for category, lg in logs.items():
        path = out / f"log_{category}.json"
        save_log_json(lg, path)
        click.echo(f"{category}: {len(lg.cases)} cases -> {path}")
    click.echo(f"taxonomies and CSVs in {out}")


@cli.command()
@click.option("--config", "config_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(config_file, host, port):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app_from_config

    app = create_app_from_config(config_file)
    uvicorn.run(app, host=host, port=port, log_level="info")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except NextactError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
