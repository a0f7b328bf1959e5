"""Command-line entry point: spectra, flow checks, exact-diagonalization checks and sweeps.

Exit codes: 0 success, 1 computation error, 2 invalid request, 3 majorization
violation found.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

from pydantic import ValidationError

from majolab import cft, chains, ed
from majolab.config import LabSettings, RunConfig, load_settings
from majolab.errors import ComputationError, HypothesisViolated, InputError, MajolabError
from majolab.majorization import FlowDirection, FlowReport, flow_report
from majolab.schemas import CFTFlowParams, QFlow, ScalingSpectrum, load_spectrum_document, make_chain, make_spin_chain
from verification import export
from verification.issues import IssueType, VerificationIssue, issues_from_report, write_issues
from verification.sweeps import SUITES, run_sweeps

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_COMPUTATION = 1
EXIT_INPUT = 2
EXIT_VIOLATION = 3

SEED_ENV = "MAJOLAB_SEED"


def _float_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_range(text: str) -> list[int]:
    """``1..6`` (inclusive) or ``2,4,6``."""

    try:
        if ".." in text:
            start, stop = text.split("..", 1)
            return list(range(int(start), int(stop) + 1))
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a range a..b or comma-separated integers, got {text!r}") from exc


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=Path, default=None, help="JSON request file mirroring the flags")
    parser.add_argument("--settings", type=Path, default=None, help="YAML settings file (default config/majolab.yaml)")
    parser.add_argument("--seed", type=int, default=None, help=f"Random seed; {SEED_ENV} overrides it")
    parser.add_argument("--format", choices=["json", "csv"], default=None)
    parser.add_argument("--output", type=Path, default=None, help="Write the main output here instead of stdout")
    parser.add_argument(
        "--table",
        type=Path,
        default=None,
        help="Also write the CSV table here; JSON flow reports written with --output default to <output>.csv",
    )
    parser.add_argument("--tol", type=float, default=None, help="Cumulant comparison tolerance")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def _model_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--model", choices=["xx", "heisenberg", "xy", "cft"], default=None)
    parser.add_argument("--L", dest="L", type=float, default=None)
    parser.add_argument("--delta", type=float, default=None)
    parser.add_argument("--lambda", dest="lam", type=float, default=None)
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--spec", type=Path, default=None, help="Scaling spectrum JSON document")
    parser.add_argument("--kappa", type=float, default=None)
    parser.add_argument("--uv-cutoff", dest="uv_cutoff", type=float, default=None)
    parser.add_argument("--modes", type=int, default=None, help="Free-fermion modes kept (default from settings)")
    parser.add_argument("--tail-tol", dest="tail_tol", type=float, default=None)
    return parser


def _add_parameter_grids(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--delta-grid", dest="delta_grid", type=_float_list, default=None)
    parser.add_argument("--lambda-grid", dest="lambda_grid", type=_float_list, default=None)
    parser.add_argument("--gamma-grid", dest="gamma_grid", type=_float_list, default=None)


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)
    common, model = _common_parser(), _model_parser()

    commands.add_parser("spectrum", parents=[common, model], help="Eigenvalues of one model")

    flow = commands.add_parser("flow", parents=[common, model], help="Majorization along a parameter grid")
    flow.add_argument("--L-grid", dest="L_grid", type=_float_list, default=None)
    _add_parameter_grids(flow)
    flow.add_argument("--q-of-g", dest="q_of_g", type=Path, default=None, help="CSV with columns g,q")
    flow.add_argument("--direction", choices=["ascending", "descending"], default=None)
    flow.add_argument("--workers", type=int, default=None, help="Evaluate grid points concurrently")
    flow.add_argument("--spectra", type=Path, default=None, help="Long-form spectra CSV")

    ed_parser = commands.add_parser("ed", parents=[common, model], help="Exact-diagonalization checks")
    ed_parser.add_argument("--N", dest="N", type=int, default=None)
    ed_parser.add_argument("--block", type=int, default=None, help="Boundary block length (default N // 2)")
    ed_parser.add_argument("--block-flow", dest="block_flow", type=_int_range, default=None)
    _add_parameter_grids(ed_parser)
    ed_parser.add_argument("--direction", choices=["ascending", "descending"], default=None)
    ed_parser.add_argument("--compare-formula", dest="compare_formula", action="store_true", default=None)
    ed_parser.add_argument("--cache-dir", dest="cache_dir", type=Path, default=None)
    ed_parser.add_argument("--spectra", type=Path, default=None, help="Long-form spectra CSV")

    sweep = commands.add_parser("sweep", parents=[common], help="Seeded randomized theorem sweeps")
    sweep.add_argument("--suite", choices=[*SUITES, "all"], default=None)
    sweep.add_argument("--draws", type=int, default=None)

    return parser.parse_args(argv)


_PROCESS_FLAGS = {"config", "settings", "log_level", "workers"}


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge the JSON request file with the flags; flags win."""

    payload: dict[str, Any] = {}
    if args.config is not None:
        try:
            loaded = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read request file {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise InputError(f"request file {args.config} must hold a JSON object")
        payload.update(loaded)
        if "lambda" in payload:
            payload["lam"] = payload.pop("lambda")
    for key, value in vars(args).items():
        if key not in _PROCESS_FLAGS and value is not None:
            payload[key] = value
    try:
        return RunConfig.model_validate(payload)
    except ValidationError as exc:
        messages = "; ".join(error["msg"] for error in exc.errors(include_url=False))
        raise InputError(f"invalid request: {messages}") from exc


@dataclass(slots=True)
class Runtime:
    settings: LabSettings
    seed: int
    workers: int | None = None


def resolve_seed(config: RunConfig, settings: LabSettings) -> int:
    raw = os.environ.get(SEED_ENV)
    if raw:
        try:
            return int(raw)
        except ValueError as exc:
            raise InputError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc
    return config.seed if config.seed is not None else settings.defaults.seed


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _emit_issues(config: RunConfig, issues: list[VerificationIssue]) -> None:
    if config.output is None:
        for issue in issues:
            logger.warning("%s: %s", issue.issue_type.value, issue.details)
        return
    config.output.parent.mkdir(parents=True, exist_ok=True)
    write_issues(config.output.parent / "issues.jsonl", issues)


def _direction(config: RunConfig) -> FlowDirection | None:
    if config.direction is None:
        return None
    return FlowDirection(f"{config.direction}_majorizes")


def _tol(config: RunConfig, runtime: Runtime) -> float:
    return config.tol if config.tol is not None else runtime.settings.tolerances.majorization


def _tail_tol(config: RunConfig, runtime: Runtime) -> float:
    return config.tail_tol if config.tail_tol is not None else runtime.settings.tolerances.tail


def _modes(config: RunConfig, runtime: Runtime) -> int:
    return config.modes if config.modes is not None else runtime.settings.truncation.modes


def _chain_model(config: RunConfig) -> chains.Chain:
    if config.model == "xx":
        if config.L is None:
            raise InputError("the xx model needs --L")
        return make_chain("xx", L=config.L)
    if config.model == "heisenberg":
        if config.delta is None:
            raise InputError("the heisenberg model needs --delta")
        return make_chain("heisenberg", delta=config.delta)
    if config.lam is None or config.gamma is None:
        raise InputError("the xy model needs --lambda and --gamma")
    return make_chain("xy", lam=config.lam, gamma=config.gamma)


def _cft_inputs(config: RunConfig, runtime: Runtime) -> tuple[ScalingSpectrum, CFTFlowParams]:
    try:
        document = json.loads(config.spec.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read scaling spectrum {config.spec}: {exc}") from exc
    if not isinstance(document, dict):
        raise InputError(f"scaling spectrum {config.spec} must hold a JSON object")
    document.setdefault("kappa", runtime.settings.defaults.kappa)
    document.setdefault("uv_cutoff", runtime.settings.defaults.uv_cutoff)
    spec, params = load_spectrum_document(document)
    overrides = {k: v for k, v in (("kappa", config.kappa), ("uv_cutoff", config.uv_cutoff)) if v is not None}
    return spec, params.model_copy(update=overrides) if overrides else params


def read_qflow(path: Path) -> QFlow:
    """Samples from a CSV with header ``g,q``."""

    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            rows = list(csv.DictReader(handle))
    except OSError as exc:
        raise InputError(f"cannot read q-flow file {path}: {exc}") from exc
    try:
        samples = tuple((float(row["g"]), float(row["q"])) for row in rows)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: every row needs numeric 'g' and 'q' columns") from exc
    try:
        return QFlow(samples=samples)
    except ValidationError as exc:
        raise InputError(f"{path}: {exc.errors(include_url=False)[0]['msg']}") from exc


def cmd_spectrum(config: RunConfig, runtime: Runtime) -> int:
    if config.model == "cft":
        spec, params = _cft_inputs(config, runtime)
        if config.L is None:
            raise InputError("the cft model needs --L")
        q = cft.q_of_L(config.L, params)
        distribution = cft.eigenvalues(spec, q, _tail_tol(config, runtime))
        descriptor = {
            "kind": "cft",
            "exponents": list(spec.exponents),
            "degeneracies": list(spec.degeneracies),
            "kappa": params.kappa,
            "uv_cutoff": params.uv_cutoff,
            "L": config.L,
            "q": q,
        }
        document = export.spectrum_document(descriptor, distribution)
    else:
        model = _chain_model(config)
        modes = _modes(config, runtime)
        if isinstance(model, chains.XXChain):
            modes = min(modes, model.L)
        spectrum = chains.dispersion(model, modes)
        distribution = chains.assemble(spectrum, modes, max_modes=runtime.settings.truncation.max_assembled_modes)
        document = export.spectrum_document(
            chains.describe(model),
            distribution,
            modes=modes,
            tail_bound=chains.tail_weight_bound(spectrum, modes),
            critical=spectrum.critical,
        )
    if config.format == "csv":
        _emit(export.distribution_csv(distribution), config.output)
    else:
        _emit(export.dumps(document), config.output)
    if config.table is not None:
        _emit(export.distribution_csv(distribution), config.table)
    return EXIT_OK


def _chain_family(config: RunConfig) -> tuple[chains.ChainFamily, list[float]]:
    name, values = config.grid()
    allowed = {"xx": ("L",), "heisenberg": ("delta",), "xy": ("lambda", "gamma")}[config.model]
    if name not in allowed:
        raise InputError(f"the {config.model} model flows in {allowed}, not {name!r}")
    fixed: dict[str, float] = {}
    if config.model == "xy":
        other, value = ("gamma", config.gamma) if name == "lambda" else ("lambda", config.lam)
        if value is None:
            raise InputError(f"an xy {name}-flow needs --{other}")
        fixed[other] = value
    return chains.ChainFamily.of(config.model, name, **fixed), values


def _flow_table_path(config: RunConfig) -> Path | None:
    """``--table`` if given, else ``<output>.csv`` beside a JSON report written to a file."""

    if config.table is not None:
        return config.table
    if config.output is not None and config.format != "csv":
        candidate = config.output.with_suffix(".csv")
        return None if candidate == config.output else candidate
    return None


def _report_flow(config: RunConfig, report: FlowReport, issues_context: dict[str, Any], **extra: Any) -> int:
    issues = issues_from_report(report, issues_context)
    if config.format == "csv":
        _emit(export.flow_csv(report), config.output)
    else:
        _emit(export.dumps(export.flow_document(report, **extra)), config.output)
    table = _flow_table_path(config)
    if table is not None:
        _emit(export.flow_csv(report), table)
    if config.spectra is not None:
        _emit(export.spectra_csv(zip(report.points, report.distributions)), config.spectra)
    if issues:
        _emit_issues(config, issues)
    return EXIT_OK if report.fine_grained else EXIT_VIOLATION


def cmd_flow(config: RunConfig, runtime: Runtime) -> int:
    tol = _tol(config, runtime)
    entropy_tol = runtime.settings.tolerances.entropy
    if config.model == "cft":
        spec, params = _cft_inputs(config, runtime)
        tail_tol = _tail_tol(config, runtime)
        if config.q_of_g is not None:
            qflow = read_qflow(config.q_of_g)
            try:
                report = cft.check_parameter_flow(spec, qflow, tol=tol, tail_tol=tail_tol)
            except HypothesisViolated as exc:
                issue = VerificationIssue(IssueType.HYPOTHESIS_VIOLATED, str(exc), {"q_of_g": str(config.q_of_g)})
                _emit_issues(config, [issue])
                raise
            return _report_flow(config, report, {"model": "cft", "flow": "parameter"})
        if config.L_grid is None:
            raise InputError("a cft flow needs --L-grid or --q-of-g")
        report = cft.check_L_flow(spec, params, config.L_grid, tail_tol=tail_tol, tol=tol)
        return _report_flow(config, report, {"model": "cft", "flow": "L"}, kappa=params.kappa, uv_cutoff=params.uv_cutoff)

    family, values = _chain_family(config)
    direction = _direction(config) or chains.expected_direction(family, values[0])
    points = chains.flow(
        family,
        values,
        _modes(config, runtime),
        workers=runtime.workers,
        max_modes=runtime.settings.truncation.max_assembled_modes,
    )
    report = flow_report(points, direction, tol=tol, entropy_tol=entropy_tol)
    ordered = sorted(points, key=lambda point: point.param)
    return _report_flow(
        config,
        report,
        {"model": config.model, "parameter": family.parameter},
        model=config.model,
        parameter=family.parameter,
        fixed=dict(family.fixed),
        modes=[point.modes for point in ordered],
        tail_bounds=[point.tail_bound for point in ordered],
        critical=[point.critical for point in ordered],
        mode_alignment=chains.mode_alignment(points, direction),
    )


def cmd_ed(config: RunConfig, runtime: Runtime) -> int:
    settings = runtime.settings.ed
    cache = ed.GroundStateCache(config.cache_dir) if config.cache_dir is not None else None
    tol = config.tol if config.tol is not None else runtime.settings.tolerances.ed_majorization
    params = {"delta": config.delta, "lambda": config.lam, "gamma": config.gamma}
    grid = config.grid()

    if config.block_flow is not None:
        chain = make_spin_chain(config.model, config.N, **{k: v for k, v in params.items() if v is not None})
        flow = ed.BlockFlow(chain=chain, blocks=tuple(config.block_flow))
        report = ed.ed_flow_check(flow, tol, _direction(config), settings=settings, seed=runtime.seed, cache=cache)
        return _report_flow(config, report, {"model": config.model, "N": config.N, "flow": "block"}, N=config.N)

    block = config.block if config.block is not None else config.N // 2
    if grid is not None:
        name, values = grid
        fixed = tuple((k, v) for k, v in params.items() if v is not None and k != name)
        flow = ed.ParameterFlow(
            model=config.model, N=config.N, parameter=name, grid=tuple(values), block=block, fixed=fixed
        )
        report = ed.ed_flow_check(flow, tol, _direction(config), settings=settings, seed=runtime.seed, cache=cache)
        return _report_flow(config, report, {"model": config.model, "N": config.N, "flow": name}, N=config.N, block=block)

    chain = make_spin_chain(config.model, config.N, **{k: v for k, v in params.items() if v is not None})
    result = cache.get_or_solve(chain, settings=settings, seed=runtime.seed) if cache else ed.solve(
        chain, settings=settings, seed=runtime.seed
    )
    descriptor = {
        **chain.model_dump(mode="json", by_alias=True),
        "block": block,
        "energy": result.energy,
        "degenerate": result.degenerate_flag,
    }
    if config.compare_formula:
        comparison = ed.compare_with_formula(chain, block, _modes(config, runtime), result=result)
        table = export.comparison_csv(comparison.rows())
        if config.format == "csv":
            _emit(table, config.output)
        else:
            document = {
                "chain": descriptor,
                "ed": comparison.ed.as_list(),
                "formula": comparison.formula.as_list(),
                "modes": comparison.modes,
                "tail_bound": comparison.tail_bound,
                "largest_discrepancy": comparison.largest_discrepancy,
            }
            _emit(export.dumps(document), config.output)
        if config.table is not None:
            _emit(table, config.table)
        return EXIT_OK

    distribution = ed.reduced_spectrum(result.state, chain.N, block)
    if config.format == "csv":
        _emit(export.distribution_csv(distribution), config.output)
    else:
        _emit(export.dumps(export.spectrum_document(descriptor, distribution)), config.output)
    return EXIT_OK


def cmd_sweep(config: RunConfig, runtime: Runtime) -> int:
    summaries = run_sweeps(config.suite, config.draws, runtime.seed, runtime.settings.tolerances)
    payload = {"seed": runtime.seed, "suites": [summary.to_dict() for summary in summaries]}
    _emit(export.dumps(payload), config.output)
    issues = [issue for summary in summaries for issue in summary.issues]
    if issues:
        _emit_issues(config, issues)
    return EXIT_OK if all(summary.passed for summary in summaries) else EXIT_VIOLATION


COMMANDS: dict[str, Callable[[RunConfig, Runtime], int]] = {
    "spectrum": cmd_spectrum,
    "flow": cmd_flow,
    "ed": cmd_ed,
    "sweep": cmd_sweep,
}


def _record_failure(args: argparse.Namespace, issue_type: IssueType, exc: Exception) -> None:
    output = getattr(args, "output", None)
    if output is None:
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    write_issues(output.parent / "issues.jsonl", [VerificationIssue(issue_type, str(exc), {"command": args.command})])


def main(argv: Sequence[str] | None = None) -> None:
    args = parse_args(argv)
    logging.basicConfig(level=args.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = load_settings(args.settings)
        config = build_config(args)
        runtime = Runtime(settings=settings, seed=resolve_seed(config, settings), workers=getattr(args, "workers", None))
        code = COMMANDS[config.command](config, runtime)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if not isinstance(exc, HypothesisViolated):
            _record_failure(args, IssueType.CONFIG_ERROR, exc)
        raise SystemExit(EXIT_INPUT) from exc
    except (ComputationError, MajolabError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        _record_failure(args, IssueType.COMPUTATION_ERROR, exc)
        raise SystemExit(EXIT_COMPUTATION) from exc
    except Exception as exc:  # pragma: no cover - surfaced as an internal error
        logger.exception("internal error")
        raise SystemExit(EXIT_COMPUTATION) from exc
    if code != EXIT_OK:
        print("majorization violation found", file=sys.stderr)
        raise SystemExit(code)


if __name__ == "__main__":
    main()
