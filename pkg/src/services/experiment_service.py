"""
Experiment orchestration: dispatch a validated config to the services, write
the result record and any per-trial streams.
"""
import logging
import time
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import pytz

from core import __version__
from core.config import settings
from core.exceptions import ConfigError
from models.kernel import CRITICAL_PROBABILITIES, CrossingKernel, WalkComponent
from models.map_model import MapKind, MapModel
from models.walk import CrossingCase, StoppedOutcome
from schemas.experiment import (
    CrossingConfig,
    ExperimentBase,
    LawDumpConfig,
    LimitCheckConfig,
    ReferenceTablesConfig,
    ResultRecord,
    ThresholdConfig,
)
from schemas.estimates import CouplingReport, ThresholdBudget
from services.crossing_service import coupling_check, crossing_outcomes, summarize_crossing
from services.enumeration_service import (
    exposed_distribution,
    fit_tail,
    law_moments,
    partition_function,
    peeling_law,
)
from services.site_threshold_service import estimate_threshold, universal_threshold
from services.stable_limit_service import (
    ladder_epoch_exponent,
    overshoot_frequencies,
    positivity_check,
    self_similarity_check,
    xi_growth_check,
)
from utils.parallel import TrialRunner
from utils.rng import RngStream
from utils.serialization import remove_quietly, write_csv, write_json

logger = logging.getLogger(__name__)

REFERENCE_TABLES_FILE = "reference_tables.json"
OUTCOME_HEADER = ("trial", "T", "B_before", "overshoot", "case", "k1", "k2", "d_l", "d_r")
Q_HEAD = 10


def _record_name(config: ExperimentBase) -> str:
    return f"{config.command}_{config.seed}.json"


def _outcome_rows(outcomes: List[Optional[StoppedOutcome]]):
    for trial, o in enumerate(outcomes):
        if o is None:
            yield (trial, "", "", "", CrossingCase.CENSORED.value, "", "", "", "")
        else:
            yield (trial, o.T, o.B_before, o.overshoot, o.case.value,
                   _blank(o.k1), _blank(o.k2), _blank(o.d_l), _blank(o.d_r))


def _blank(value: Optional[int]) -> Any:
    return "" if value is None else value


def _outcomes_path(base: str, lam: float, several: bool) -> Path:
    path = Path(base)
    if not several:
        return path
    return path.with_name(f"{path.stem}_lambda{lam:g}{path.suffix or '.csv'}")


def _run_law_dump(config: LawDumpConfig, runner: TrialRunner, files: List[Path]) -> Tuple[Dict[str, Any], int, int]:
    law = peeling_law(MapModel.of(config.model))
    moments = law_moments(law)
    header: Dict[str, Any] = {
        "model": config.model,
        "q_inner": law.q_inner,
        "side_mass": law.side_mass,
        "moments": moments,
        "exposed_distribution": exposed_distribution(law),
        "tail_mass_beyond_kmax": law.side_tail_mass(config.kmax),
    }
    if config.kmax >= 40:
        header["tail"] = fit_tail(law, max(10, config.kmax // 4), config.kmax)
    rows = []
    for k in range(law.side_first, config.kmax + 1):
        q = law.q_side(k)
        rows.append((k, repr(float(q)), f"{q.numerator}/{q.denominator}"))
    path = Path(config.output_dir) / f"law_{config.model}.csv"
    write_csv(path, ("k", "q_side_decimal", "q_side_fraction"), rows)
    files.append(path)
    return {"header": header, "rows": len(rows)}, 0, 0


def _run_threshold(config: ThresholdConfig, runner: TrialRunner, files: List[Path]) -> Tuple[Dict[str, Any], int, int]:
    budget = ThresholdBudget(
        trials_per_probe=config.trials,
        escape_height=config.escape_height,
        max_steps=config.max_steps,
        max_probes=config.max_probes,
        threshold_guess=config.threshold_guess,
    )
    estimate = estimate_threshold(MapModel.of(config.model), config.tol, budget, RngStream(config.seed), runner)
    trials = config.trials * (len(estimate.probes) + 1)
    return {"estimate": estimate}, trials, estimate.total_steps


def _run_crossing(config: CrossingConfig, runner: TrialRunner, files: List[Path]) -> Tuple[Dict[str, Any], int, int]:
    kernel = CrossingKernel.critical(config.kernel, config.model)
    rng = RngStream(config.seed)
    estimates = []
    for lam in config.lambdas:
        logger.info(f"🚀 Crossing {kernel.label} at lambda={lam}: {config.trials} trials")
        outcomes = crossing_outcomes(kernel, lam, config.a, config.trials, rng, b=config.b,
                                     runner=runner, max_steps=config.max_steps)
        if config.emit_outcomes:
            path = _outcomes_path(config.emit_outcomes, lam, len(config.lambdas) > 1)
            write_csv(path, OUTCOME_HEADER, _outcome_rows(outcomes))
            files.append(path)
        estimates.append(summarize_crossing(kernel, lam, config.a, config.b, outcomes, config.max_steps))
    convergence = [
        {"lambda": e.lambda_, "p_hat": e.p_hat, "p_hat_upper": e.p_hat_upper, "ci_halfwidth": e.ci_halfwidth,
         "deviation": e.deviation, "tie_rate": e.tie_rate}
        for e in estimates
    ]
    steps = sum(e.total_steps for e in estimates)
    return {"estimates": estimates, "convergence": convergence}, config.trials * len(config.lambdas), steps


def _run_limit_check(config: LimitCheckConfig, runner: TrialRunner,
                     files: List[Path]) -> Tuple[Dict[str, Any], int, int]:
    kernel = CrossingKernel.critical(config.kernel, config.model)
    component = WalkComponent(config.component) if config.component else None
    rng = RngStream(config.seed)
    if config.check == "positivity":
        report = positivity_check(kernel, config.horizon, config.trials, rng, component, runner)
    elif config.check == "ladder":
        report = ladder_epoch_exponent(kernel, config.trials, config.horizon, rng, component, runner)
    elif config.check == "selfsim":
        lambda1, lambda2 = config.lambdas
        report = self_similarity_check(kernel, lambda1, lambda2, config.t, config.trials, rng, component, runner)
    elif config.check == "xi":
        report = xi_growth_check(kernel, config.horizons, config.trials, rng, runner)
    elif config.check == "overshoot":
        lam = config.lambdas[-1]
        report = overshoot_frequencies(kernel, lam, config.a, config.bs, config.trials, rng, runner,
                                       config.max_steps)
    else:
        report = coupling_check(kernel.model, config.lambdas[-1], config.a, config.trials, rng, runner,
                                config.max_steps)
    steps = report.steps_checked if isinstance(report, CouplingReport) else report.total_steps
    return {"check": config.check, "kernel": kernel.label, "report": report}, config.trials, steps


def _run_reference_tables(config: ReferenceTablesConfig, runner: TrialRunner,
                          files: List[Path]) -> Tuple[Dict[str, Any], int, int]:
    path = Path(config.output_dir) / REFERENCE_TABLES_FILE
    emit_reference_tables(config.output_dir)
    files.append(path)
    return {"reference_tables": path.name}, 0, 0


RUNNERS: Dict[str, Callable[..., Tuple[Dict[str, Any], int, int]]] = {
    "law-dump": _run_law_dump,
    "threshold": _run_threshold,
    "crossing": _run_crossing,
    "limit-check": _run_limit_check,
    "reference-tables": _run_reference_tables,
}


def run_experiment(config: ExperimentBase, runner: Optional[TrialRunner] = None) -> ResultRecord:
    """
    Run one validated experiment and write its JSON record to the output directory.

    Trial i of every batch draws from a stream derived from the seed and i
    alone, so the record does not depend on the worker count.

    Raises:
        ConfigError: If the config has no known command
        OutputError: If a record or stream cannot be written; every file
            this run already wrote is removed
    """
    handler = RUNNERS.get(getattr(config, "command", None))
    if handler is None:
        raise ConfigError(f"unknown experiment command: {getattr(config, 'command', None)}")
    runner = runner or TrialRunner(config.workers)
    files: List[Path] = []
    started_at = datetime.now(pytz.utc).isoformat()
    clock = time.perf_counter()
    logger.info(f"🚀 Running {config.command} with seed {config.seed} on {runner.workers} worker(s)")
    try:
        outputs, trials, steps = handler(config, runner, files)
        record_path = Path(config.output_dir) / _record_name(config)
        record = ResultRecord(
            command=config.command,
            library_version=__version__,
            seed=config.seed,
            config=config.model_dump(),
            outputs=outputs,
            trials=trials,
            total_steps=steps,
            started_at=started_at,
            wall_clock_seconds=time.perf_counter() - clock,
            files=[p.name for p in files] + [record_path.name],
        )
        write_json(record_path, record)
    except Exception:
        remove_quietly(files)
        raise
    logger.info(f"✅ {config.command} finished in {record.wall_clock_seconds:.2f}s -> {record_path}")
    return record


def reference_tables() -> Dict[str, Any]:
    """Exact constants of both ensembles, keyed for golden-value lookups."""
    constants: Dict[str, Fraction] = {}
    for (kind, model_kind), p in CRITICAL_PROBABILITIES.items():
        constants[f"p_{kind.value}_{model_kind.value}"] = p
    heads: Dict[str, Dict[int, Fraction]] = {}
    exposed: Dict[str, Dict[int, Fraction]] = {}
    for model_kind in MapKind:
        model = MapModel.of(model_kind)
        law = peeling_law(model)
        moments = law_moments(law)
        suffix = model_kind.value
        constants[f"q_inner_{suffix}"] = law.q_inner
        constants[f"side_mass_{suffix}"] = law.side_mass
        constants[f"eta_{suffix}"] = moments.eta
        constants[f"delta_{suffix}"] = moments.delta
        constants[f"E_exposed_{suffix}"] = moments.E_exposed
        constants[f"E_Rr_given_positive_{suffix}"] = moments.E_Rr_given_positive
        constants[f"universal_site_{suffix}"] = universal_threshold(moments.eta, moments.delta)
        constants[f"Z2_{suffix}"] = partition_function(model, 2)
        constants[f"Z4_{suffix}"] = partition_function(model, 4)
        heads[suffix] = {k: law.q_side(k) for k in range(law.side_first, law.side_first + Q_HEAD)}
        exposed[suffix] = exposed_distribution(law)
    return {"constants": constants, "q_side_head": heads, "exposed_distribution": exposed}


def emit_reference_tables(output_dir: Optional[str] = None) -> Path:
    """Write the exact constants as JSON golden values."""
    path = Path(output_dir or settings.OUTPUT_DIR) / REFERENCE_TABLES_FILE
    write_json(path, reference_tables())
    logger.info(f"✅ Reference tables written to {path}")
    return path
