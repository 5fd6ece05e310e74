# Copyright The npca developers
#
# npca/command.py - npca command interface
#
# This file is part of the npca project.
#
# SPDX-License-Identifier: Apache-2.0
"""The ``npca.command`` module provides both the ``npca`` command line
interface infrastructure, and a simple procedural interface to the
``npca`` library modules.

The procedural interface is used by the ``npca`` command line tool,
and may be used by application programs, or interactively in the
Python shell by users who do not require the full object API.

In addition the module contains definitions for ``Report`` object
types and fields used to print per-BSS results and per-state
probabilities with the ``npca.report`` module.
"""
from argparse import ArgumentParser, Namespace
from dataclasses import dataclass
from os.path import basename, exists as path_exists
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import sys

import numpy as np

from npca import (
    FORMAT_JSON,
    NPCA_DEBUG_PHY,
    NPCA_DEBUG_CTMC,
    NPCA_DEBUG_TRAJECTORY,
    NPCA_DEBUG_DES,
    NPCA_DEBUG_HARNESS,
    NPCA_DEBUG_REPORT,
    NPCA_DEBUG_COMMAND,
    NPCA_DEBUG_ALL,
    NPCA_MODELS,
    OUTPUT_FORMATS,
    NpcaError,
    get_npca_config,
    get_npca_config_path,
    set_debug_mask,
    set_npca_config_path,
    __version__,
)
from npca.config import NpcaConfigError, load_npca_config
from npca.ctmc import (
    NpcaNumericalError,
    NpcaScenarioError,
    access_delays,
    analyze,
    state_report,
)
from npca.des import NpcaDesError, DesTraceRecord, run_des, run_des_replicas, write_des_trace
from npca.harness import (
    DELTA_RANGE,
    DISTANCE_RANGE,
    ENGINE_CTMC,
    ENGINE_DES,
    ENGINES,
    SWEEP_PARAMETERS,
    AggregateReport,
    NpcaValidationError,
    ScenarioConfig,
    builtin_scenario,
    delay_rows,
    load_scenario,
    monte_carlo,
    report_rows,
    reproduce_tables,
    sweep,
    write_report_json,
    write_rows_csv,
    write_rows_json,
)
from npca.phy import NpcaParameterError
from npca.report import (
    REP_FLOAT,
    REP_NUM,
    REP_STR,
    FieldType,
    Report,
    ReportObjType,
    ReportOpts,
)
from npca.trajectory import NpcaModelError, access_delay, simulate_chain, write_event_trace

# Module logging configuration.
_log = logging.getLogger(__name__)
_log.set_debug_mask(NPCA_DEBUG_COMMAND)

_log_debug = _log.debug
_log_debug_cmd = _log.debug_masked
_log_info = _log.info
_log_warn = _log.warning
_log_error = _log.error

_default_log_level = logging.WARNING
_console_handler = None

#: Exit status of a successful command.
EXIT_OK = 0
#: Exit status of a validation or usage error.
EXIT_INVALID = 1
#: Exit status of a numerical or engine failure.
EXIT_FAILED = 2

#: Prefix selecting a built-in scenario in ``--scenario``.
BUILTIN_PREFIX = "builtin:"

# Exceptions mapped to ``EXIT_INVALID``; every other ``NpcaError`` maps
# to ``EXIT_FAILED``.
_invalid_errors = (
    NpcaValidationError,
    NpcaParameterError,
    NpcaScenarioError,
    NpcaConfigError,
)
_failed_errors = (NpcaNumericalError, NpcaModelError, NpcaDesError)


#
# Reporting object types
#


@dataclass
class BssSummary:
    """One row of a per-BSS result report.

    Throughput is in bits per second and delays in seconds; fields an
    engine does not produce are ``None``.
    """

    name: str
    allocation: str
    primary: int
    npca: bool
    mcs: int
    distance: Optional[float]
    delta: int
    throughput: Optional[float] = None
    delay: Optional[float] = None
    delay_std: Optional[float] = None
    samples: Optional[int] = None
    model_delay: Optional[float] = None
    collision: Optional[float] = None
    attempts: Optional[int] = None
    npca_txops: Optional[int] = None


@dataclass
class StateSummary:
    """One row of a CTMC state probability report."""

    index: int
    label: str
    probability: float


#: BSS summary report object type
NR_BSS = 1
#: CTMC state report object type
NR_STATE = 2

#: Report object type table for ``npca.command`` reports.
_report_obj_types = [
    ReportObjType(NR_BSS, "BSS results", "bss_", lambda o: o),
    ReportObjType(NR_STATE, "CTMC states", "state_", lambda o: o),
]


def _mbps(value: Optional[float]) -> Optional[float]:
    return value / 1e6 if value is not None else None


def _ms(value: Optional[float]) -> Optional[float]:
    return value * 1e3 if value is not None else None


#: Fields derived from per-BSS results.
_bss_fields = [
    FieldType(
        NR_BSS, "name", "BSS", "BSS name", 3, REP_STR,
        lambda f, d: f.report_str(d.name),
    ),
    FieldType(
        NR_BSS, "allocation", "Alloc", "Channel unit allocation", 5, REP_STR,
        lambda f, d: f.report_str(d.allocation),
    ),
    FieldType(
        NR_BSS, "primary", "Primary", "Primary channel unit", 7, REP_NUM,
        lambda f, d: f.report_num(d.primary),
    ),
    FieldType(
        NR_BSS, "npca", "NPCA", "NPCA enabled", 4, REP_STR,
        lambda f, d: f.report_str("yes" if d.npca else "no"),
    ),
    FieldType(
        NR_BSS, "mcs", "MCS", "MCS index", 3, REP_NUM,
        lambda f, d: f.report_num(d.mcs),
    ),
    FieldType(
        NR_BSS, "distance", "Dist(m)", "AP to station distance", 7, REP_FLOAT,
        lambda f, d: f.report_float(d.distance, 2),
    ),
    FieldType(
        NR_BSS, "delta", "Delta", "Aggregation limit", 5, REP_NUM,
        lambda f, d: f.report_num(d.delta),
    ),
    FieldType(
        NR_BSS, "throughput", "Tput(Mbps)", "Throughput in Mbps", 10, REP_FLOAT,
        lambda f, d: f.report_float(_mbps(d.throughput)),
    ),
    FieldType(
        NR_BSS, "delay", "Delay(ms)", "Mean channel access delay", 9, REP_FLOAT,
        lambda f, d: f.report_float(_ms(d.delay)),
    ),
    FieldType(
        NR_BSS, "delaystd", "Std(ms)", "Access delay standard deviation", 7,
        REP_FLOAT, lambda f, d: f.report_float(_ms(d.delay_std)),
    ),
    FieldType(
        NR_BSS, "samples", "Samples", "Access delay samples", 7, REP_NUM,
        lambda f, d: f.report_num(d.samples),
    ),
    FieldType(
        NR_BSS, "modeldelay", "Model(ms)", "CTMC access delay", 9, REP_FLOAT,
        lambda f, d: f.report_float(_ms(d.model_delay)),
    ),
    FieldType(
        NR_BSS, "collision", "Pcol", "Collision probability", 6, REP_FLOAT,
        lambda f, d: f.report_float(d.collision, 4),
    ),
    FieldType(
        NR_BSS, "attempts", "Attempts", "Transmission attempts", 8, REP_NUM,
        lambda f, d: f.report_num(d.attempts),
    ),
    FieldType(
        NR_BSS, "npcatxops", "NpcaTXOPs", "TXOPs sent on the NPCA channel", 9,
        REP_NUM, lambda f, d: f.report_num(d.npca_txops),
    ),
]

#: Fields derived from CTMC states.
_state_fields = [
    FieldType(
        NR_STATE, "index", "Index", "State index", 5, REP_NUM,
        lambda f, d: f.report_num(d.index),
    ),
    FieldType(
        NR_STATE, "label", "State", "Active transmissions", 12, REP_STR,
        lambda f, d: f.report_str(d.label),
    ),
    FieldType(
        NR_STATE, "probability", "Probability", "Stationary probability", 11,
        REP_FLOAT, lambda f, d: f.report_float(d.probability, 6),
    ),
]

_default_analyze_fields = "name,allocation,primary,npca,mcs,throughput,delay"
_default_delay_fields = "name,npca,delay,delaystd,samples,modeldelay"
_default_simulate_fields = "name,npca,mcs,throughput,delay,collision,attempts,npcatxops"
_default_state_fields = "index,label,probability"


def _expand_fields(default_fields: str, output_fields: Optional[str]) -> str:
    """Expand output fields list from command line arguments."""

    if not output_fields:
        output_fields = default_fields
    elif output_fields.startswith("+"):
        output_fields = default_fields + "," + output_fields[1:]
    return output_fields


def _do_print_type(
    report_fields: List[FieldType],
    selected: Sequence[object],
    output_fields: Optional[str] = None,
    opts: Optional[ReportOpts] = None,
    sort_keys: Optional[str] = None,
    title: Optional[str] = None,
):
    """Print a report of ``selected`` objects using ``report_fields``.

    :param report_fields: the available ``FieldType`` list
    :param selected: the objects to report, one per row
    :param output_fields: a comma-separated list of output fields
    :param opts: output formatting and control options
    :param sort_keys: a comma-separated list of sort keys
    :param title: the report title
    """
    opts = opts if opts is not None else ReportOpts()

    nr = Report(_report_obj_types, report_fields, output_fields, opts, sort_keys, title)

    for obj in selected:
        nr.report_object(obj)

    return nr.report_output()


def _summaries(config: ScenarioConfig) -> Dict[str, BssSummary]:
    return {
        bss.name: BssSummary(
            bss.name,
            str(bss.allocation),
            bss.primary_unit,
            bss.npca_enabled,
            bss.mcs.index,
            bss.distance,
            bss.delta,
        )
        for bss in config.active_bsses()
    }


def _summaries_from_report(
    config: ScenarioConfig, report: AggregateReport
) -> List[BssSummary]:
    """Summarize a Monte Carlo report: median throughput, mean delay and
    mean collision probability.
    """
    summaries = _summaries(config)
    for name, summary in summaries.items():
        stats = report.throughput.get(name)
        summary.throughput = stats.median if stats else None
        summary.delay = report.mean_delay.get(name)
        summary.collision = report.collision.get(name)
    return list(summaries.values())


#
# Procedural interface
#


def resolve_scenario(
    scenario: str,
    npca: Optional[bool] = None,
    npca_model: Optional[str] = None,
    seed: Optional[int] = None,
    instances: Optional[int] = None,
    randomize: bool = False,
) -> ScenarioConfig:
    """Return the ``ScenarioConfig`` named by a ``--scenario`` argument.

    ``scenario`` is either ``builtin:<name>`` or the path of a JSON
    scenario file. Arguments that are not ``None`` override the values
    of the scenario.

    :param scenario: the scenario argument
    :param npca: switch NPCA on or off
    :param npca_model: the CTMC NPCA completion model
    :param seed: the experiment seed
    :param instances: the Monte Carlo instance count
    :param randomize: draw distances and aggregation limits per
                      instance from the default ranges
    :rtype: ScenarioConfig
    :raises: NpcaValidationError for an unknown scenario or an invalid
             scenario file.
    """
    if scenario.startswith(BUILTIN_PREFIX):
        config = builtin_scenario(scenario[len(BUILTIN_PREFIX):])
    else:
        config = load_scenario(scenario)

    overrides = {}
    if npca is not None:
        overrides["npca"] = npca
    if npca_model is not None:
        overrides["npca_model"] = npca_model
    if seed is not None:
        overrides["seed"] = seed
    if instances is not None:
        overrides["instances"] = instances
    if randomize:
        overrides["distance_range"] = DISTANCE_RANGE
        overrides["delta_range"] = DELTA_RANGE
    config = config.replace(**overrides) if overrides else config
    _log_debug_cmd("resolved scenario: %r", config)
    return config


def parse_grid(grid: str) -> Tuple[str, List[str]]:
    """Parse a ``key=v1,v2,...`` sweep grid.

    :rtype: tuple
    :raises: NpcaValidationError for a malformed grid or an unknown key.
    """
    (key, sep, values) = grid.partition("=")
    key = key.strip()
    if not sep or not key:
        raise NpcaValidationError([f"grid: '{grid}' is not of the form key=v1,v2,..."])
    if key not in SWEEP_PARAMETERS:
        raise NpcaValidationError(
            [f"grid: '{key}' is not one of {list(SWEEP_PARAMETERS)}"]
        )
    points = [value.strip() for value in values.split(",") if value.strip()]
    if not points:
        raise NpcaValidationError(["grid: no grid values given"])
    return (key, points)


def write_rows(rows: Sequence[Dict[str, object]], out: Optional[str], fmt: str):
    """Write long format rows to ``out`` (or stdout) as CSV or JSON."""
    target = out if out else sys.stdout
    if fmt == FORMAT_JSON:
        write_rows_json(rows, target)
    else:
        write_rows_csv(rows, target)
    if out:
        _log_info("Wrote %d rows to %s", len(rows), out)


def _write_reports(reports: Sequence[AggregateReport], out: str, fmt: str):
    if fmt == FORMAT_JSON:
        write_report_json(reports, out)
    else:
        write_rows_csv(report_rows(reports), out)
    _log_info("Wrote %d report(s) to %s", len(reports), out)


def print_analysis(
    config: ScenarioConfig,
    output_fields: Optional[str] = None,
    opts: Optional[ReportOpts] = None,
    sort_keys: Optional[str] = None,
    states: bool = False,
):
    """Solve the CTMC of ``config`` and print per-BSS throughput and
    channel access delay, optionally followed by the stationary
    probability of every state.

    :rtype: CtmcResult
    """
    bsses = config.active_bsses()
    result = analyze(bsses, config.phy, config.npca_model)
    delays = access_delays(result.distribution, result.skeleton)
    summaries = _summaries(config)
    for name, summary in summaries.items():
        summary.throughput = result.throughput[name]
        summary.delay = delays[name]

    _do_print_type(
        _bss_fields,
        list(summaries.values()),
        output_fields=_expand_fields(_default_analyze_fields, output_fields),
        opts=opts,
        sort_keys=sort_keys,
        title="BSSs",
    )
    if states:
        if opts is None or not opts.json:
            print()
        rows = [
            StateSummary(index, label, p)
            for (index, label, p) in state_report(result.skeleton, result.distribution)
        ]
        _do_print_type(
            _state_fields,
            rows,
            output_fields=_default_state_fields,
            opts=opts,
            title="States",
        )
    return result


def print_delays(
    config: ScenarioConfig,
    duration: float,
    output_fields: Optional[str] = None,
    opts: Optional[ReportOpts] = None,
    sort_keys: Optional[str] = None,
    trace: Optional[str] = None,
):
    """Simulate a trajectory of the CTMC of ``config`` and print the
    measured channel access delay of each BSS next to the CTMC value.

    :param duration: the simulated time in seconds
    :param trace: an optional path receiving the event trace
    :rtype: DelayReport
    """
    bsses = config.active_bsses()
    result = analyze(bsses, config.phy, config.npca_model)
    events = list(simulate_chain(result.generator, duration, config.seed))
    if trace:
        write_event_trace(events, trace)
    delays = access_delay(events, result.skeleton, duration)
    model = access_delays(result.distribution, result.skeleton)
    summaries = _summaries(config)
    for name, summary in summaries.items():
        summary.delay = delays[name].mean
        summary.delay_std = delays[name].std
        summary.samples = delays[name].samples
        summary.model_delay = model[name]

    _do_print_type(
        _bss_fields,
        list(summaries.values()),
        output_fields=_expand_fields(_default_delay_fields, output_fields),
        opts=opts,
        sort_keys=sort_keys,
        title="BSSs",
    )
    return (delays, model)


def print_simulation(
    config: ScenarioConfig,
    duration: float,
    runs: int = 1,
    output_fields: Optional[str] = None,
    opts: Optional[ReportOpts] = None,
    sort_keys: Optional[str] = None,
    trace: Optional[str] = None,
):
    """Run the discrete-event simulator on ``config`` and print the
    per-BSS results averaged over ``runs`` replicas.

    Replica seeds are derived from the scenario seed. With ``trace``
    the first replica records its events to that path.

    :rtype: DesMetrics
    """
    bsses = config.active_bsses()
    seq = np.random.SeedSequence(config.seed)
    seeds = [int(s) for s in seq.generate_state(runs)]
    if trace:
        records: List[DesTraceRecord] = []
        run_des(bsses, duration, seeds[0], config.phy, records)
        write_des_trace(records, trace)
    metrics = run_des_replicas(bsses, duration, seeds, config.phy)
    summaries = _summaries(config)
    for name, summary in summaries.items():
        m = metrics[name]
        summary.throughput = m.throughput
        summary.delay = m.mean_delay
        summary.collision = m.collision_probability
        summary.attempts = m.attempts
        summary.npca_txops = m.npca_txops

    _do_print_type(
        _bss_fields,
        list(summaries.values()),
        output_fields=_expand_fields(_default_simulate_fields, output_fields),
        opts=opts,
        sort_keys=sort_keys,
        title="BSSs",
    )
    return metrics


def print_monte_carlo(
    config: ScenarioConfig,
    engine: str,
    duration: float,
    runs: int = 1,
    workers: int = 1,
    output_fields: Optional[str] = None,
    opts: Optional[ReportOpts] = None,
    sort_keys: Optional[str] = None,
) -> AggregateReport:
    """Run a Monte Carlo experiment and print the median throughput,
    mean delay and mean collision probability of each BSS.
    """
    report = monte_carlo(config, engine, duration, runs, workers)
    default = _default_simulate_fields if engine == ENGINE_DES else _default_analyze_fields
    _do_print_type(
        _bss_fields,
        _summaries_from_report(config, report),
        output_fields=_expand_fields(default, output_fields),
        opts=opts,
        sort_keys=sort_keys,
        title="BSSs",
    )
    return report


#
# Command driven API: argument handling and per-command handlers
#


def _settings(cmd_args: Namespace) -> Namespace:
    """Merge command line values over the active ``NpcaConfig``."""
    nc = get_npca_config()
    return Namespace(
        seed=cmd_args.seed if cmd_args.seed is not None else nc.seed,
        fmt=cmd_args.format or nc.output_format,
        workers=cmd_args.workers or nc.workers,
        npca_model=cmd_args.npca_model or nc.npca_model,
        duration=cmd_args.duration or nc.des_duration,
        runs=cmd_args.runs or nc.des_runs,
    )


def _npca_arg(value: Optional[str]) -> Optional[bool]:
    if value is None:
        return None
    return value == "on"


def _config_from_args(cmd_args: Namespace, settings: Namespace) -> ScenarioConfig:
    if not cmd_args.scenario:
        raise NpcaValidationError(["scenario: --scenario is required"])
    # Scenario files carry their own seed; built-in ones take the
    # configured default.
    seed = cmd_args.seed
    if seed is None and cmd_args.scenario.startswith(BUILTIN_PREFIX):
        seed = settings.seed
    return resolve_scenario(
        cmd_args.scenario,
        npca=_npca_arg(cmd_args.npca),
        npca_model=cmd_args.npca_model,
        seed=seed,
        instances=cmd_args.instances,
        randomize=cmd_args.randomize,
    )


def _report_status(reports: Sequence[AggregateReport]) -> int:
    failed = sum(len(report.failures) for report in reports)
    if failed:
        _log_error("%d instance(s) failed", failed)
        return EXIT_FAILED
    return EXIT_OK


def _analyze_cmd(cmd_args: Namespace, opts: Optional[ReportOpts]) -> int:
    """Analyze command handler.

    Solve the CTMC of a single configuration, or run a CTMC Monte Carlo
    experiment when more than one instance is requested.

    :param cmd_args: Command line arguments for the command
    :param opts: Reporting options
    :returns: integer status code returned from ``main()``
    """
    settings = _settings(cmd_args)
    config = _config_from_args(cmd_args, settings)
    if config.instances > 1:
        report = print_monte_carlo(
            config, ENGINE_CTMC, settings.duration, workers=settings.workers,
            output_fields=cmd_args.options, opts=opts, sort_keys=cmd_args.sort,
        )
        if cmd_args.out:
            _write_reports([report], cmd_args.out, settings.fmt)
        return _report_status([report])

    print_analysis(
        config, output_fields=cmd_args.options, opts=opts,
        sort_keys=cmd_args.sort, states=cmd_args.states,
    )
    if cmd_args.out:
        single = config.replace(instances=1, distance_range=None, delta_range=None)
        _write_reports([monte_carlo(single, ENGINE_CTMC)], cmd_args.out, settings.fmt)
    return EXIT_OK


def _delay_cmd(cmd_args: Namespace, opts: Optional[ReportOpts]) -> int:
    """Delay command handler.

    Simulate a CTMC trajectory and report the measured channel access
    delays.

    :param cmd_args: Command line arguments for the command
    :param opts: Reporting options
    :returns: integer status code returned from ``main()``
    """
    settings = _settings(cmd_args)
    config = _config_from_args(cmd_args, settings)
    (delays, model) = print_delays(
        config, settings.duration, output_fields=cmd_args.options, opts=opts,
        sort_keys=cmd_args.sort, trace=cmd_args.trace,
    )
    if cmd_args.out:
        write_rows(delay_rows(config, delays, model), cmd_args.out, settings.fmt)
    return EXIT_OK


def _simulate_cmd(cmd_args: Namespace, opts: Optional[ReportOpts]) -> int:
    """Simulate command handler.

    Run the discrete-event simulator on a single configuration, or a
    DES Monte Carlo experiment when more than one instance is requested.

    :param cmd_args: Command line arguments for the command
    :param opts: Reporting options
    :returns: integer status code returned from ``main()``
    """
    settings = _settings(cmd_args)
    config = _config_from_args(cmd_args, settings)
    runs = settings.runs
    if config.instances > 1:
        report = print_monte_carlo(
            config, ENGINE_DES, settings.duration, runs, settings.workers,
            output_fields=cmd_args.options, opts=opts, sort_keys=cmd_args.sort,
        )
        if cmd_args.out:
            _write_reports([report], cmd_args.out, settings.fmt)
        return _report_status([report])

    print_simulation(
        config, settings.duration, runs, output_fields=cmd_args.options,
        opts=opts, sort_keys=cmd_args.sort, trace=cmd_args.trace,
    )
    if cmd_args.out:
        single = config.replace(instances=1, distance_range=None, delta_range=None)
        report = monte_carlo(single, ENGINE_DES, settings.duration, runs)
        _write_reports([report], cmd_args.out, settings.fmt)
        return _report_status([report])
    return EXIT_OK


def _sweep_cmd(cmd_args: Namespace, _opts: Optional[ReportOpts]) -> int:
    """Sweep command handler.

    Run a Monte Carlo experiment at every point of the ``--grid`` and
    write the long format rows to ``--out`` or the standard output.

    :param cmd_args: Command line arguments for the command
    :returns: integer status code returned from ``main()``
    """
    if not cmd_args.grid:
        raise NpcaValidationError(["grid: --grid key=v1,v2,... is required"])
    settings = _settings(cmd_args)
    config = _config_from_args(cmd_args, settings)
    (parameter, values) = parse_grid(cmd_args.grid)
    engine = cmd_args.engine or ENGINE_CTMC
    runs = settings.runs
    reports = sweep(
        config, parameter, values, engine, settings.duration, runs, settings.workers
    )
    if settings.fmt == FORMAT_JSON:
        write_report_json(reports, cmd_args.out or sys.stdout)
    else:
        write_rows_csv(report_rows(reports), cmd_args.out or sys.stdout)
    return _report_status(reports)


def _reproduce_tables_cmd(cmd_args: Namespace, _opts: Optional[ReportOpts]) -> int:
    """Reproduce tables command handler.

    Evaluate the three validation scenarios with NPCA off and on and
    write the computed values next to the published ones.

    :param cmd_args: Command line arguments for the command
    :returns: integer status code returned from ``main()``
    """
    settings = _settings(cmd_args)
    engines = (cmd_args.engine,) if cmd_args.engine else ENGINES
    duration = cmd_args.duration or 50.0
    runs = settings.runs
    rows = reproduce_tables(settings.seed, engines, duration, runs, settings.npca_model)
    write_rows(rows, cmd_args.out, settings.fmt)
    return EXIT_OK


ANALYZE_CMD = "analyze"
DELAY_CMD = "delay"
SIMULATE_CMD = "simulate"
SWEEP_CMD = "sweep"
REPRODUCE_TABLES_CMD = "reproduce-tables"

_npca_commands = [
    (ANALYZE_CMD, _analyze_cmd),
    (DELAY_CMD, _delay_cmd),
    (SIMULATE_CMD, _simulate_cmd),
    (SWEEP_CMD, _sweep_cmd),
    (REPRODUCE_TABLES_CMD, _reproduce_tables_cmd),
]


def _match_command(cmd: str, cmds):
    for c in cmds:
        if cmd == c[0]:
            return c
    return None


def _report_opts_from_args(cmd_args: Namespace) -> ReportOpts:
    opts = ReportOpts()

    if not cmd_args:
        return opts

    if cmd_args.json:
        opts.json = True

    if cmd_args.rows:
        opts.columns_as_rows = True

    if cmd_args.separator:
        opts.separator = cmd_args.separator

    if cmd_args.name_prefixes:
        opts.field_name_prefix = "NPCA_"
        opts.unquoted = False
        opts.aligned = False

    if cmd_args.no_headings:
        opts.headings = False

    return opts


def setup_logging(cmd_args: Namespace):
    global _console_handler
    level = _default_log_level
    if cmd_args.verbose and cmd_args.verbose > 1:
        level = logging.DEBUG
    elif cmd_args.verbose and cmd_args.verbose > 0:
        level = logging.INFO
    # Configure the package-level logger
    npca_log = logging.getLogger("npca")
    formatter = logging.Formatter("%(levelname)s - %(message)s")
    npca_log.setLevel(level)
    if _console_handler is not None:
        npca_log.removeHandler(_console_handler)
    _console_handler = logging.StreamHandler()
    _console_handler.setLevel(level)
    _console_handler.setFormatter(formatter)
    npca_log.addHandler(_console_handler)


def shutdown_logging():
    logging.shutdown()


def set_debug(debug_arg: Optional[str]):
    if not debug_arg:
        return

    mask_map = {
        "phy": NPCA_DEBUG_PHY,
        "ctmc": NPCA_DEBUG_CTMC,
        "trajectory": NPCA_DEBUG_TRAJECTORY,
        "des": NPCA_DEBUG_DES,
        "harness": NPCA_DEBUG_HARNESS,
        "report": NPCA_DEBUG_REPORT,
        "command": NPCA_DEBUG_COMMAND,
        "all": NPCA_DEBUG_ALL,
    }

    mask = 0
    for name in debug_arg.split(","):
        if name not in mask_map:
            raise ValueError(f"Unknown debug mask: {name}")
        mask |= mask_map[name]
    set_debug_mask(mask)


def _error_status(err: NpcaError) -> int:
    if isinstance(err, NpcaValidationError):
        for diag in err.diagnostics:
            print(diag, file=sys.stderr)
        return EXIT_INVALID
    if isinstance(err, _invalid_errors):
        print(err, file=sys.stderr)
        return EXIT_INVALID
    if not isinstance(err, _failed_errors):
        _log_debug_cmd("unclassified error %s", err.__class__.__name__)
    _log_error("Command failed: %s", err)
    return EXIT_FAILED


def _load_config(cmd_args: Namespace) -> int:
    """Load the persistent configuration named by ``--config``, or the
    default configuration file if it exists.
    """
    try:
        if cmd_args.config:
            set_npca_config_path(cmd_args.config)
        elif not path_exists(get_npca_config_path()):
            return EXIT_OK
        load_npca_config()
    except (OSError, ValueError) as e:
        _log_error("Could not load npca configuration: %s", e)
        return EXIT_INVALID
    return EXIT_OK


def _build_parser(prog: str) -> ArgumentParser:
    parser = ArgumentParser(
        prog=prog, description="NPCA channel access performance models"
    )
    parser.add_argument(
        "command",
        metavar="COMMAND",
        type=str,
        action="store",
        help="The command to run: analyze, delay, simulate, sweep, "
        "reproduce-tables",
    )
    parser.add_argument(
        "-c",
        "--config",
        metavar="FILE",
        type=str,
        help="Path to an npca configuration file",
        default=None,
    )
    parser.add_argument(
        "--debug",
        metavar="DEBUGOPTS",
        type=str,
        help="A list of debug options to enable",
    )
    parser.add_argument(
        "--duration",
        metavar="SECONDS",
        type=float,
        help="The simulated time per run in seconds",
    )
    parser.add_argument(
        "--engine",
        metavar="ENGINE",
        choices=ENGINES,
        help="The evaluation engine: ctmc or des",
    )
    parser.add_argument(
        "--format",
        metavar="FORMAT",
        choices=OUTPUT_FORMATS,
        help="The result file format: csv or json",
    )
    parser.add_argument(
        "--grid",
        metavar="KEY=V1,V2,...",
        type=str,
        help="The sweep parameter and its values: delta, alpha_d or "
        "mcs_pair (values a:b)",
    )
    parser.add_argument(
        "--instances",
        metavar="N",
        type=int,
        help="The number of Monte Carlo instances",
    )
    parser.add_argument(
        "--json", action="store_true", help="Output report as JSON"
    )
    parser.add_argument(
        "--name-prefixes",
        "--nameprefixes",
        help="Add a prefix to report field names",
        action="store_true",
    )
    parser.add_argument(
        "--no-headings",
        "--noheadings",
        action="store_true",
        help="Suppress output of report headings",
    )
    parser.add_argument(
        "--npca",
        metavar="on|off",
        choices=("on", "off"),
        help="Switch NPCA on or off for the capable BSSs",
    )
    parser.add_argument(
        "--npca-model",
        "--npcamodel",
        metavar="MODEL",
        choices=NPCA_MODELS,
        help="The CTMC NPCA completion model: recontend or blocker",
    )
    parser.add_argument(
        "-o",
        "--options",
        metavar="FIELDS",
        type=str,
        help="Specify which fields to display",
    )
    parser.add_argument(
        "-O",
        "--sort",
        metavar="SORTFIELDS",
        type=str,
        help="Specify which fields to sort by",
    )
    parser.add_argument(
        "--out",
        metavar="PATH",
        type=str,
        help="Write results to PATH",
    )
    parser.add_argument(
        "--randomize",
        action="store_true",
        help="Randomize distances and aggregation limits per instance",
    )
    parser.add_argument(
        "--rows", action="store_true", help="Output report columns as rows"
    )
    parser.add_argument(
        "--runs",
        metavar="N",
        type=int,
        help="The number of DES replicas",
    )
    parser.add_argument(
        "--scenario",
        metavar="SCENARIO",
        type=str,
        help="A scenario file path or builtin:I, builtin:II, builtin:III "
        "or builtin:Full",
    )
    parser.add_argument(
        "--seed",
        metavar="N",
        type=int,
        help="The experiment seed",
    )
    parser.add_argument(
        "--separator",
        metavar="SEP",
        type=str,
        help="Report field separator",
    )
    parser.add_argument(
        "--states",
        action="store_true",
        help="Also report the stationary probability of every CTMC state",
    )
    parser.add_argument(
        "--trace",
        metavar="PATH",
        type=str,
        help="Write the event trace of the run to PATH",
    )
    parser.add_argument(
        "-V",
        "--verbose",
        help="Enable verbose output",
        action="count",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
    )
    parser.add_argument(
        "--workers",
        metavar="N",
        type=int,
        help="The number of Monte Carlo worker processes",
    )
    return parser


def main(args: List[str]) -> int:
    parser = _build_parser(basename(args[0]))

    try:
        cmd_args = parser.parse_args(args=args[1:])
    except SystemExit as e:
        if e.code == 0:
            return EXIT_OK
        return EXIT_INVALID

    try:
        set_debug(cmd_args.debug)
    except ValueError as e:
        print(e)
        return EXIT_INVALID
    setup_logging(cmd_args)

    command = _match_command(cmd_args.command, _npca_commands)
    if not command:
        print(f"Unknown command: {cmd_args.command}")
        return EXIT_INVALID

    for (name, value) in (
        ("--instances", cmd_args.instances),
        ("--runs", cmd_args.runs),
        ("--workers", cmd_args.workers),
    ):
        if value is not None and value < 1:
            print(f"{name} must be at least 1")
            return EXIT_INVALID
    if cmd_args.duration is not None and cmd_args.duration <= 0:
        print("--duration must be positive")
        return EXIT_INVALID

    status = _load_config(cmd_args)
    if status:
        return status

    opts = _report_opts_from_args(cmd_args)
    status = EXIT_FAILED

    if cmd_args.debug:
        status = command[1](cmd_args, opts)
    else:
        try:
            status = command[1](cmd_args, opts)
        except NpcaError as e:
            status = _error_status(e)
        except ValueError as e:
            print(e, file=sys.stderr)
            status = EXIT_INVALID
        except Exception as e:
            _log_error("Command failed: %s", e)

    shutdown_logging()
    return status


__all__ = [
    "EXIT_OK",
    "EXIT_INVALID",
    "EXIT_FAILED",
    "BUILTIN_PREFIX",
    # Report types
    "BssSummary",
    "StateSummary",
    "NR_BSS",
    "NR_STATE",
    # Procedural API
    "resolve_scenario",
    "parse_grid",
    "write_rows",
    "print_analysis",
    "print_delays",
    "print_simulation",
    "print_monte_carlo",
    # Command line
    "setup_logging",
    "shutdown_logging",
    "set_debug",
    "main",
]

# vim: set et ts=4 sw=4 :
