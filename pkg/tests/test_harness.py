# Copyright The npca developers
#
# tests/test_harness.py - npca scenario and experiment harness tests.
#
# This file is part of the npca project.
#
# SPDX-License-Identifier: Apache-2.0
import unittest
import logging
import json
from io import StringIO
from os.path import exists, join

import numpy as np

from tests import *

import npca
from npca import NPCA_MODEL_BLOCKER
from npca.phy import PhyParams
from npca.trajectory import BssDelay, DelayReport
from npca.harness import *

log = logging.getLogger()


class ScenarioTests(unittest.TestCase):
    def setUp(self):
        log.info("Preparing %s", self._testMethodName)

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)

    def test_builtin_scenario(self):
        for (which, names) in BUILTIN_SCENARIOS.items():
            config = builtin_scenario(which)
            self.assertEqual(tuple(bss.name for bss in config.bsses), names)
            self.assertEqual(validate(config), [])

    def test_builtin_scenario_topology(self):
        config = builtin_scenario("III")
        self.assertEqual(str(config.bss("C").allocation), "0-7")
        self.assertEqual(config.bss("C").primary_unit, 4)
        self.assertEqual(config.bss("A").mcs.index, 11)
        self.assertEqual(config.bss("B").mcs.index, 1)
        self.assertEqual(config.bss("D").mcs.index, 6)
        self.assertTrue(config.bss("A").npca_enabled)
        self.assertFalse(config.bss("D").npca_enabled)

    def test_builtin_scenario_unknown(self):
        with self.assertRaises(NpcaValidationError) as cm:
            builtin_scenario("IV")
        self.assertEqual(
            cm.exception.diagnostics, ["scenario: unknown built-in scenario 'IV'"]
        )

    def test_active_bsses_apply_npca_switch(self):
        off = builtin_scenario("I")
        on = builtin_scenario("I", npca=True)
        self.assertFalse(any(bss.npca_enabled for bss in off.active_bsses()))
        self.assertEqual(
            [bss.npca_enabled for bss in on.active_bsses()], [True, False]
        )

    def test_builtin_scenario_alpha_d(self):
        config = builtin_scenario("II", alpha_d=0.5)
        self.assertEqual(config.bss("D").alpha, 0.5)
        self.assertEqual(config.bss("A").alpha, 1.0)

    def test_ScenarioConfig_str(self):
        config = builtin_scenario("I", npca=True)
        self.assertTrue(str(config).startswith("Scenario I (NPCA on, recontend)"))

    def test_load_minimal(self):
        config = load_scenario(scenario_path("minimal.json"))
        self.assertEqual(config.name, "I")
        self.assertEqual([bss.name for bss in config.bsses], ["A", "B"])
        self.assertFalse(config.npca)

    def test_load_npca_full(self):
        config = load_scenario(scenario_path("npca_full.json"))
        self.assertEqual(config.name, "III")
        self.assertTrue(config.npca)
        self.assertEqual(config.seed, 11)
        self.assertEqual(config.phy.ctrl_overhead_override, 0.000274)

    def test_load_custom(self):
        config = load_scenario(scenario_path("custom.json"))
        self.assertEqual(config.name, "custom")
        self.assertEqual(config.instances, 4)
        self.assertEqual(config.delta_range, (1, 1024))
        self.assertEqual(str(config.bss("Y").allocation), "4-7")

    def test_load_bad_delta(self):
        with self.assertRaises(NpcaValidationError) as cm:
            load_scenario(scenario_path("bad_delta.json"))
        self.assertIn("bsses[0].delta: 2000 is outside [1, 1024]", cm.exception.diagnostics)

    def test_load_typo(self):
        with self.assertRaises(NpcaValidationError) as cm:
            load_scenario(scenario_path("typo.json"))
        self.assertEqual(cm.exception.diagnostics, ["instance: unknown field"])

    def test_load_broken(self):
        with self.assertRaises(NpcaValidationError) as cm:
            load_scenario(scenario_path("broken.json"))

    def test_load_missing(self):
        with self.assertRaises(NpcaValidationError) as cm:
            load_scenario(scenario_path("nonexistent.json"))

    def test_validate_collects_diagnostics(self):
        raw = {
            "bsses": [
                {"name": "X", "allocation": [0], "primary": 0, "npca": True, "mcs": 6},
                {"name": "X", "allocation": [2, 3, 4, 5], "primary": 2, "mcs": 13},
            ],
            "randomizers": {"delta_range": [0, 2000]},
            "instances": 0,
        }
        diags = validate(raw)
        self.assertIn("bsses[0].npca: NPCA needs an allocation of at least 40 MHz", diags)
        self.assertIn("bsses[1].name: duplicate BSS name 'X'", diags)
        self.assertIn("bsses[1].allocation: [2-5] is not an aligned channel", diags)
        self.assertIn("bsses[1].mcs: 13 is outside [1, 11]", diags)
        self.assertIn("randomizers.delta_range: range [0, 2000] is outside [1, 1024]", diags)
        self.assertIn("instances: 0 must be an integer >= 1", diags)

    def test_validate_no_bsses(self):
        self.assertEqual(validate({"bsses": []}), ["bsses: at least one BSS is required"])

    def test_validate_rate_required(self):
        raw = {"bsses": [{"name": "X", "allocation": "0-3", "primary": 0}]}
        self.assertEqual(validate(raw), ["bsses[0]: an mcs or a distance is required"])

    def test_validate_model(self):
        raw = {"scenario": "I", "npca_model": "forever"}
        diags = validate(raw)
        self.assertEqual(len(diags), 2)
        self.assertTrue(diags[1].startswith("npca_model: 'forever'"))


class BoxStatsTests(unittest.TestCase):
    def setUp(self):
        log.info("Preparing %s", self._testMethodName)

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)

    def test_boxplot_stats(self):
        stats = boxplot_stats([1.0, 2.0, 3.0, 4.0, 100.0])
        self.assertEqual(stats.count, 5)
        self.assertEqual(stats.median, 3.0)
        self.assertEqual((stats.q1, stats.q3), (2.0, 4.0))
        self.assertEqual((stats.whisker_low, stats.whisker_high), (1.0, 4.0))
        self.assertEqual(stats.outliers, (100.0,))
        self.assertAlmostEqual(stats.mean, 22.0)

    def test_boxplot_stats_matches_numpy(self):
        samples = np.random.default_rng(1).normal(100.0, 10.0, 101)
        stats = boxplot_stats(samples)
        (q1, median, q3) = np.percentile(samples, [25, 50, 75])
        self.assertAlmostEqual(stats.median, median)
        self.assertAlmostEqual(stats.q1, q1)
        self.assertAlmostEqual(stats.q3, q3)
        self.assertLessEqual(stats.whisker_high, q3 + 1.5 * (q3 - q1))
        self.assertGreaterEqual(stats.whisker_low, q1 - 1.5 * (q3 - q1))

    def test_boxplot_stats_single(self):
        stats = boxplot_stats([5.0])
        self.assertEqual(stats.as_dict()["outliers"], [])
        self.assertEqual(stats.whisker_low, 5.0)

    def test_boxplot_stats_empty(self):
        with self.assertRaises(ValueError) as cm:
            boxplot_stats([])


class MonteCarloTests(unittest.TestCase):
    def setUp(self):
        log.info("Preparing %s", self._testMethodName)

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)

    def _random_delta(self, instances=6):
        return builtin_scenario("I", npca=True, seed=5).replace(
            delta_range=DELTA_RANGE, instances=instances
        )

    def test_monte_carlo_single_instance(self):
        report = monte_carlo(builtin_scenario("I"))
        self.assertEqual(len(report.instances), 1)
        self.assertEqual(report.failures, [])
        self.assertEqual(report.throughput["A"].count, 1)
        self.assertIsNotNone(report.mean_delay["A"])
        self.assertEqual(report.collision, {})

    def test_monte_carlo_deterministic(self):
        first = monte_carlo(self._random_delta())
        second = monte_carlo(self._random_delta())
        self.assertEqual(
            [r.throughput for r in first.instances],
            [r.throughput for r in second.instances],
        )
        deltas = set(r.params["A"]["delta"] for r in first.instances)
        self.assertGreater(len(deltas), 1)

    def test_monte_carlo_workers_keep_order(self):
        serial = monte_carlo(self._random_delta(4), workers=1)
        parallel = monte_carlo(self._random_delta(4), workers=2)
        self.assertEqual([r.index for r in parallel.instances], [0, 1, 2, 3])
        self.assertEqual(
            [r.throughput for r in serial.instances],
            [r.throughput for r in parallel.instances],
        )

    def test_monte_carlo_random_distances(self):
        config = builtin_scenario("I", seed=2).replace(
            distance_range=DISTANCE_RANGE, instances=5
        )
        report = monte_carlo(config)
        for result in report.instances:
            for params in result.params.values():
                self.assertGreaterEqual(params["distance"], DISTANCE_RANGE[0])
                self.assertLessEqual(params["distance"], DISTANCE_RANGE[1])

    def test_monte_carlo_des(self):
        report = monte_carlo(builtin_scenario("I"), engine=ENGINE_DES, duration=0.5, runs=2)
        self.assertEqual(report.engine, ENGINE_DES)
        self.assertIsNotNone(report.collision["A"])

    def test_monte_carlo_custom_disjoint(self):
        config = load_scenario(scenario_path("disjoint_primaries.json"))
        report = monte_carlo(config)
        self.assertLess(relative_error(report.median("X"), report.median("Y")), 1e-9)

    def test_monte_carlo_bad_engine(self):
        with self.assertRaises(NpcaValidationError) as cm:
            monte_carlo(builtin_scenario("I"), engine="ns3")

    def test_monte_carlo_invalid_config(self):
        config = builtin_scenario("I").replace(instances=0)
        with self.assertRaises(NpcaValidationError) as cm:
            monte_carlo(config)


class SweepTests(unittest.TestCase):
    def setUp(self):
        log.info("Preparing %s", self._testMethodName)

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)

    def test_sweep_delta(self):
        reports = sweep(builtin_scenario("I", npca=True), SWEEP_DELTA, [8, 128])
        self.assertEqual([r.grid_value for r in reports], ["8", "128"])
        self.assertLess(reports[0].median("A"), reports[1].median("A"))

    def test_sweep_alpha_d(self):
        reports = sweep(builtin_scenario("II", npca=True), SWEEP_ALPHA_D, [0.25, 1.0])
        self.assertLess(reports[0].median("D"), reports[1].median("D"))
        self.assertGreater(reports[0].median("A"), reports[1].median("A"))

    def test_sweep_alpha_d_needs_d(self):
        with self.assertRaises(NpcaValidationError) as cm:
            sweep(builtin_scenario("I"), SWEEP_ALPHA_D, [0.5])

    def test_sweep_mcs_pair(self):
        config = builtin_scenario("I", npca=True)
        (report,) = sweep(config, SWEEP_MCS_PAIR, ["1:11"])
        self.assertEqual(report.grid_param, SWEEP_MCS_PAIR)
        self.assertEqual(report.instances[0].params["A"]["mcs"], 1)
        self.assertEqual(report.instances[0].params["B"]["mcs"], 11)

    def test_sweep_bad_mcs_pair(self):
        with self.assertRaises(NpcaValidationError) as cm:
            sweep(builtin_scenario("I"), SWEEP_MCS_PAIR, ["eleven"])
        with self.assertRaises(NpcaValidationError) as cm:
            sweep(builtin_scenario("I"), SWEEP_MCS_PAIR, ["1:12"])

    def test_sweep_unknown_parameter(self):
        with self.assertRaises(NpcaValidationError) as cm:
            sweep(builtin_scenario("I"), "cw", [16])

    def test_sweep_empty_grid(self):
        with self.assertRaises(NpcaValidationError) as cm:
            sweep(builtin_scenario("I"), SWEEP_DELTA, [])


class NpcaGainTests(unittest.TestCase):
    # Throughput and gains of random deployments are summarized over
    # the same number of instances as the published boxplots.
    instances = 500

    def setUp(self):
        log.info("Preparing %s", self._testMethodName)

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)

    def _random(self, which, instances=None, **kwargs):
        return builtin_scenario(which, seed=1, **kwargs).replace(
            distance_range=DISTANCE_RANGE,
            delta_range=DELTA_RANGE,
            instances=instances or self.instances,
        )

    def test_npca_gain_is_median_of_paired_ratios(self):
        (legacy, npca) = compare_npca(self._random("I", instances=9))
        ratios = [
            on.throughput["A"] / off.throughput["A"]
            for (off, on) in zip(legacy.instances, npca.instances)
        ]
        self.assertAlmostEqual(npca.gain["A"].median, float(np.median(ratios)))
        self.assertEqual(npca.gain["A"].count, 9)
        self.assertEqual(legacy.gain, {})
        self.assertTrue(npca.npca)
        self.assertFalse(legacy.npca)

    def test_npca_gain_of_legacy_only_bss(self):
        (legacy, npca) = compare_npca(builtin_scenario("I"))
        self.assertLess(relative_error(npca.gain["B"].median, 1.0), 0.05)
        self.assertGreater(npca.gain["A"].median, 1.0)

    def test_npca_gain_needs_same_instances(self):
        legacy = monte_carlo(self._random("I", instances=3))
        npca = monte_carlo(self._random("I", instances=3, npca=True).replace(seed=2))
        with self.assertRaises(NpcaValidationError) as cm:
            npca_gain(legacy, npca)

    def test_compare_npca_rows(self):
        (legacy, npca) = compare_npca(self._random("I", instances=4))
        rows = report_rows([legacy, npca])
        gains = [r for r in rows if r["metric"] == "npca_gain"]
        self.assertEqual(len(gains), 2 * 5)
        self.assertTrue(all(r["grid_value"] == "on" for r in gains))
        out = StringIO()
        write_report_json([npca], out)
        report = json.loads(out.getvalue())["reports"][0]
        self.assertIn("npca_gain", report["bsses"]["A"])
        self.assertAlmostEqual(
            report["aggregate_throughput_bps"], npca.aggregate_throughput()
        )

    def test_median_gain_random_scenario_i(self):
        (_, npca) = compare_npca(self._random("I"))
        self.assertEqual(npca.gain["A"].count, self.instances)
        self.assertLess(abs(npca.gain["A"].median - 1.5), 0.15)

    def test_gain_peaks_at_delta_128(self):
        grid = [8, 32, 128, 512, 1024]
        config = self._random("I").replace(delta_range=None)
        legacy = sweep(config, SWEEP_DELTA, grid)
        npca = sweep(config.replace(npca=True), SWEEP_DELTA, grid)
        gains = [npca_gain(off, on)["A"].median for (off, on) in zip(legacy, npca)]
        self.assertEqual(grid[gains.index(max(gains))], 128)
        self.assertGreaterEqual(gains[grid.index(128)], 1.8)

    def test_aggregate_throughput_scenario_ii(self):
        (legacy, npca) = compare_npca(self._random("II", alpha_d=1.0))
        self.assertLess(relative_error(legacy.aggregate_throughput() / 1e6, 650.0), 0.08)
        self.assertLess(relative_error(npca.aggregate_throughput() / 1e6, 626.0), 0.08)


class OutputTests(unittest.TestCase):
    def setUp(self):
        log.info("Preparing %s", self._testMethodName)
        reset_sandbox()

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)
        rm_sandbox()

    def test_report_rows(self):
        rows = report_rows([monte_carlo(builtin_scenario("I"))])
        self.assertEqual(len(rows), 2 * 8 + 2)
        for row in rows:
            self.assertEqual(tuple(row), ROW_FIELDS)
            self.assertEqual(row["version"], npca.__version__)
            self.assertEqual((row["grid_param"], row["grid_value"]), ("npca", "off"))
        self.assertEqual(rows[-1]["metric"], "failed_instances")
        self.assertEqual(rows[-1]["value"], 0)
        self.assertEqual((rows[-2]["bss"], rows[-2]["statistic"]), ("*", "sum_of_medians"))
        self.assertAlmostEqual(
            rows[-2]["value"], sum(r["value"] for r in rows if r["statistic"] == "median")
        )

    def test_write_rows_csv(self):
        out = StringIO()
        write_rows_csv(report_rows([monte_carlo(builtin_scenario("I"))]), out)
        lines = out.getvalue().splitlines()
        self.assertEqual(lines[0], ",".join(ROW_FIELDS))
        self.assertTrue(lines[1].startswith("I,ctmc,npca,off,A,throughput_mbps,median,"))

    def test_write_rows_csv_path(self):
        path = join(SANDBOX_PATH, "rows.csv")
        write_rows_csv([], path)
        self.assertTrue(exists(path))

    def test_write_report_json(self):
        out = StringIO()
        write_report_json([monte_carlo(builtin_scenario("I", npca=True))], out)
        document = json.loads(out.getvalue())
        self.assertEqual(document["version"], npca.__version__)
        report = document["reports"][0]
        self.assertTrue(report["npca"])
        self.assertEqual(sorted(report["bsses"]), ["A", "B"])
        self.assertEqual(report["failures"], 0)

    def test_write_rows_json(self):
        path = join(SANDBOX_PATH, "rows.json")
        rows = report_rows([monte_carlo(builtin_scenario("I"))])
        write_rows_json(rows, path)
        with open(path) as rows_file:
            document = json.load(rows_file)
        self.assertEqual(len(document["rows"]), len(rows))

    def test_delay_rows(self):
        delays = DelayReport(
            {
                "A": BssDelay("A", 2e-3, 1e-3, 10, 11),
                "B": BssDelay("B", None, None, 0, 1),
            },
            0.0,
            1.0,
        )
        rows = delay_rows(builtin_scenario("I"), delays, {"A": 1.5e-3, "B": None})
        values = {(r["bss"], r["statistic"]): r["value"] for r in rows}
        self.assertAlmostEqual(values[("A", "mean")], 2.0)
        self.assertAlmostEqual(values[("A", "model")], 1.5)
        self.assertEqual(values[("B", "count")], 0)
        self.assertNotIn(("B", "mean"), values)
        self.assertTrue(all(r["engine"] == "trajectory" for r in rows))

    def test_reproduce_tables_ctmc(self):
        rows = reproduce_tables(engines=(ENGINE_CTMC,))
        self.assertEqual(len(rows), (2 + 3 + 4) * 2 * 4)
        self.assertEqual(rows, reproduce_tables(engines=(ENGINE_CTMC,)))
        values = {
            (r["scenario"], r["grid_value"], r["bss"], r["metric"], r["statistic"]):
                r["value"]
            for r in rows
        }
        computed = values[("I", "off", "A", "throughput_mbps", "value")]
        reference = values[("I", "off", "A", "throughput_mbps", "reference")]
        self.assertEqual(reference, 213.9)
        self.assertLess(relative_error(computed, reference), 0.05)
        npca_a = values[("I", "on", "A", "throughput_mbps", "value")]
        self.assertLess(relative_error(npca_a, 850.7), 0.10)

    def test_reproduce_tables_blocker(self):
        rows = reproduce_tables(engines=(ENGINE_CTMC,), npca_model=NPCA_MODEL_BLOCKER)
        self.assertTrue(rows)

# vim: set et ts=4 sw=4 :
