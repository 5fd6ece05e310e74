# Copyright The npca developers
#
# tests/test_trajectory.py - npca chain trajectory tests.
#
# This file is part of the npca project.
#
# SPDX-License-Identifier: Apache-2.0
import unittest
import logging
from io import StringIO
from os.path import exists, join

import numpy as np

from tests import *

from npca import BandSet, NPCA_MODEL_BLOCKER
from npca.phy import PhyParams
from npca.ctmc import (
    BssSpec,
    GeneratorMatrix,
    TR_NPCA_ACCESS,
    analyze,
    access_rates,
    access_delays,
)
from npca.trajectory import *
from npca.harness import BUILTIN_SCENARIOS, builtin_scenario

log = logging.getLogger()

CALIBRATED = PhyParams(ctrl_overhead_override=274e-6)


def stationary_distance(which, npca, n_events, seed):
    """Return the total variation distance between the occupancy of a
        trajectory of about ``n_events`` jumps and the stationary
        distribution of built-in scenario ``which``.
    """
    bsses = builtin_scenario(which, npca=npca, phy=CALIBRATED).active_bsses()
    result = analyze(bsses, CALIBRATED)
    pi = result.distribution.pi
    jump_rate = float(np.dot(pi, -np.diag(result.generator.q)))
    duration = n_events / jump_rate
    share = occupancy(simulate_chain(result.generator, duration, seed), len(pi), duration)
    return 0.5 * np.abs(share - pi).sum()


def scenario_one(npca=False):
    return [
        BssSpec("A", BandSet.span(0, 8), 0, npca_enabled=npca, distance=1.5),
        BssSpec("B", BandSet.span(0, 4), 0, distance=17.0),
    ]


class SimulateChainTests(unittest.TestCase):
    def setUp(self):
        log.info("Preparing %s", self._testMethodName)

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)

    def test_two_state_occupancy(self):
        generator = GeneratorMatrix(None, [[-1.0, 1.0], [3.0, -3.0]])
        events = list(simulate_chain(generator, 2000.0, 5))
        share = occupancy(events, 2, 2000.0)
        self.assertAlmostEqual(share.sum(), 1.0)
        self.assertLess(abs(share[0] - 0.75), 0.04)
        self.assertTrue(all(e.kind == EV_JUMP and e.bss is None for e in events))

    def test_events_are_ordered(self):
        result = analyze(scenario_one(), CALIBRATED)
        events = list(simulate_chain(result.generator, 1.0, 3))
        self.assertEqual(events[0].from_state, 0)
        for (prev, event) in zip(events, events[1:]):
            self.assertLess(prev.time, event.time)
            self.assertEqual(prev.to_state, event.from_state)
        self.assertLessEqual(events[-1].time, 1.0)

    def test_deterministic(self):
        result = analyze(scenario_one(npca=True), CALIBRATED)
        first = list(simulate_chain(result.generator, 0.5, 42))
        second = list(simulate_chain(result.generator, 0.5, 42))
        other = list(simulate_chain(result.generator, 0.5, 43))
        self.assertEqual(first, second)
        self.assertNotEqual(first, other)

    def test_occupancy_matches_stationary(self):
        result = analyze(scenario_one(npca=True), CALIBRATED)
        events = list(simulate_chain(result.generator, 20.0, 7))
        share = occupancy(events, len(result.generator), 20.0)
        distance = 0.5 * np.abs(share - result.distribution.pi).sum()
        self.assertLess(distance, 0.03)

    def test_occupancy_matches_stationary_all_scenarios(self):
        for which in BUILTIN_SCENARIOS:
            for npca in (False, True):
                with self.subTest(scenario=which, npca=npca):
                    self.assertLess(stationary_distance(which, npca, 200000, 7), 0.03)

    @unittest.skipIf(not have_long_tests(), "requires NPCA_LONG_TESTS")
    def test_occupancy_converges_at_ten_million_events(self):
        for which in BUILTIN_SCENARIOS:
            for npca in (False, True):
                with self.subTest(scenario=which, npca=npca):
                    self.assertLess(stationary_distance(which, npca, 10**7, 7), 1e-2)

    def test_absorbing_state(self):
        generator = GeneratorMatrix(None, [[-1.0, 1.0], [0.0, 0.0]])
        with self.assertRaises(NpcaModelError) as cm:
            list(simulate_chain(generator, 100.0, 1))

    def test_bad_duration(self):
        generator = GeneratorMatrix(None, [[-1.0, 1.0], [3.0, -3.0]])
        with self.assertRaises(ValueError) as cm:
            list(simulate_chain(generator, 0.0, 1))


class AccessDelayTests(unittest.TestCase):
    def setUp(self):
        log.info("Preparing %s", self._testMethodName)

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)

    def test_delay_matches_access_rate(self):
        result = analyze(scenario_one(), CALIBRATED)
        events = list(simulate_chain(result.generator, 20.0, 11))
        report = access_delay(events, result.skeleton, 20.0)
        expected = access_delays(result.distribution, result.skeleton)
        rates = access_rates(result.distribution, result.skeleton)
        for name in ("A", "B"):
            self.assertLess(relative_error(report.mean(name), expected[name]), 0.08)
            self.assertLess(relative_error(report.access_rate(name), rates[name]), 0.08)
            self.assertGreater(report[name].samples, 1000)

    def test_npca_shortens_delay(self):
        legacy = analyze(scenario_one(), CALIBRATED)
        npca = analyze(scenario_one(npca=True), CALIBRATED)
        legacy_report = access_delay(
            list(simulate_chain(legacy.generator, 10.0, 2)), legacy.skeleton, 10.0
        )
        npca_report = access_delay(
            list(simulate_chain(npca.generator, 10.0, 2)), npca.skeleton, 10.0
        )
        self.assertLess(npca_report.mean("A"), 0.5 * legacy_report.mean("A"))

    def test_blocker_model_counts_bursts(self):
        result = analyze(scenario_one(npca=True), CALIBRATED, NPCA_MODEL_BLOCKER)
        events = list(simulate_chain(result.generator, 10.0, 9))
        report = access_delay(events, result.skeleton, 10.0)
        npca_accesses = sum(
            1 for e in events
            if e.kind == TR_NPCA_ACCESS and e.time >= report.start
        )
        self.assertGreater(report["A"].accesses, npca_accesses)

    def test_warmup_window(self):
        result = analyze(scenario_one(), CALIBRATED)
        events = list(simulate_chain(result.generator, 5.0, 4))
        report = access_delay(events, result.skeleton, 5.0, warmup=0.2)
        self.assertGreaterEqual(report.start, 1.0)
        self.assertEqual(report.end, 5.0)
        self.assertAlmostEqual(report.window, report.end - report.start)

    def test_no_events(self):
        result = analyze(scenario_one(), CALIBRATED)
        with self.assertRaises(ValueError) as cm:
            access_delay([], result.skeleton)

    def test_single_access_has_no_mean(self):
        result = analyze(scenario_one(), CALIBRATED)
        events = [
            TrajectoryEvent(0.001, 0, 1, "access", "A"),
            TrajectoryEvent(0.002, 1, 0, "completion", "A"),
            TrajectoryEvent(0.003, 0, 1, "access", "A"),
        ]
        report = access_delay(events, result.skeleton, 0.01, warmup=0.0)
        self.assertIsNone(report.mean("A"))
        self.assertEqual(report["A"].accesses, 1)
        self.assertEqual(report["B"].samples, 0)
        self.assertEqual(repr(report), "DelayReport(A=-, B=-)")


class EventTraceTests(unittest.TestCase):
    def setUp(self):
        log.info("Preparing %s", self._testMethodName)
        reset_sandbox()

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)
        rm_sandbox()

    def test_write_event_trace(self):
        out = StringIO()
        events = [
            TrajectoryEvent(0.5, 0, 1, "access", "A"),
            TrajectoryEvent(1.25, 1, 0, EV_JUMP),
        ]
        write_event_trace(events, out)
        lines = out.getvalue().splitlines()
        self.assertEqual(lines[0], "time,from,to,kind,bss")
        self.assertEqual(lines[1], "0.500000000,0,1,access,A")
        self.assertEqual(lines[2], "1.250000000,1,0,jump,")

    def test_write_event_trace_path(self):
        result = analyze(scenario_one(), CALIBRATED)
        path = join(SANDBOX_PATH, "trace.csv")
        events = list(simulate_chain(result.generator, 0.05, 1))
        write_event_trace(events, path)
        self.assertTrue(exists(path))
        with open(path) as trace:
            self.assertEqual(len(trace.readlines()), len(events) + 1)

# vim: set et ts=4 sw=4 :
