# Copyright The npca developers
#
# npca/des.py - Discrete-event 802.11 simulator
#
# This file is part of the npca project.
#
# SPDX-License-Identifier: Apache-2.0
"""The ``npca.des`` module simulates saturated downlink BSSs with slot
accurate binary exponential backoff, RTS/CTS collisions, per-MPDU
packet errors, Dynamic Channel Bonding and NPCA mode switching.

Backoff counters run in 9 us slots while their contention channel is
idle. Counters reaching zero in the same slot fire together, and fires
whose bands overlap collide. Each BSS owns exactly one backoff
instance, which follows it to the NPCA primary channel and back.

The simulator is event driven: at every step the earliest of the
pending transmission ends, NPCA returns, NPCA switches and backoff
fires is processed, in that priority order.
"""
from dataclasses import dataclass, field
from enum import Enum
from math import floor
from typing import Dict, List, Optional, Sequence, TextIO, Union
import csv
import logging

import numpy as np

from npca import NpcaError, BandSet, NPCA_DEBUG_DES
from npca.ctmc import (
    BssSpec,
    NpcaScenarioError,
    transmission_profile_for,
    widest_idle_band,
)
from npca.phy import (
    DEFAULT_PHY,
    PhyParams,
    TxKind,
    max_packets_within,
    txop_duration,
)

_log = logging.getLogger(__name__)
_log.set_debug_mask(NPCA_DEBUG_DES)

_log_debug = _log.debug
_log_debug_des = _log.debug_masked
_log_info = _log.info
_log_warn = _log.warning
_log_error = _log.error

# Events closer than this are simultaneous.
_EPS = 1e-9

#: Trace event names.
DES_ACCESS = "access"
DES_END = "end"
DES_SWITCH = "switch"
DES_RETURN = "return"
DES_HELD = "held"

#: Trace outcomes.
OUTCOME_SUCCESS = "success"
OUTCOME_COLLISION = "collision"
OUTCOME_NONE = ""

_TRACE_FIELDS = ("time", "bss", "event", "band", "outcome")


class NpcaDesError(NpcaError):
    """A simulator invariant was broken during a run."""

    pass


class BackoffMode(Enum):
    """Where a backoff instance is counting down."""

    LEGACY_CONTEND = "legacy"
    NPCA_CONTEND = "npca"
    PAUSED = "paused"


@dataclass
class BackoffState:
    """The single backoff instance of a BSS.

    ``resume_at`` is the time the counter last started running, or
    ``None`` while it is frozen.
    """

    owner: str
    counter: int
    cw: int
    stage: int = 0
    mode: BackoffMode = BackoffMode.PAUSED
    resume_at: Optional[float] = None

    def fire_time(self, slot: float) -> Optional[float]:
        if self.resume_at is None:
            return None
        return self.resume_at + self.counter * slot

    def pause(self, now: float, slot: float):
        """Freeze the counter, consuming the whole idle slots elapsed."""
        if self.resume_at is None:
            return
        elapsed = floor((now - self.resume_at) / slot + 1e-6)
        self.counter = max(self.counter - elapsed, 0)
        self.resume_at = None
        self.mode = BackoffMode.PAUSED


@dataclass
class _Tx:
    ident: int
    bss: str
    band: BandSet
    kind: TxKind
    start: float
    end: float
    n_packets: int
    collided: bool


class ChannelOccupancy:
    """ChannelOccupancy()

    The transmissions holding each 20 MHz channel unit. A unit holds
    more than one transmission only while they collide.
    """

    def __init__(self, n_units: int):
        self._owners: List[Dict[int, _Tx]] = [{} for _ in range(n_units)]

    def is_idle(self, unit: int) -> bool:
        return not self._owners[unit]

    def band_idle(self, band: BandSet) -> bool:
        return all(not self._owners[unit] for unit in band)

    def busy_units(self) -> List[int]:
        return [unit for unit, owners in enumerate(self._owners) if owners]

    def owners(self, unit: int) -> List[_Tx]:
        return list(self._owners[unit].values())

    def occupy(self, tx: _Tx):
        for unit in tx.band:
            self._owners[unit][tx.ident] = tx

    def release(self, tx: _Tx):
        for unit in tx.band:
            self._owners[unit].pop(tx.ident, None)


@dataclass
class BssMetrics:
    """Per-BSS results of a simulation run."""

    bss: str
    throughput: float = 0.0
    mean_delay: Optional[float] = None
    collision_probability: float = 0.0
    attempts: int = 0
    collisions: int = 0
    delivered: int = 0
    npca_txops: int = 0
    delay_samples: int = 0


@dataclass
class DesMetrics:
    """The results of one run, or the average of several replicas."""

    duration: float
    seeds: List[int]
    bsses: Dict[str, BssMetrics] = field(default_factory=dict)

    def __getitem__(self, bss: str) -> BssMetrics:
        return self.bsses[bss]

    def throughput(self) -> Dict[str, float]:
        return {name: m.throughput for name, m in self.bsses.items()}


@dataclass(frozen=True)
class DesTraceRecord:
    """One entry of the optional simulator event trace."""

    time: float
    bss: str
    event: str
    band: str
    outcome: str = OUTCOME_NONE


class _Station:
    """Run-time state of one simulated BSS."""

    def __init__(self, spec: BssSpec, backoff: BackoffState):
        self.spec = spec
        self.backoff = backoff
        self.tx: Optional[_Tx] = None
        self.npca = False
        self.held = False
        self.used_npca = False
        self.blocker: Optional[_Tx] = None
        self.switch_at: Optional[float] = None
        self.switch_tx: Optional[_Tx] = None
        self.return_at: Optional[float] = None
        self.scheduled = 0.0
        self.delay_sum = 0.0
        self.metrics = BssMetrics(spec.name)


class DesSimulator:
    """DesSimulator()

    One seeded simulation run over a scenario.
    """

    def __init__(
        self,
        scenario: Sequence[BssSpec],
        duration: float,
        seed: int,
        phy: Optional[PhyParams] = None,
        trace: Optional[List[DesTraceRecord]] = None,
    ):
        """Initialise a new simulation.

        :param scenario: the saturated BSSs to simulate
        :param duration: the simulated time in seconds
        :param seed: the random seed
        :param phy: PHY parameters, or ``None`` for the defaults
        :param trace: a list to append ``DesTraceRecord`` entries to
        """
        if duration <= 0:
            raise ValueError(f"Duration must be positive: {duration}")
        if not scenario:
            raise NpcaScenarioError("Scenario has no BSSs")
        names = [bss.name for bss in scenario]
        if len(set(names)) != len(names):
            raise NpcaScenarioError(f"Duplicate BSS names in scenario: {names}")

        self.phy = phy or DEFAULT_PHY
        self.duration = duration
        self.seed = seed
        self.trace = trace
        self.rng = np.random.default_rng(seed)
        self.now = 0.0
        self.n_units = max(bss.allocation.units[-1] for bss in scenario) + 1
        self.channel = ChannelOccupancy(self.n_units)
        self.active: Dict[int, _Tx] = {}
        self._next_ident = 0
        self._profiles = {}

        self.stations = []
        for spec in scenario:
            backoff = BackoffState(spec.name, 0, spec.cw_min)
            station = _Station(spec, backoff)
            self._draw(station)
            self.stations.append(station)
        self._collision_time = self.phy.collision_time()

    def _record(self, bss: str, event: str, band="", outcome=OUTCOME_NONE):
        if self.trace is not None:
            self.trace.append(
                DesTraceRecord(self.now, bss, event, str(band), outcome)
            )

    def _draw(self, station: _Station):
        """Draw a fresh counter for ``station``.

        The activity scale ``alpha`` stretches the draw range so that
        the mean backoff is ``(cw - 1) / (2 * alpha)`` slots.
        """
        backoff = station.backoff
        upper = int(floor((backoff.cw - 1) / station.spec.alpha))
        backoff.counter = int(self.rng.integers(0, upper + 1))
        backoff.resume_at = None
        backoff.mode = BackoffMode.PAUSED

    def _counting(self, station: _Station) -> bool:
        if station.tx is not None or station.held:
            return False
        if station.npca:
            return self.channel.band_idle(station.spec.npca_band)
        return self.channel.is_idle(station.spec.primary_unit)

    def _refresh(self):
        slot = self.phy.slot_time
        for station in self.stations:
            backoff = station.backoff
            counting = self._counting(station)
            if counting and backoff.resume_at is None:
                backoff.resume_at = self.now
                backoff.mode = (
                    BackoffMode.NPCA_CONTEND if station.npca else BackoffMode.LEGACY_CONTEND
                )
            elif not counting and backoff.resume_at is not None:
                backoff.pause(self.now, slot)

    def _next_time(self) -> Optional[float]:
        times = [tx.end for tx in self.active.values()]
        slot = self.phy.slot_time
        for station in self.stations:
            for when in (
                station.switch_at,
                station.return_at,
                station.backoff.fire_time(slot),
            ):
                if when is not None:
                    times.append(when)
        return min(times) if times else None

    def _end_transmissions(self) -> bool:
        ending = [tx for tx in self.active.values() if tx.end <= self.now + _EPS]
        for tx in sorted(ending, key=lambda t: t.ident):
            del self.active[tx.ident]
            self.channel.release(tx)
            station = self._station(tx.bss)
            station.tx = None
            backoff = station.backoff
            if tx.collided:
                backoff.cw = min(backoff.cw * 2, station.spec.cw_max)
                backoff.stage += 1
                outcome = OUTCOME_COLLISION
            else:
                delivered = int(self.rng.binomial(tx.n_packets, 1.0 - self.phy.per))
                station.metrics.delivered += delivered
                backoff.cw = station.spec.cw_min
                backoff.stage = 0
                station.delay_sum += self.now - station.scheduled
                station.metrics.delay_samples += 1
                station.scheduled = self.now
                if tx.kind is TxKind.NPCA:
                    station.used_npca = True
                    station.metrics.npca_txops += 1
                outcome = OUTCOME_SUCCESS
            self._record(tx.bss, DES_END, tx.band, outcome)
            self._draw(station)
        return bool(ending)

    def _return_from_npca(self) -> bool:
        handled = False
        for station in self.stations:
            if station.return_at is None or station.return_at > self.now + _EPS:
                continue
            handled = True
            station.return_at = None
            station.backoff.pause(self.now, self.phy.slot_time)
            station.npca = False
            station.blocker = None
            if station.used_npca or station.held:
                self._draw(station)
            station.used_npca = False
            station.held = False
            self._record(station.spec.name, DES_RETURN, station.spec.primary_half)
        return handled

    def _switch_to_npca(self) -> bool:
        handled = False
        for station in self.stations:
            if station.switch_at is None or station.switch_at > self.now + _EPS:
                continue
            handled = True
            blocker = station.switch_tx
            station.switch_at = None
            station.switch_tx = None
            if blocker.ident not in self.active or station.tx is not None:
                continue
            if station.npca:
                continue
            station.backoff.pause(self.now, self.phy.slot_time)
            station.npca = True
            station.used_npca = False
            station.blocker = blocker
            station.return_at = blocker.end - self.phy.t_switch
            self._record(station.spec.name, DES_SWITCH, station.spec.npca_band)
        return handled

    def _legacy_profile(self, spec: BssSpec, band: BandSet):
        key = (spec.name, band)
        if key not in self._profiles:
            kind = TxKind.LEGACY if band == spec.allocation else TxKind.DCB
            self._profiles[key] = transmission_profile_for(spec, band, kind, self.phy)
        return self._profiles[key]

    def _fire(self):
        slot = self.phy.slot_time
        group = [
            station
            for station in self.stations
            if station.backoff.resume_at is not None
            and station.backoff.fire_time(slot) <= self.now + _EPS
        ]
        busy = self.channel.busy_units()
        attempts = []
        for station in group:
            station.backoff.pause(self.now, slot)
            spec = station.spec
            if not station.npca:
                band = widest_idle_band(spec, busy)
                if band is None:
                    raise NpcaDesError(f"{spec.name} fired on a busy primary channel")
                profile = self._legacy_profile(spec, band)
                attempts.append((station, band, profile.kind, profile.n_packets, profile.duration))
                continue
            budget = min(
                station.blocker.end - self.phy.t_switch - self.now, self.phy.t_max
            )
            n_packets = max_packets_within(
                max(budget, 0.0), spec.mcs, spec.npca_band.width, spec.n_ss,
                spec.delta, spec.payload_bits, self.phy,
            )
            if n_packets == 0:
                station.held = True
                self._record(spec.name, DES_HELD, spec.npca_band)
                continue
            duration = txop_duration(
                n_packets, spec.mcs, spec.npca_band.width, spec.n_ss,
                spec.payload_bits, self.phy,
            )
            attempts.append((station, spec.npca_band, TxKind.NPCA, n_packets, duration))

        for (station, band, kind, n_packets, duration) in attempts:
            if not self.channel.band_idle(band):
                raise NpcaDesError(
                    f"{station.spec.name} accessed busy channel units [{band}]"
                )
            collided = any(
                other is not station and band.overlaps(other_band)
                for (other, other_band, _, _, _) in attempts
            )
            end = self.now + (self._collision_time if collided else duration)
            if kind is TxKind.NPCA and not collided:
                deadline = station.blocker.end - self.phy.t_switch
                if end > deadline + _EPS:
                    raise NpcaDesError(
                        f"NPCA TXOP of {station.spec.name} ends {end - deadline:g} s "
                        "after its deadline"
                    )
            tx = _Tx(self._next_ident, station.spec.name, band, kind,
                     self.now, end, n_packets, collided)
            self._next_ident += 1
            station.tx = tx
            station.metrics.attempts += 1
            if collided:
                station.metrics.collisions += 1
            self.active[tx.ident] = tx
            self._record(
                tx.bss, DES_ACCESS, band,
                OUTCOME_COLLISION if collided else OUTCOME_SUCCESS,
            )

        for (station, band, kind, _, _) in attempts:
            self.channel.occupy(station.tx)
            if station.tx.collided or kind is TxKind.NPCA:
                continue
            self._schedule_switches(station.tx)

    def _schedule_switches(self, blocker: _Tx):
        """Schedule NPCA switches of the BSSs whose primary channel the
        decoded transmission ``blocker`` covers.
        """
        switch_at = blocker.start + self.phy.t_npca
        for station in self.stations:
            spec = station.spec
            if (
                station.spec.name == blocker.bss
                or not spec.npca_enabled
                or station.tx is not None
                or station.npca
                or spec.primary_unit not in blocker.band
            ):
                continue
            if switch_at < blocker.end - self.phy.t_switch:
                station.switch_at = switch_at
                station.switch_tx = blocker

    def _station(self, name: str) -> _Station:
        for station in self.stations:
            if station.spec.name == name:
                return station
        raise NpcaDesError(f"Unknown BSS {name}")

    def _check_invariants(self):
        txs = [tx for tx in self.active.values() if not tx.collided]
        for i, tx in enumerate(txs):
            for other in txs[i + 1:]:
                if tx.band.overlaps(other.band):
                    raise NpcaDesError(
                        f"Overlapping transmissions of {tx.bss} and {other.bss}"
                    )
        for station in self.stations:
            backoff = station.backoff
            if backoff.owner != station.spec.name or backoff.counter < 0:
                raise NpcaDesError(f"Broken backoff instance of {station.spec.name}")

    def run(self, check_invariants: bool = True) -> DesMetrics:
        """Run the simulation to completion.

        :param check_invariants: verify channel exclusivity and backoff
                                 state after every step
        :rtype: DesMetrics
        :raises: NpcaDesError if an invariant is broken.
        """
        self._refresh()
        steps = 0
        while True:
            when = self._next_time()
            if when is None or when > self.duration:
                break
            self.now = when
            steps += 1
            if not (
                self._end_transmissions()
                or self._return_from_npca()
                or self._switch_to_npca()
            ):
                self._fire()
            self._refresh()
            if check_invariants:
                self._check_invariants()

        metrics = DesMetrics(self.duration, [self.seed])
        for station in self.stations:
            m = station.metrics
            m.throughput = m.delivered * station.spec.payload_bits / self.duration
            if m.delay_samples:
                m.mean_delay = station.delay_sum / m.delay_samples
            if m.attempts:
                m.collision_probability = m.collisions / m.attempts
            metrics.bsses[station.spec.name] = m
        _log_debug_des(
            "seed %d: %d steps over %g s: %s",
            self.seed,
            steps,
            self.duration,
            ", ".join(f"{n}={m.throughput / 1e6:.2f} Mbps" for n, m in metrics.bsses.items()),
        )
        return metrics


def run_des(
    scenario: Sequence[BssSpec],
    duration: float,
    seed: int,
    phy: Optional[PhyParams] = None,
    trace: Optional[List[DesTraceRecord]] = None,
) -> DesMetrics:
    """Simulate ``scenario`` for ``duration`` seconds.

    :param scenario: the saturated BSSs to simulate
    :param duration: the simulated time in seconds
    :param seed: the random seed
    :param phy: PHY parameters, or ``None`` for the defaults
    :param trace: an optional list receiving ``DesTraceRecord`` entries
    :rtype: DesMetrics
    """
    return DesSimulator(scenario, duration, seed, phy, trace).run()


def run_des_replicas(
    scenario: Sequence[BssSpec],
    duration: float,
    seeds: Sequence[int],
    phy: Optional[PhyParams] = None,
) -> DesMetrics:
    """Average independent runs of ``scenario``, one per seed.

    Throughput, mean delay and collision probability are averaged over
    the replicas; event counters are summed.

    :rtype: DesMetrics
    """
    if not seeds:
        raise ValueError("At least one seed is required")
    runs = [run_des(scenario, duration, seed, phy) for seed in seeds]
    merged = DesMetrics(duration, list(seeds))
    for bss in scenario:
        per_run = [run[bss.name] for run in runs]
        delays = [m.mean_delay for m in per_run if m.mean_delay is not None]
        merged.bsses[bss.name] = BssMetrics(
            bss.name,
            throughput=float(np.mean([m.throughput for m in per_run])),
            mean_delay=float(np.mean(delays)) if delays else None,
            collision_probability=float(
                np.mean([m.collision_probability for m in per_run])
            ),
            attempts=sum(m.attempts for m in per_run),
            collisions=sum(m.collisions for m in per_run),
            delivered=sum(m.delivered for m in per_run),
            npca_txops=sum(m.npca_txops for m in per_run),
            delay_samples=sum(m.delay_samples for m in per_run),
        )
    return merged


def collision_probability_check(
    n_contenders: int,
    duration: float,
    seed: int,
    disjoint: bool = False,
    phy: Optional[PhyParams] = None,
) -> float:
    """Measure the collided attempt fraction of identical saturated BSSs.

    :param n_contenders: the number of BSSs
    :param duration: the simulated time in seconds
    :param seed: the random seed
    :param disjoint: place each BSS on its own 20 MHz channel unit
                     instead of a shared 80 MHz channel
    :returns: collisions over attempts, pooled across the BSSs
    :rtype: float
    """
    if n_contenders < 1:
        raise ValueError("At least one contender is required")
    scenario = []
    for i in range(n_contenders):
        band = BandSet([i]) if disjoint else BandSet.span(0, 4)
        scenario.append(BssSpec(f"S{i + 1}", band, band.first, mcs=6))
    metrics = run_des(scenario, duration, seed, phy)
    attempts = sum(m.attempts for m in metrics.bsses.values())
    collisions = sum(m.collisions for m in metrics.bsses.values())
    return collisions / attempts if attempts else 0.0


def write_des_trace(records: Sequence[DesTraceRecord], trace: Union[str, TextIO]):
    """Write simulator trace ``records`` as comma separated text.

    :param records: the records to write
    :param trace: a path or an open text file
    """
    if isinstance(trace, str):
        with open(trace, "w", newline="", encoding="utf8") as trace_file:
            write_des_trace(records, trace_file)
        return
    writer = csv.writer(trace, lineterminator="\n")
    writer.writerow(_TRACE_FIELDS)
    for record in records:
        writer.writerow(
            (f"{record.time:.9f}", record.bss, record.event, record.band, record.outcome)
        )


__all__ = [
    "NpcaDesError",
    "DES_ACCESS",
    "DES_END",
    "DES_SWITCH",
    "DES_RETURN",
    "DES_HELD",
    "OUTCOME_SUCCESS",
    "OUTCOME_COLLISION",
    "BackoffMode",
    "BackoffState",
    "ChannelOccupancy",
    "BssMetrics",
    "DesMetrics",
    "DesTraceRecord",
    "DesSimulator",
    "run_des",
    "run_des_replicas",
    "collision_probability_check",
    "write_des_trace",
]

# vim: set et ts=4 sw=4 :
