# Copyright The npca developers
#
# npca/trajectory.py - Event based simulation of the Markov chain
#
# This file is part of the npca project.
#
# SPDX-License-Identifier: Apache-2.0
"""The ``npca.trajectory`` module walks the jump chain of a generator
matrix with exponential sojourns and derives the per-BSS channel access
delay, which the stationary distribution alone does not give.

Every run starts in state 0 at time zero and is fully determined by
its seed.
"""
from bisect import bisect_right
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, TextIO, Union
import csv
import logging

import numpy as np

from npca import (
    NpcaError,
    NPCA_DEBUG_TRAJECTORY,
    NPCA_MODEL_BLOCKER,
)
from npca.ctmc import (
    ChainSkeleton,
    GeneratorMatrix,
    TR_ACCESS,
    TR_NPCA_ACCESS,
)
from npca.phy import TxKind

_log = logging.getLogger(__name__)
_log.set_debug_mask(NPCA_DEBUG_TRAJECTORY)

_log_debug = _log.debug
_log_debug_trajectory = _log.debug_masked
_log_info = _log.info
_log_warn = _log.warning
_log_error = _log.error

#: Event kind of a transition taken from a bare rate matrix.
EV_JUMP = "jump"

#: Fraction of the run after which the warm-up period may end.
DEFAULT_WARMUP = 0.01

# Random variates are drawn in blocks of this size.
_BLOCK = 4096

_TRACE_FIELDS = ("time", "from", "to", "kind", "bss")


class NpcaModelError(NpcaError):
    """The chain cannot be simulated (for example an absorbing state)."""

    pass


@dataclass(frozen=True)
class TrajectoryEvent:
    """One transition of a simulated chain trajectory."""

    time: float
    from_state: int
    to_state: int
    kind: str
    bss: Optional[str] = None


@dataclass(frozen=True)
class BssDelay:
    """Access delay statistics of one BSS."""

    bss: str
    mean: Optional[float]
    std: Optional[float]
    samples: int
    accesses: int


class DelayReport:
    """DelayReport()

    Per-BSS mean channel access delay and the measurement window it was
    taken over.
    """

    def __init__(self, delays: Dict[str, BssDelay], start: float, end: float):
        self.delays = delays
        self.start = start
        self.end = end

    @property
    def window(self) -> float:
        return self.end - self.start

    def mean(self, bss: str) -> Optional[float]:
        return self.delays[bss].mean

    def access_rate(self, bss: str) -> float:
        """Return the measured accesses per second of ``bss``."""
        if self.window <= 0:
            return 0.0
        return self.delays[bss].accesses / self.window

    def __getitem__(self, bss: str) -> BssDelay:
        return self.delays[bss]

    def __iter__(self):
        return iter(self.delays.values())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DelayReport)
            and self.delays == other.delays
            and (self.start, self.end) == (other.start, other.end)
        )

    def __repr__(self) -> str:
        means = ", ".join(
            f"{d.bss}={d.mean * 1e3:.3f} ms" if d.mean else f"{d.bss}=-"
            for d in self.delays.values()
        )
        return f"DelayReport({means})"


def _jump_table(generator: GeneratorMatrix):
    """Return per-state ``(exit_rate, cumulative_rates, targets)``.

    ``targets`` holds ``(to_state, kind, bss)`` for every outgoing
    transition in the order of ``cumulative_rates``.
    """
    n_states = len(generator)
    outgoing: List[list] = [[] for _ in range(n_states)]
    skeleton = generator.skeleton
    if skeleton is not None:
        for tr in skeleton.transitions:
            if tr.src != tr.dst and tr.rate > 0:
                outgoing[tr.src].append((tr.rate, (tr.dst, tr.kind, tr.bss)))
    else:
        q = generator.q
        for i in range(n_states):
            for j in np.nonzero(q[i] > 0)[0]:
                if i != j:
                    outgoing[i].append((float(q[i, j]), (int(j), EV_JUMP, None)))

    table = []
    for i, trs in enumerate(outgoing):
        cumulative = list(np.cumsum([rate for rate, _ in trs]))
        exit_rate = cumulative[-1] if cumulative else 0.0
        table.append((exit_rate, cumulative, [target for _, target in trs]))
    return table


def simulate_chain(
    generator: GeneratorMatrix, duration: float, seed: int
) -> Iterator[TrajectoryEvent]:
    """Simulate the chain of ``generator`` for ``duration`` seconds.

    Starting in state 0, each sojourn is drawn from an exponential
    distribution with rate ``-Q[i, i]`` and the next state ``j`` is
    chosen with probability ``Q[i, j] / -Q[i, i]``.

    :param generator: the chain generator
    :param duration: the simulated time in seconds
    :param seed: the random seed
    :returns: an iterator over the events up to ``duration``
    :rtype: Iterator[TrajectoryEvent]
    :raises: NpcaModelError if an absorbing state is reached,
             ValueError if ``duration`` is not positive.
    """
    if duration <= 0:
        raise ValueError(f"Duration must be positive: {duration}")
    table = _jump_table(generator)
    rng = np.random.default_rng(seed)
    state = 0
    now = 0.0
    count = 0
    while True:
        sojourns = rng.standard_exponential(_BLOCK)
        picks = rng.random(_BLOCK)
        for k in range(_BLOCK):
            (exit_rate, cumulative, targets) = table[state]
            if exit_rate <= 0:
                raise NpcaModelError(f"Absorbing state {state} at t={now:g}")
            now += sojourns[k] / exit_rate
            if now > duration:
                _log_debug_trajectory(
                    "simulated %d events over %g s (seed %d)", count, duration, seed
                )
                return
            choice = min(bisect_right(cumulative, picks[k] * exit_rate), len(targets) - 1)
            (to_state, kind, bss) = targets[choice]
            count += 1
            yield TrajectoryEvent(now, state, to_state, kind, bss)
            state = to_state


def occupancy(
    events: Sequence[TrajectoryEvent], n_states: int, duration: float
) -> np.ndarray:
    """Return the fraction of ``[0, duration]`` spent in each state.

    :param events: the events of a run starting in state 0
    :param n_states: the number of chain states
    :param duration: the simulated time of the run
    :rtype: numpy.ndarray
    """
    spent = np.zeros(n_states)
    state = 0
    last = 0.0
    for event in events:
        spent[state] += event.time - last
        state = event.to_state
        last = event.time
    spent[state] += duration - last
    return spent / duration


def _warmup_start(events: Sequence[TrajectoryEvent], threshold: float) -> int:
    """Index of the first return to state 0 at or after ``threshold``."""
    for i, event in enumerate(events):
        if event.time >= threshold and event.to_state == 0:
            return i
    return len(events)


def _holds_npca(skeleton: ChainSkeleton, index: int, bss: str) -> bool:
    tx = skeleton.states[index].tx_of(bss)
    return tx is not None and tx.kind is TxKind.NPCA


def access_delay(
    events: Sequence[TrajectoryEvent],
    skeleton: ChainSkeleton,
    duration: Optional[float] = None,
    warmup: float = DEFAULT_WARMUP,
) -> DelayReport:
    """Measure the start-to-start gaps between channel accesses.

    An access is recorded at every transition that starts a
    transmission of a BSS. With the ``blocker`` NPCA model an NPCA
    transmission stands for back-to-back NPCA TXOPs, so one further
    access is recorded every ``T_s`` of the NPCA TXOP for each whole
    TXOP that fits before the NPCA transmission is removed.

    Events before the first return to state 0 after ``warmup *
    duration`` are discarded.

    :param events: the trajectory events of one run
    :param skeleton: the chain skeleton the run was simulated from
    :param duration: the simulated time, defaulting to the last event
    :param warmup: the warm-up fraction of ``duration``
    :rtype: DelayReport
    :raises: ValueError if ``events`` is empty.
    """
    events = list(events)
    if not events:
        raise ValueError("No trajectory events to measure")
    end = duration if duration is not None else events[-1].time
    first = _warmup_start(events, warmup * end)
    start = events[first].time if first < len(events) else end
    counted = events[first + 1:]

    per_burst = skeleton.npca_model == NPCA_MODEL_BLOCKER
    accesses: Dict[str, List[float]] = {bss.name: [] for bss in skeleton.scenario}
    # NPCA bursts in progress: bss -> (entry time, TXOP duration)
    bursts: Dict[str, tuple] = {}

    def close_burst(bss: str, until: float):
        (entry, txop) = bursts.pop(bss)
        whole = int((until - entry) / txop) if txop > 0 else 0
        accesses[bss].extend(entry + k * txop for k in range(1, whole))

    for event in counted:
        if event.kind in (TR_ACCESS, TR_NPCA_ACCESS):
            accesses[event.bss].append(event.time)
            if per_burst and event.kind == TR_NPCA_ACCESS:
                tx = skeleton.states[event.to_state].tx_of(event.bss)
                bursts[event.bss] = (event.time, skeleton.profile(tx).duration)
        for bss in list(bursts):
            if not _holds_npca(skeleton, event.to_state, bss):
                close_burst(bss, event.time)
    for bss in list(bursts):
        close_burst(bss, end)

    delays = {}
    for bss, times in accesses.items():
        times.sort()
        gaps = np.diff(times)
        if len(gaps):
            mean = float(gaps.mean())
            std = float(gaps.std(ddof=1)) if len(gaps) > 1 else 0.0
        else:
            (mean, std) = (None, None)
        delays[bss] = BssDelay(bss, mean, std, len(gaps), len(times))
    report = DelayReport(delays, start, end)
    _log_debug_trajectory("%r", report)
    return report


def write_event_trace(
    events: Sequence[TrajectoryEvent], trace: Union[str, TextIO]
):
    """Write ``events`` as comma separated text to a path or file.

    :param events: the events to write
    :param trace: a path or an open text file
    """
    if isinstance(trace, str):
        with open(trace, "w", newline="", encoding="utf8") as trace_file:
            write_event_trace(events, trace_file)
        return
    writer = csv.writer(trace, lineterminator="\n")
    writer.writerow(_TRACE_FIELDS)
    for event in events:
        writer.writerow(
            (
                f"{event.time:.9f}",
                event.from_state,
                event.to_state,
                event.kind,
                event.bss or "",
            )
        )


__all__ = [
    "NpcaModelError",
    "EV_JUMP",
    "DEFAULT_WARMUP",
    "TrajectoryEvent",
    "BssDelay",
    "DelayReport",
    "simulate_chain",
    "occupancy",
    "access_delay",
    "write_event_trace",
]

# vim: set et ts=4 sw=4 :
