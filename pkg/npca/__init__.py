# Copyright The npca developers
#
# npca/__init__.py - npca package initialisation
#
# This file is part of the npca project.
#
# SPDX-License-Identifier: Apache-2.0
"""This package provides an analytical model and a discrete-event
simulator for overlapping Wi-Fi BSSs that use Dynamic Channel Bonding
and Non-Primary Channel Access (NPCA).

The ``npca`` package contains global definitions, the logging
infrastructure for the package, the active configuration object and
the ``BandSet`` class used to describe spectrum occupancy.

Individual sub-modules provide the PHY timing calculator (``phy``),
the continuous-time Markov chain model (``ctmc``), trajectory based
delay estimation (``trajectory``), the slotted event simulator
(``des``), scenario definitions and experiment plumbing (``harness``),
a simple text reporting module (``report``) and the command line
interface (``command``).
"""
from ._npca import *
from ._npca import __all__

__version__ = "1.0.0"
# vim: set et ts=4 sw=4 :
