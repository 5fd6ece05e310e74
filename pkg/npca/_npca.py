# Copyright The npca developers
#
# npca/_npca.py - npca package initialisation
#
# SPDX-License-Identifier: Apache-2.0
"""This module provides the declarations, classes, and functions exposed
in the main ``npca`` module. Users of npca should not import this module
directly: it will be imported automatically with the top level module.
"""
from os.path import exists as path_exists, expanduser, isabs, isdir, join as path_join
from configparser import ConfigParser
from typing import Iterable, Optional, Tuple
import logging
import errno

#: Width in MHz of one basic channel unit.
UNIT_WIDTH_MHZ = 20

#: Number of basic channel units in the widest supported allocation.
MAX_UNITS = 8

#: Default directory for npca configuration files.
DEFAULT_NPCA_DIR = path_join(expanduser("~"), ".config", "npca")

#: Configuration file mode
NPCA_CONFIG_MODE = 0o644

#: The default configuration file location
NPCA_CONFIG_FILE = "npca.conf"
DEFAULT_NPCA_CONFIG_PATH = path_join(DEFAULT_NPCA_DIR, NPCA_CONFIG_FILE)
__npca_config_path = DEFAULT_NPCA_CONFIG_PATH

#: Output formats understood by the harness writers.
FORMAT_CSV = "csv"
FORMAT_JSON = "json"
OUTPUT_FORMATS = [FORMAT_CSV, FORMAT_JSON]

#: NPCA transmissions complete once per TXOP and the BSS contends again.
NPCA_MODEL_RECONTEND = "recontend"
#: NPCA transmissions last as long as their blocking transmission.
NPCA_MODEL_BLOCKER = "blocker"
NPCA_MODELS = [NPCA_MODEL_RECONTEND, NPCA_MODEL_BLOCKER]

#
# Logging
#

NPCA_LOG_DEBUG = logging.DEBUG
NPCA_LOG_INFO = logging.INFO
NPCA_LOG_WARN = logging.WARNING
NPCA_LOG_ERROR = logging.ERROR

_log_levels = (NPCA_LOG_DEBUG, NPCA_LOG_INFO, NPCA_LOG_WARN, NPCA_LOG_ERROR)

_log = logging.getLogger(__name__)

_log_debug = _log.debug
_log_info = _log.info
_log_warn = _log.warning
_log_error = _log.error

# npca debugging levels
NPCA_DEBUG_PHY = 1
NPCA_DEBUG_CTMC = 2
NPCA_DEBUG_TRAJECTORY = 4
NPCA_DEBUG_DES = 8
NPCA_DEBUG_HARNESS = 16
NPCA_DEBUG_REPORT = 32
NPCA_DEBUG_COMMAND = 64
NPCA_DEBUG_ALL = (
    NPCA_DEBUG_PHY
    | NPCA_DEBUG_CTMC
    | NPCA_DEBUG_TRAJECTORY
    | NPCA_DEBUG_DES
    | NPCA_DEBUG_HARNESS
    | NPCA_DEBUG_REPORT
    | NPCA_DEBUG_COMMAND
)

__debug_mask = 0


class NpcaError(Exception):
    """Base class of all npca exceptions."""

    pass


class NpcaLogger(logging.Logger):
    """NpcaLogger()

    npca logging wrapper class: wrap the Logger.debug() method
    to allow filtering of submodule debug messages by log mask.

    Each sub-module logger carries one ``NPCA_DEBUG_*`` bit and its
    masked debug messages are emitted only while that bit is set in
    the package debug mask.
    """

    mask_bits = 0

    def set_debug_mask(self, mask_bits: int):
        """Set the debug mask for this ``NpcaLogger``.

        This should normally be set to the ``NPCA_DEBUG_*`` value
        corresponding to the ``npca`` sub-module that this instance
        of ``NpcaLogger`` belongs to.

        :param mask_bits: The bits to set in this logger's mask.
        :rtype: None
        """
        if mask_bits < 0 or mask_bits > NPCA_DEBUG_ALL:
            raise ValueError(
                f"Invalid NpcaLogger mask bits: 0x{mask_bits & ~NPCA_DEBUG_ALL:x}"
            )

        self.mask_bits = mask_bits

    def debug_masked(self, msg: str, *args, **kwargs):
        """Log a debug message if it passes the current debug mask.

        :param msg: the message to be logged
        :rtype: None
        """
        if self.mask_bits & get_debug_mask():
            self.debug(msg, *args, **kwargs)


logging.setLoggerClass(NpcaLogger)


def get_debug_mask() -> int:
    """Return the current debug mask for the ``npca`` package.

    :returns: The current debug mask value
    :rtype: int
    """
    return __debug_mask


def set_debug_mask(mask: int):
    """Set the debug mask for the ``npca`` package.

    :param mask: the logical OR of the ``NPCA_DEBUG_*``
                 values to log.
    :rtype: None
    """
    global __debug_mask
    if mask < 0 or mask > NPCA_DEBUG_ALL:
        raise ValueError(f"Invalid npca debug mask: {mask}")
    __debug_mask = mask


class NpcaConfig:
    """Class representing npca persistent configuration values."""

    # Initialise members from global defaults

    seed = 1
    output_format = FORMAT_CSV
    workers = 1

    npca_model = NPCA_MODEL_RECONTEND

    des_duration = 10.0
    des_runs = 5

    def __str__(self) -> str:
        """Return a string representation of this ``NpcaConfig`` in
        npca.conf (INI) notation.
        """
        cstr = ""
        cstr += "[global]\n"
        cstr += f"seed = {self.seed}\n"
        cstr += f"format = {self.output_format}\n"
        cstr += f"workers = {self.workers}\n\n"

        cstr += "[ctmc]\n"
        cstr += f"npca_model = {self.npca_model}\n\n"

        cstr += "[des]\n"
        cstr += f"duration = {self.des_duration}\n"
        cstr += f"runs = {self.des_runs}\n"

        return cstr

    def __repr__(self) -> str:
        """Return a string representation of this ``NpcaConfig`` in
        NpcaConfig initialiser notation.
        """
        cstr = f'NpcaConfig(seed={self.seed}, output_format="{self.output_format}", '
        cstr += f'workers={self.workers}, npca_model="{self.npca_model}", '
        cstr += f"des_duration={self.des_duration}, des_runs={self.des_runs})"
        return cstr

    def __init__(
        self,
        seed: Optional[int] = None,
        output_format: Optional[str] = None,
        workers: Optional[int] = None,
        npca_model: Optional[str] = None,
        des_duration: Optional[float] = None,
        des_runs: Optional[int] = None,
    ):
        """Initialise a new ``NpcaConfig`` object with the supplied
        configuration values, or defaults for any unset arguments.

        :param seed: the default base seed for stochastic engines
        :param output_format: the default result file format
        :param workers: the number of Monte Carlo worker processes
        :param npca_model: the CTMC NPCA completion model
        :param des_duration: the default simulated time per DES run
        :param des_runs: the number of DES replicas in validation mode
        """
        self.seed = seed if seed is not None else self.seed
        self.output_format = output_format or self.output_format
        self.workers = workers or self.workers
        self.npca_model = npca_model or self.npca_model
        self.des_duration = des_duration or self.des_duration
        self.des_runs = des_runs or self.des_runs
        self._cfg: Optional[ConfigParser] = None


__config = NpcaConfig()


def set_npca_config(config: NpcaConfig):
    """Set the active configuration to the object ``config`` (which may
    be any class that includes the ``NpcaConfig`` attributes).

    :param config: a configuration object
    :returns: None
    :raises: TypeError if ``config`` does not appear to have the
             correct attributes.
    """
    global __config

    def has_value(obj, attr):
        return hasattr(obj, attr) and getattr(obj, attr) is not None

    if not (has_value(config, "seed") and has_value(config, "npca_model")):
        raise TypeError("config does not appear to be a NpcaConfig object.")

    __config = config


def get_npca_config() -> NpcaConfig:
    """Return the active ``NpcaConfig`` object.

    :rtype: NpcaConfig
    :returns: the active configuration object
    """
    return __config


def get_npca_config_path() -> str:
    """Return the currently configured npca configuration file path.

    :rtype: str
    :returns: the current npca configuration file path
    """
    return __npca_config_path


def set_npca_config_path(path: str):
    """Set the npca configuration file path.

    :param path: a configuration file, or a directory containing
                 ``npca.conf``.
    :raises: IOError if the resulting path does not exist.
    """
    global __npca_config_path
    path = path or get_npca_config_path()
    if not isabs(path):
        path = path_join(DEFAULT_NPCA_DIR, path)
    if isdir(path):
        path = path_join(path, NPCA_CONFIG_FILE)
    if not path_exists(path):
        raise IOError(errno.ENOENT, f"File not found: '{path}'")
    __npca_config_path = path
    _log_debug("set npca_config_path to '%s'", path)


#
# Spectrum occupancy
#


class BandSet:
    """BandSet()

    A set of contiguous basic 20 MHz channel units. Unit ``0`` is the
    lowest 20 MHz channel of the widest (160 MHz) allocation, so the
    two 80 MHz halves are units ``0-3`` and ``4-7``.

    ``BandSet`` objects are immutable and hashable: they are used as
    dictionary keys in state spaces and as the currency of every
    occupancy test in the simulators.
    """

    __slots__ = ("_units",)

    def __init__(self, units: Iterable[int]):
        """Initialise a new ``BandSet`` from an iterable of unit indices.

        :param units: the channel unit indices in the band.
        :raises: ValueError if the band is empty, not contiguous or out
                 of range.
        """
        units = tuple(sorted(set(int(u) for u in units)))
        if not units:
            raise ValueError("BandSet cannot be empty")
        if units[0] < 0 or units[-1] >= MAX_UNITS:
            raise ValueError(f"BandSet units out of range: {units}")
        if units[-1] - units[0] + 1 != len(units):
            raise ValueError(f"BandSet units are not contiguous: {units}")
        self._units = units

    @classmethod
    def span(cls, first: int, count: int) -> "BandSet":
        """Return the ``BandSet`` of ``count`` units starting at ``first``."""
        return cls(range(first, first + count))

    @property
    def units(self) -> Tuple[int, ...]:
        return self._units

    @property
    def first(self) -> int:
        return self._units[0]

    @property
    def width(self) -> int:
        """The width of this band in MHz."""
        return UNIT_WIDTH_MHZ * len(self._units)

    def is_aligned(self) -> bool:
        """Return ``True`` if this band is a valid dyadic channel: a
        power of two units wide and starting at a multiple of its own
        size.
        """
        size = len(self._units)
        return size & (size - 1) == 0 and self.first % size == 0

    def overlaps(self, other: "BandSet") -> bool:
        return not set(self._units).isdisjoint(other.units)

    def issubset(self, other: "BandSet") -> bool:
        return set(self._units).issubset(other.units)

    def halves(self) -> Tuple["BandSet", "BandSet"]:
        """Split this band into its lower and upper halves.

        :raises: ValueError for a single unit band.
        """
        size = len(self._units)
        if size < 2:
            raise ValueError(f"Cannot split a {self.width} MHz band")
        return (
            BandSet(self._units[: size // 2]),
            BandSet(self._units[size // 2 :]),
        )

    def aligned_blocks(self, unit: int):
        """Yield the aligned sub-bands of this band that contain ``unit``,
        widest first.
        """
        size = len(self._units)
        while size >= 1:
            start = unit - (unit - self.first) % size
            block = BandSet.span(start, size)
            if block.issubset(self) and block.is_aligned():
                yield block
            size //= 2

    def __contains__(self, unit: int) -> bool:
        return unit in self._units

    def __iter__(self):
        return iter(self._units)

    def __len__(self) -> int:
        return len(self._units)

    def __eq__(self, other) -> bool:
        return isinstance(other, BandSet) and self._units == other.units

    def __lt__(self, other: "BandSet") -> bool:
        return self._units < other.units

    def __hash__(self) -> int:
        return hash(self._units)

    def __str__(self) -> str:
        if len(self._units) == 1:
            return f"{self.first}"
        return f"{self._units[0]}-{self._units[-1]}"

    def __repr__(self) -> str:
        return f"BandSet({list(self._units)})"


__all__ = [
    # Module constants
    "UNIT_WIDTH_MHZ",
    "MAX_UNITS",
    "DEFAULT_NPCA_DIR",
    "NPCA_CONFIG_MODE",
    "NPCA_CONFIG_FILE",
    "DEFAULT_NPCA_CONFIG_PATH",
    "FORMAT_CSV",
    "FORMAT_JSON",
    "OUTPUT_FORMATS",
    "NPCA_MODEL_RECONTEND",
    "NPCA_MODEL_BLOCKER",
    "NPCA_MODELS",
    # Configuration
    "NpcaConfig",
    "set_npca_config",
    "get_npca_config",
    "get_npca_config_path",
    "set_npca_config_path",
    # Exception classes
    "NpcaError",
    # Logger class
    "NpcaLogger",
    # Debug logging
    "get_debug_mask",
    "set_debug_mask",
    "NPCA_DEBUG_PHY",
    "NPCA_DEBUG_CTMC",
    "NPCA_DEBUG_TRAJECTORY",
    "NPCA_DEBUG_DES",
    "NPCA_DEBUG_HARNESS",
    "NPCA_DEBUG_REPORT",
    "NPCA_DEBUG_COMMAND",
    "NPCA_DEBUG_ALL",
    # Spectrum
    "BandSet",
]

# vim: set et ts=4 sw=4 :
