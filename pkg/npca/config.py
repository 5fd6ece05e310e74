# Copyright The npca developers
#
# npca/config.py - npca persistent configuration
#
# This file is part of the npca project.
#
# SPDX-License-Identifier: Apache-2.0
"""The ``npca.config`` module reads and writes the persistent (on-disk)
configuration of the npca library and tools.

The configuration file uses INI notation::

    [global]
    seed = 1
    format = csv
    workers = 1

    [ctmc]
    npca_model = recontend

    [des]
    duration = 10.0
    runs = 5
"""
from os.path import dirname

from os import fdopen, rename, chmod, fdatasync, unlink
from configparser import ConfigParser, ParsingError
from tempfile import mkstemp
from typing import Optional
import logging

from npca import (
    NPCA_CONFIG_MODE,
    NPCA_MODELS,
    OUTPUT_FORMATS,
    NpcaConfig,
    NpcaError,
    get_npca_config_path,
    get_npca_config,
    set_npca_config,
)


class NpcaConfigError(NpcaError):
    """Base class for npca configuration errors."""

    pass


# Module logging configuration
_log = logging.getLogger(__name__)

_log_debug = _log.debug
_log_info = _log.info
_log_warn = _log.warning
_log_error = _log.error

#
# Constants for configuration sections and options: to add a new option,
# create a new _CFG_* constant giving the name of the option and add a
# hook to _read_npca_config() to set the value when read.
#
_CFG_SECT_GLOBAL = "global"
_CFG_SECT_CTMC = "ctmc"
_CFG_SECT_DES = "des"
_CFG_SEED = "seed"
_CFG_FORMAT = "format"
_CFG_WORKERS = "workers"
_CFG_NPCA_MODEL = "npca_model"
_CFG_DES_DURATION = "duration"
_CFG_DES_RUNS = "runs"


def _get_typed(cfg: ConfigParser, section: str, option: str, conv, path: str):
    value = cfg.get(section, option)
    try:
        return conv(value)
    except ValueError as err:
        raise NpcaConfigError(
            f"Invalid value for {section}.{option} in {path}: '{value}'"
        ) from err


def _read_npca_config(path: Optional[str] = None) -> NpcaConfig:
    """Read npca persistent configuration values from the defined path
    and return them as an ``NpcaConfig`` object.

    :param path: the configuration file to read, or None to read the
                 currently configured config file path.

    :rtype: NpcaConfig
    :raises: ValueError if the ``global`` section is missing,
             NpcaConfigError for malformed values.
    """
    path = path or get_npca_config_path()
    _log_debug("reading npca configuration from '%s'", path)
    cfg = ConfigParser()
    try:
        cfg.read(path)
    except ParsingError as e:
        _log_error("Failed to parse configuration file '%s': %s", path, e)
        raise NpcaConfigError(f"Failed to parse configuration file {path}") from e

    nc = NpcaConfig()

    if not cfg.has_section(_CFG_SECT_GLOBAL):
        raise ValueError(f"Missing 'global' section in {path}")

    if cfg.has_option(_CFG_SECT_GLOBAL, _CFG_SEED):
        _log_debug("Found global.seed")
        nc.seed = _get_typed(cfg, _CFG_SECT_GLOBAL, _CFG_SEED, int, path)
    if cfg.has_option(_CFG_SECT_GLOBAL, _CFG_FORMAT):
        _log_debug("Found global.format")
        nc.output_format = cfg.get(_CFG_SECT_GLOBAL, _CFG_FORMAT)
        if nc.output_format not in OUTPUT_FORMATS:
            raise NpcaConfigError(
                f"Unknown output format in {path}: '{nc.output_format}'"
            )
    if cfg.has_option(_CFG_SECT_GLOBAL, _CFG_WORKERS):
        _log_debug("Found global.workers")
        nc.workers = _get_typed(cfg, _CFG_SECT_GLOBAL, _CFG_WORKERS, int, path)
        if nc.workers < 1:
            raise NpcaConfigError(f"global.workers must be at least 1 in {path}")

    if cfg.has_section(_CFG_SECT_CTMC):
        if cfg.has_option(_CFG_SECT_CTMC, _CFG_NPCA_MODEL):
            _log_debug("Found ctmc.npca_model")
            nc.npca_model = cfg.get(_CFG_SECT_CTMC, _CFG_NPCA_MODEL)
            if nc.npca_model not in NPCA_MODELS:
                raise NpcaConfigError(
                    f"Unknown NPCA model in {path}: '{nc.npca_model}'"
                )

    if cfg.has_section(_CFG_SECT_DES):
        if cfg.has_option(_CFG_SECT_DES, _CFG_DES_DURATION):
            _log_debug("Found des.duration")
            nc.des_duration = _get_typed(
                cfg, _CFG_SECT_DES, _CFG_DES_DURATION, float, path
            )
        if cfg.has_option(_CFG_SECT_DES, _CFG_DES_RUNS):
            _log_debug("Found des.runs")
            nc.des_runs = _get_typed(cfg, _CFG_SECT_DES, _CFG_DES_RUNS, int, path)

    _log_debug("read configuration: %s", repr(nc))
    nc._cfg = cfg
    return nc


def load_npca_config(path: Optional[str] = None) -> NpcaConfig:
    """Load npca persistent configuration values from the defined path
    and make them the active configuration.

    :param path: the configuration file to read, or None to read the
                 currently configured config file path

    :rtype: NpcaConfig
    """
    nc = _read_npca_config(path=path)
    set_npca_config(nc)
    return nc


def _sync_config(nc: NpcaConfig, cfg: ConfigParser):
    """Sync the configuration values of ``NpcaConfig`` object ``nc`` to
    the ``ConfigParser`` ``cfg``.
    """
    for section in (_CFG_SECT_GLOBAL, _CFG_SECT_CTMC, _CFG_SECT_DES):
        if not cfg.has_section(section):
            cfg.add_section(section)
    cfg.set(_CFG_SECT_GLOBAL, _CFG_SEED, str(nc.seed))
    cfg.set(_CFG_SECT_GLOBAL, _CFG_FORMAT, nc.output_format)
    cfg.set(_CFG_SECT_GLOBAL, _CFG_WORKERS, str(nc.workers))
    cfg.set(_CFG_SECT_CTMC, _CFG_NPCA_MODEL, nc.npca_model)
    cfg.set(_CFG_SECT_DES, _CFG_DES_DURATION, str(nc.des_duration))
    cfg.set(_CFG_SECT_DES, _CFG_DES_RUNS, str(nc.des_runs))


def __make_config(nc: NpcaConfig) -> NpcaConfig:
    """Create a new ``ConfigParser`` corresponding to the ``NpcaConfig``
    object ``nc`` and return the result.
    """
    cfg = ConfigParser()
    _sync_config(nc, cfg)
    nc._cfg = cfg
    return nc


def write_npca_config(config: Optional[NpcaConfig] = None, path: Optional[str] = None):
    """Write npca configuration to disk.

    :param config: the configuration values to write, or None to
                   write the current configuration
    :param path: the configuration file to write, or None to write the
                 currently configured config file path

    :rtype: None
    """
    path = path or get_npca_config_path()
    cfg_dir = dirname(path)
    (tmp_fd, tmp_path) = mkstemp(prefix="npca", dir=cfg_dir)

    config = config or get_npca_config()

    if not config._cfg:
        __make_config(config)
    else:
        _sync_config(config, config._cfg)

    with fdopen(tmp_fd, "w") as f_tmp:
        config._cfg.write(f_tmp)
        fdatasync(tmp_fd)

    try:
        rename(tmp_path, path)
        chmod(path, NPCA_CONFIG_MODE)
    except Exception as e:
        _log_error("Error writing configuration file %s: %s", path, e)
        try:
            unlink(tmp_path)
        except Exception:
            _log_error("Error unlinking temporary path %s", tmp_path)
        raise e


__all__ = [
    "NpcaConfigError",
    # Configuration file handling
    "load_npca_config",
    "write_npca_config",
]

# vim: set et ts=4 sw=4 :
