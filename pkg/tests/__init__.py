# Copyright The npca developers
#
# tests/__init__.py - npca test package initialisation
#
# This file is part of the npca project.
#
# SPDX-License-Identifier: Apache-2.0
from os.path import join, abspath
from os import environ, makedirs
import logging
import shutil
import errno

log = logging.getLogger()
log.setLevel(logging.DEBUG)
formatter = logging.Formatter('%(asctime)s %(levelname)s %(name)s %(message)s')
file_handler = logging.FileHandler("test.log")
file_handler.setFormatter(formatter)
console_handler = logging.StreamHandler()
console_handler.setFormatter(formatter)
console_handler.setLevel(logging.WARNING)
log.addHandler(file_handler)
log.addHandler(console_handler)

# Root of the testing directory
NPCA_ROOT_TEST = abspath("./tests")

# Scenario and configuration file fixtures
SCENARIOS_PATH = join(NPCA_ROOT_TEST, "scenarios")
CONFIGS_PATH = join(NPCA_ROOT_TEST, "npca_configs")

# Location of the temporary sandbox for test data
SANDBOX_PATH = join(NPCA_ROOT_TEST, "sandbox")

# Test sandbox functions

def rm_sandbox():
    """Remove the test sandbox at SANDBOX_PATH.
    """
    try:
        shutil.rmtree(SANDBOX_PATH)
    except OSError as e:
        if e.errno != errno.ENOENT:
            raise


def mk_sandbox():
    """Create a new test sandbox at SANDBOX_PATH.
    """
    makedirs(SANDBOX_PATH)


def reset_sandbox():
    """Reset the test sandbox at SANDBOX_PATH by removing it and
        re-creating the directory.
    """
    rm_sandbox()
    mk_sandbox()


def scenario_path(name):
    """Return the path of the scenario fixture ``name``.
    """
    return join(SCENARIOS_PATH, name)


def relative_error(value, reference):
    """Return ``|value - reference| / |reference|``.
    """
    return abs(value - reference) / abs(reference)


# Test predicates

def have_long_tests():
    """Return ``True`` if the long running validation tests are enabled
        by setting NPCA_LONG_TESTS in the environment, or ``False``
        otherwise.
    """
    return environ.get("NPCA_LONG_TESTS", "") not in ("", "0")


# Mock objects

class MockArgs(object):
    """Mock arguments class for testing npca command line infrastructure.
    """
    command = ""
    config = None
    debug = ""
    duration = None
    engine = None
    format = None
    grid = None
    instances = None
    json = False
    name_prefixes = False
    no_headings = False
    npca = None
    npca_model = None
    options = None
    out = None
    randomize = False
    rows = False
    runs = None
    scenario = None
    seed = None
    separator = ""
    sort = None
    states = False
    trace = None
    verbose = 0
    workers = None


__all__ = [
    'NPCA_ROOT_TEST', 'SCENARIOS_PATH', 'CONFIGS_PATH', 'SANDBOX_PATH',
    'rm_sandbox', 'mk_sandbox', 'reset_sandbox', 'scenario_path',
    'relative_error', 'have_long_tests', 'MockArgs',
]

# vim: set et ts=4 sw=4 :
