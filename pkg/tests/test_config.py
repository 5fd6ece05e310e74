# Copyright The npca developers
#
# tests/test_config.py - npca persistent configuration tests.
#
# This file is part of the npca project.
#
# SPDX-License-Identifier: Apache-2.0
import unittest
import logging
from configparser import ConfigParser
from os.path import join
import shutil


log = logging.getLogger()

# Test suite paths
from tests import *

import npca
from npca import *
from npca.config import *


class ConfigBasicTests(unittest.TestCase):
    """Basic tests for the npca.config sub-module.
    """

    def setUp(self):
        log.info("Preparing %s", self._testMethodName)

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)

    def test_sync_config(self):
        """Test that the internal _sync_config() helper works.
        """
        import npca.config # for _sync_config()
        cfg = ConfigParser()
        nc = NpcaConfig()

        cfg.add_section("global")

        nc.seed = 0
        nc.output_format = "json"
        nc.npca_model = "blocker"
        nc.des_runs = 9

        npca.config._sync_config(nc, cfg)
        self.assertEqual(cfg.get("global", "seed"), "0")
        self.assertEqual(cfg.get("global", "format"), "json")
        self.assertEqual(cfg.get("ctmc", "npca_model"), "blocker")
        self.assertEqual(cfg.get("des", "runs"), "9")
        self.assertEqual(cfg.get("des", "duration"), "10.0")


class ConfigTestsBase(unittest.TestCase):
    # The configuration file to use for this test class
    conf_file = join(CONFIGS_PATH, "npca.conf")

    # The path to the sandbox npca.conf configuration file
    npca_conf = join(SANDBOX_PATH, "npca.conf")

    def setUp(self):
        """Set up a test fixture for the ConfigTests class.
        """
        log.info("Preparing %s", self._testMethodName)

        reset_sandbox()

        self.old_path = get_npca_config_path()
        shutil.copy(self.conf_file, self.npca_conf)
        set_npca_config_path(SANDBOX_PATH)

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)

        rm_sandbox()
        setattr(npca._npca, "__npca_config_path", self.old_path)
        set_npca_config(NpcaConfig())


class ConfigTests(ConfigTestsBase):
    def test_get_npca_config_path(self):
        """Test that the sandbox npca.conf path is returned from a call
            to the `get_npca_config_path()` function.
        """
        self.assertEqual(get_npca_config_path(), self.npca_conf)

    def test_load_npca_config_default(self):
        """Test the `load_npca_config()` function with the configured
            configuration file.
        """
        nc = load_npca_config()
        self.assertEqual(nc.seed, 7)
        self.assertEqual(nc.output_format, "json")
        self.assertEqual(nc.workers, 2)
        self.assertEqual(nc.npca_model, "blocker")
        self.assertEqual(nc.des_duration, 2.5)
        self.assertEqual(nc.des_runs, 3)
        self.assertIs(get_npca_config(), nc)

    def test_write_npca_config_round_trip(self):
        """Test that values written with `write_npca_config()` are read
            back unchanged.
        """
        nc = load_npca_config()
        nc.seed = 99
        nc.des_runs = 1
        write_npca_config(nc)
        again = load_npca_config()
        self.assertEqual(again.seed, 99)
        self.assertEqual(again.des_runs, 1)
        self.assertEqual(again.npca_model, "blocker")

    def test_write_npca_config_new(self):
        """Test writing a configuration that was not read from disk.
        """
        path = join(SANDBOX_PATH, "other.conf")
        write_npca_config(NpcaConfig(seed=3), path)
        nc = load_npca_config(path)
        self.assertEqual(nc.seed, 3)
        self.assertEqual(nc.output_format, "csv")


class BadConfigTests(ConfigTestsBase):
    def _load(self, name):
        return load_npca_config(join(CONFIGS_PATH, name))

    def test_load_npca_config_no_global_raises(self):
        with self.assertRaises(ValueError) as cm:
            self._load("no_global.conf")

    def test_load_npca_config_bad_format_raises(self):
        with self.assertRaises(NpcaConfigError) as cm:
            self._load("bad_format.conf")

    def test_load_npca_config_bad_seed_raises(self):
        with self.assertRaises(NpcaConfigError) as cm:
            self._load("bad_seed.conf")

# vim: set et ts=4 sw=4 :
