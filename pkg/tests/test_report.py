# Copyright The npca developers
#
# tests/test_report.py - report API tests.
#
# This file is part of the npca project.
#
# SPDX-License-Identifier: Apache-2.0
import unittest
import logging
import json
from io import StringIO

log = logging.getLogger()

import npca.report

from npca.report import (
    REP_NUM,
    REP_FLOAT,
    REP_STR,
    ALIGN_LEFT,
    ALIGN_RIGHT,
    ReportOpts,
    ReportObjType,
    FieldType,
    Report,
)

_report_objs = [
    ("A", 210.195, 3268),
    ("B", 47.622, 3301),
    ("D", None, 12),
]

PR_BSS = 1

_test_obj_types = [
    ReportObjType(PR_BSS, "Bss", "bss_", lambda o: o),
]

_test_fields = [
    FieldType(PR_BSS, "name", "Name", "BSS name", 8, REP_STR,
              lambda f, d: f.report_str(d[0])),
    FieldType(PR_BSS, "tput", "Mbps", "Throughput", 8, REP_FLOAT,
              lambda f, d: f.report_float(d[1])),
    FieldType(PR_BSS, "attempts", "Attempts", "Access attempts", 8, REP_NUM,
              lambda f, d: f.report_num(d[2])),
]


def _run_report(opts, output_fields="name,tput,attempts", sort_keys=None, title=None):
    pr = Report(_test_obj_types, _test_fields, output_fields, opts, sort_keys, title)
    for obj in _report_objs:
        pr.report_object(obj)
    pr.report_output()


class ReportTests(unittest.TestCase):
    def setUp(self):
        log.info("Preparing %s", self._testMethodName)

    def tearDown(self):
        log.info("Tearing down %s", self._testMethodName)

    def test_ReportObjType_bad_objtype(self):
        with self.assertRaises(ValueError):
            ReportObjType(0, "Bss", "bss_", lambda o: o)

    def test_ReportObjType_no_desc(self):
        with self.assertRaises(ValueError):
            ReportObjType(PR_BSS, "", "bss_", lambda o: o)

    def test_FieldType_no_type(self):
        with self.assertRaises(ValueError):
            FieldType(0, None, "None", "Nothing", 0, REP_NUM, lambda x: x)

    def test_FieldType_no_name(self):
        with self.assertRaises(ValueError):
            FieldType(PR_BSS, None, "None", "Nothing", 0, REP_NUM, lambda x: x)

    def test_FieldType_bogus_dtype_raises(self):
        with self.assertRaises(ValueError):
            FieldType(PR_BSS, "none", "None", "Nothing", 0, "fzzrt", lambda x: x)

    def test_FieldType_default_align(self):
        pf_str = FieldType(PR_BSS, "s", "S", "Nothing", 0, REP_STR, lambda x: x)
        pf_flt = FieldType(PR_BSS, "f", "F", "Nothing", 0, REP_FLOAT, lambda x: x)
        self.assertEqual(pf_str.align, ALIGN_LEFT)
        self.assertEqual(pf_flt.align, ALIGN_RIGHT)
        self.assertEqual(pf_flt.width, 8)

    def test_FieldType_bogus_align_raises(self):
        with self.assertRaises(ValueError):
            FieldType(PR_BSS, "none", "None", "Nothing", 0, REP_NUM, lambda x: x,
                      align="qux")

    def test_FieldType_negative_width_raises(self):
        with self.assertRaises(ValueError) as cm:
            FieldType(PR_BSS, "none", "None", "Nothing", -1, REP_NUM, lambda x: x)

    def test_ReportOpts_eq(self):
        self.assertEqual(ReportOpts(), ReportOpts())
        self.assertNotEqual(ReportOpts(json=True), ReportOpts())
        self.assertNotEqual(ReportOpts(), "opts")

    def test_report_columns(self):
        output = StringIO()
        _run_report(ReportOpts(report_file=output))
        xoutput = (
            "Name     Mbps     Attempts\n"
            "A         210.195     3268\n"
            "B          47.622     3301\n"
            "D               -       12\n"
        )
        self.assertEqual(output.getvalue(), xoutput)

    def test_report_default_fields(self):
        output = StringIO()
        _run_report(ReportOpts(report_file=output), output_fields=None)
        self.assertTrue(output.getvalue().startswith("Name     Mbps     Attempts\n"))

    def test_report_prefixed_field_name(self):
        output = StringIO()
        _run_report(ReportOpts(headings=False, report_file=output),
                    output_fields="bss_name,,bss_tput")
        xoutput = (
            "A         210.195\n"
            "B          47.622\n"
            "D               -\n"
        )
        self.assertEqual(output.getvalue(), xoutput)

    def test_report_sort_descending(self):
        output = StringIO()
        _run_report(ReportOpts(headings=False, report_file=output),
                    output_fields="name,tput", sort_keys="-tput")
        xoutput = (
            "A         210.195\n"
            "B          47.622\n"
            "D               -\n"
        )
        self.assertEqual(output.getvalue(), xoutput)

    def test_report_sort_ascending_hidden_key(self):
        output = StringIO()
        _run_report(ReportOpts(headings=False, report_file=output),
                    output_fields="name", sort_keys="+attempts")
        lines = output.getvalue().splitlines()
        self.assertEqual([line.split()[0] for line in lines], ["D", "A", "B"])

    def test_report_columns_as_rows(self):
        output = StringIO()
        _run_report(ReportOpts(columns_as_rows=True, report_file=output),
                    output_fields="name,attempts")
        xoutput = (
            "Name A        B        D\n"
            "Attempts     3268     3301       12\n"
        )
        self.assertEqual(output.getvalue(), xoutput)

    def test_report_json(self):
        output = StringIO()
        _run_report(ReportOpts(json=True, report_file=output), title="bsses")
        document = json.loads(output.getvalue())
        self.assertEqual(
            document["bsses"][0],
            {"bss_name": "A", "bss_tput": 210.195, "bss_attempts": 3268},
        )
        self.assertIsNone(document["bsses"][2]["bss_tput"])

    def test_report_name_prefix_quoted(self):
        output = StringIO()
        opts = ReportOpts(headings=False, aligned=False, unquoted=False,
                          field_name_prefix="NPCA_", report_file=output)
        _run_report(opts, output_fields="name,attempts")
        first = output.getvalue().splitlines()[0]
        self.assertEqual(first, "NPCA_NAME='A' NPCA_ATTEMPTS='3268'")

    def test_report_unbuffered(self):
        output = StringIO()
        pr = Report(_test_obj_types, _test_fields, "name",
                    ReportOpts(buffered=False, headings=False, report_file=output),
                    None, None)
        pr.report_object(_report_objs[0])
        self.assertEqual(output.getvalue(), "A\n")

    def test_report_bad_field_raises(self):
        output = StringIO()
        with self.assertRaises(ValueError) as cm:
            _run_report(ReportOpts(report_file=output), output_fields="name,qux")
        self.assertIn("  tput", output.getvalue())

    def test_report_bad_sort_key_raises(self):
        output = StringIO()
        with self.assertRaises(ValueError) as cm:
            _run_report(ReportOpts(report_file=output), sort_keys="qux")
        self.assertEqual(str(cm.exception), "Unknown sort key name: qux")

    def test_report_none_object_raises(self):
        pr = Report(_test_obj_types, _test_fields, "name", ReportOpts(), None, None)
        with self.assertRaises(ValueError) as cm:
            pr.report_object(None)

    def test_report_num_bad_type_raises(self):
        pf = FieldType(PR_BSS, "n", "N", "Nothing", 0, REP_NUM,
                       lambda f, d: f.report_num("many"))
        pr = Report(_test_obj_types, [pf], "n", ReportOpts(), None, None)
        with self.assertRaises(TypeError) as cm:
            pr.report_object(_report_objs[0])

    def test_report_float_precision(self):
        output = StringIO()
        pf = FieldType(PR_BSS, "p", "P", "Nothing", 0, REP_FLOAT,
                       lambda f, d: f.report_float(d[1], precision=1))
        pr = Report(_test_obj_types, [pf], "p",
                    ReportOpts(headings=False, aligned=False, report_file=output),
                    None, None)
        pr.report_object(_report_objs[1])
        pr.report_output()
        self.assertEqual(output.getvalue(), "47.6\n")

# vim: set et ts=4 sw=4 :
