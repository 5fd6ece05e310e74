# Copyright The npca developers
#
# npca/report.py - Text reporting
#
# This file is part of the npca project.
#
# SPDX-License-Identifier: Apache-2.0
"""Tabular text and JSON reports for the ``npca`` command.

A report is declared as a list of ``ReportObjType`` entries and a list
of ``FieldType`` columns. The caller picks the columns to show with a
comma-separated list of field names, optionally prefixed with the
object type prefix (``bss_name``), and may sort on any field with
``+name`` (ascending, the default) or ``-name`` (descending). Sort
keys that are not displayed are added as columns.

Output is one aligned line per object, one line per field
(``columns_as_rows``), or a JSON document keyed by the report title.
"""
from dataclasses import dataclass, field
from json import dumps
from typing import Callable, Dict, List, Optional, TextIO
import logging
import sys

from npca import NPCA_DEBUG_REPORT


_log = logging.getLogger(__name__)
_log.set_debug_mask(NPCA_DEBUG_REPORT)

_log_debug = _log.debug
_log_debug_report = _log.debug_masked
_log_info = _log.info
_log_warn = _log.warning
_log_error = _log.error

_DEFAULT_COLUMNS = 80
_DEFAULT_WIDTH = 8

#: Integer column type.
REP_NUM = "num"
#: Floating point column type.
REP_FLOAT = "float"
#: String column type.
REP_STR = "str"

_dtypes = (REP_NUM, REP_FLOAT, REP_STR)
_numeric_dtypes = (REP_NUM, REP_FLOAT)

ALIGN_LEFT = "left"
ALIGN_RIGHT = "right"

_align_types = (ALIGN_LEFT, ALIGN_RIGHT)

ASCENDING = "ascending"
DESCENDING = "descending"

_QUOTE = "'"
_PAIR = "="
_MISSING = "-"

num_types = (int, float)


def _stdout() -> TextIO:
    return sys.stdout


@dataclass
class ReportOpts:
    """Formatting and destination of a report.

    ``field_name_prefix`` switches to ``PREFIXNAME=value`` output,
    quoted unless ``unquoted`` is set. With ``buffered`` false every
    row is written as soon as it is reported.
    """

    columns: int = _DEFAULT_COLUMNS
    headings: bool = True
    buffered: bool = True
    separator: str = " "
    field_name_prefix: str = ""
    unquoted: bool = True
    aligned: bool = True
    json: bool = False
    columns_as_rows: bool = False
    report_file: TextIO = field(default_factory=_stdout)


@dataclass(frozen=True)
class ReportObjType:
    """A kind of object a report has columns for.

    ``data_fn`` extracts the object of this type from the value passed
    to ``Report.report_object()``; ``prefix`` qualifies field names of
    this type.
    """

    objtype: int
    desc: str
    prefix: str
    data_fn: Callable

    def __post_init__(self):
        if not self.objtype or self.objtype < 0:
            raise ValueError("ReportObjType objtype cannot be <= 0.")
        if not self.desc:
            raise ValueError("ReportObjType desc cannot be empty.")


@dataclass
class FieldType:
    """A column that a report may display.

    ``report_fn(field, obj)`` calls one of the ``Field.report_*``
    methods with the value of ``obj`` for this column. String columns
    align left and numeric ones right unless ``align`` says otherwise;
    a width of zero selects the default width.
    """

    objtype: int
    name: str
    head: str
    desc: str
    width: int
    dtype: str
    report_fn: Callable
    align: Optional[str] = None

    def __post_init__(self):
        if not self.objtype:
            raise ValueError("'objtype' must be non-zero")
        if not self.name:
            raise ValueError("'name' is required")
        if self.dtype not in _dtypes:
            raise ValueError(f"Invalid field dtype: {self.dtype}")
        if self.align and self.align not in _align_types:
            raise ValueError(f"Invalid field alignment: {self.align}")
        if self.width < 0:
            raise ValueError("Field width cannot be < 0")
        if not self.align:
            self.align = ALIGN_LEFT if self.dtype == REP_STR else ALIGN_RIGHT
        self.width = self.width or _DEFAULT_WIDTH


@dataclass
class FieldProperties:
    """Per-report state of a displayed column."""

    field_num: int = 0
    width: int = 0
    objtype: Optional[ReportObjType] = None
    dtype: Optional[str] = None
    align: Optional[str] = None
    sort_key: bool = False
    sort_dir: Optional[str] = None
    sort_posn: Optional[int] = None


class Field:
    """One cell: the text shown for a column and the value it sorts by."""

    def __init__(self, report: "Report", props: FieldProperties):
        self.report = report
        self.props = props
        self.report_string = ""
        self.sort_value = None

    def report_str(self, value: str):
        """Set a string cell."""
        if not isinstance(value, str):
            raise TypeError("Value for report_str() must be a string type.")
        self.set_value(value, sort_value=value)

    def report_num(self, value):
        """Set an integer cell; ``None`` shows as ``-`` and sorts as -1.

        :raises: TypeError for a non-numeric value.
        """
        if value is None:
            self.set_value(_MISSING, sort_value=-1)
            return
        if not isinstance(value, num_types):
            raise TypeError("Value for report_num() must be a numeric type.")
        self.set_value(str(value), sort_value=value)

    def report_float(self, value, precision: int = 3):
        """Set a floating point cell shown with ``precision`` decimals.

        ``None`` shows as ``-`` and sorts before every number.

        :raises: TypeError for a non-numeric value.
        """
        if value is None:
            self.set_value(_MISSING, sort_value=float("-inf"))
            return
        if not isinstance(value, num_types):
            raise TypeError("Value for report_float() must be a numeric type.")
        self.set_value(f"{value:.{precision}f}", sort_value=float(value))

    def set_value(self, report_string: str, sort_value=None):
        """Set the cell text and, optionally, a separate sort value."""
        if report_string is None:
            raise ValueError("No value assigned to field.")
        self.report_string = report_string
        self.sort_value = report_string if sort_value is None else sort_value


@dataclass
class Row:
    """The cells of one reported object, in display order."""

    fields: List[Field] = field(default_factory=list)
    sort_fields: List[Optional[Field]] = field(default_factory=list)


class Report:
    """Report()

    Collects rows for the selected columns and writes them out in the
    format chosen by its ``ReportOpts``. ``title`` names the row list
    in JSON output.
    """

    def __init__(
        self,
        types: List[ReportObjType],
        fields: List[FieldType],
        output_fields: Optional[str],
        opts: Optional[ReportOpts],
        sort_keys: Optional[str],
        title: Optional[str],
    ):
        """Initialise a new ``Report``.

        :param types: the object types the fields refer to
        :param fields: every column the report can show
        :param output_fields: comma-separated column names, or ``None``
                              for every column
        :param opts: output options, or ``None`` for the defaults
        :param sort_keys: comma-separated sort keys
        :param title: the report title
        :raises: ValueError for an unknown field or sort key name.
        """
        self.opts: ReportOpts = opts if opts else ReportOpts()
        self.keys_count = 0

        self._fields = fields
        self._types: Dict[int, ReportObjType] = {t.objtype: t for t in types}
        self._title = title or ""
        self._rows: List[Row] = []
        self._field_properties: List[FieldProperties] = []
        self._header_written = False

        # Bare names and prefixed names; the first field of a name wins.
        self._by_name: Dict[str, int] = {}
        for (num, field_type) in enumerate(fields):
            prefix = self._obj_type(field_type.objtype).prefix
            for name in (field_type.name, prefix + field_type.name):
                self._by_name.setdefault(name, num)

        if not output_fields:
            output_fields = ",".join(field_type.name for field_type in fields)

        for name in filter(None, output_fields.split(",")):
            self._add_column(self._lookup(name, "field"))
        for key in filter(None, (sort_keys or "").split(",")):
            self._add_sort_key(key)

    def _obj_type(self, objtype: int) -> ReportObjType:
        try:
            return self._types[objtype]
        except KeyError:
            raise ValueError(f"Unknown report object type: {objtype}") from None

    def _list_fields(self):
        """Write the names of the available fields to the report file."""
        width = max(len(field_type.name) for field_type in self._fields)
        for field_type in self._fields:
            self.opts.report_file.write(
                f"  {field_type.name:{width}} - {field_type.desc} [{field_type.dtype}]\n"
            )

    def _lookup(self, name: str, what: str) -> int:
        if name in self._by_name:
            return self._by_name[name]
        self._list_fields()
        _log_error("Unrecognised %s: %s", what, name)
        if what == "field":
            raise ValueError(f"No matching field name: {name}")
        raise ValueError(f"Unknown sort key name: {name}")

    def _add_column(self, field_num: int) -> FieldProperties:
        field_type = self._fields[field_num]
        props = FieldProperties(
            field_num=field_num,
            width=field_type.width,
            objtype=self._obj_type(field_type.objtype),
            dtype=field_type.dtype,
            align=field_type.align,
        )
        self._field_properties.append(props)
        return props

    def _add_sort_key(self, key: str):
        sort_dir = DESCENDING if key.startswith("-") else ASCENDING
        name = key.lstrip("+-")
        field_num = self._lookup(name, "sort key")
        props = next(
            (p for p in self._field_properties if p.field_num == field_num), None
        )
        if props is None:
            props = self._add_column(field_num)
        if props.sort_key:
            _log_info("Ignoring duplicate sort field: %s", name)
            return
        props.sort_key = True
        props.sort_dir = sort_dir
        props.sort_posn = self.keys_count
        self.keys_count += 1

    def report_object(self, obj):
        """Add a row for ``obj``.

        :raises: ValueError if ``obj`` is ``None`` or a column has no
                 data for it.
        """
        if obj is None:
            raise ValueError("Cannot report NoneType object.")

        row = Row(sort_fields=[None] * self.keys_count)
        for props in self._field_properties:
            field_type = self._fields[props.field_num]
            data = props.objtype.data_fn(obj)
            if data is None:
                raise ValueError(f"No data assigned to field {field_type.name}")
            cell = Field(self, props)
            field_type.report_fn(cell, data)
            row.fields.append(cell)
            if props.sort_key:
                row.sort_fields[props.sort_posn] = cell
            props.width = max(props.width, len(cell.report_string))
        self._rows.append(row)

        if not self.opts.buffered:
            self.report_output()

    def _sort_rows(self):
        # Stable sorts from the least significant key up.
        for posn in reversed(range(self.keys_count)):
            descending = self._rows[0].sort_fields[posn].props.sort_dir == DESCENDING
            self._rows.sort(
                key=lambda row: row.sort_fields[posn].sort_value, reverse=descending
            )

    def _write(self, parts: List[str]):
        self.opts.report_file.write(self.opts.separator.join(parts).strip() + "\n")

    def _cell_text(self, cell: Field) -> str:
        text = cell.report_string
        if self.opts.aligned:
            width = cell.props.width
            fill = "<" if cell.props.align == ALIGN_LEFT else ">"
            text = f"{text: {fill}{width}.{width}}"
        if not self.opts.field_name_prefix:
            return text
        quote = "" if self.opts.unquoted else _QUOTE
        name = self._fields[cell.props.field_num].name.upper()
        return f"{self.opts.field_name_prefix}{name}{_PAIR}{quote}{text}{quote}"

    def _cell_json(self, cell: Field):
        field_type = self._fields[cell.props.field_num]
        name = cell.props.objtype.prefix + field_type.name
        if field_type.dtype not in _numeric_dtypes:
            return (name, cell.report_string)
        return (name, None if cell.report_string == _MISSING else cell.sort_value)

    def _output_as_columns(self):
        if not self._header_written:
            self._header_written = True
            if self.opts.headings:
                self._write([
                    f"{self._fields[p.field_num].head:{p.width}}"
                    if self.opts.aligned else self._fields[p.field_num].head
                    for p in self._field_properties
                ])
        for row in self._rows:
            self._write([self._cell_text(cell) for cell in row.fields])

    def _output_as_rows(self):
        for (num, props) in enumerate(self._field_properties):
            parts = [self._fields[props.field_num].head] if self.opts.headings else []
            parts.extend(self._cell_text(row.fields[num]) for row in self._rows)
            self._write(parts)

    def _output_as_json(self):
        document = {
            self._title: [dict(self._cell_json(cell) for cell in row.fields)
                          for row in self._rows]
        }
        self.opts.report_file.write(dumps(document, indent=4) + "\n")

    def report_output(self):
        """Write the collected rows to the report file.

        Unbuffered reports forget their rows once written.
        """
        if self.keys_count and self._rows:
            self._sort_rows()
        _log_debug_report("writing %d report rows", len(self._rows))
        if self.opts.json:
            self._output_as_json()
        elif self.opts.columns_as_rows:
            self._output_as_rows()
        else:
            self._output_as_columns()
        if not self.opts.buffered:
            self._rows = []


__all__ = [
    # Module constants
    "REP_NUM",
    "REP_FLOAT",
    "REP_STR",
    "ALIGN_LEFT",
    "ALIGN_RIGHT",
    "ASCENDING",
    "DESCENDING",
    # Report objects
    "ReportOpts",
    "ReportObjType",
    "Field",
    "FieldType",
    "FieldProperties",
    "Report",
]

# vim: set et ts=4 sw=4 :
