"""
Test Trace I/O
==============

JSON Lines events in, compact JSON rows out.
"""

import io
import json

import pytest

from src.engine import OutputRow
from src.exceptions import InputError
from src.trace_io import EventDecoder, iter_events, load_trace, read_event_line, write_row, write_trace
from src.values import FALSE, TRUE, enum_value, float_value, int_value, text_value

ONCE = "input bool s\noutput bool once_s = once_s[-1, false] || s"
MIXED = (
    "data SndrState = Get | Send | WaitForAck\n"
    "input SndrState senderState\ninput int n\ninput float x\ninput text label"
)


def test_reads_boolean_events(compile_spec):
    spec = compile_spec(ONCE)
    assert read_event_line('{"s": false}', spec) == {"s": FALSE}


def test_reads_the_alarm_inputs(compile_spec):
    spec = compile_spec("input bool alarm\ninput bool allclear\ninput bool shutdown")
    line = '{"alarm":true,"allclear":false,"shutdown":false}'
    assert read_event_line(line, spec) == {"alarm": TRUE, "allclear": FALSE, "shutdown": FALSE}


def test_reads_every_value_kind(compile_spec):
    spec = compile_spec(MIXED)
    state = spec.stream_type("senderState")
    event = read_event_line('{"senderState":"WaitForAck","n":-4,"x":1,"label":"ok"}', spec)
    assert event == {
        "senderState": enum_value(state, "WaitForAck"),
        "n": int_value(-4),
        "x": float_value(1.0),
        "label": text_value("ok"),
    }
    assert list(event) == ["senderState", "n", "x", "label"]


@pytest.mark.parametrize("line, fragment", [
    ('{"s": 1}', "s:"),
    ('{"s": "true"}', "s:"),
    ("{}", "missing field s"),
    ('{"s": true, "t": 1}', "unknown field t"),
    ('{"s": true', "malformed JSON"),
    ("[true]", "JSON object"),
    ("true", "JSON object"),
])
def test_rejects_bad_lines(compile_spec, line, fragment):
    with pytest.raises(InputError) as info:
        read_event_line(line, compile_spec(ONCE), line_number=4)
    assert fragment in str(info.value)
    assert info.value.line_number == 4
    assert str(info.value).startswith("line 4:")


@pytest.mark.parametrize("line", [
    '{"senderState":"Ack","n":0,"x":0.5,"label":""}',
    '{"senderState":"Get","n":9223372036854775808,"x":0.5,"label":""}',
    '{"senderState":"Get","n":1.5,"x":0.5,"label":""}',
    '{"senderState":"Get","n":0,"x":true,"label":""}',
    '{"senderState":"Get","n":0,"x":0.5,"label":3}',
])
def test_rejects_ill_typed_values(compile_spec, line):
    with pytest.raises(InputError):
        EventDecoder(compile_spec(MIXED)).decode(line)


def test_iter_events_skips_blank_lines_and_counts_them(compile_spec):
    spec = compile_spec(ONCE)
    source = io.StringIO('{"s": true}\n\n  \n{"s": false}')
    assert list(iter_events(source, spec)) == [(1, {"s": TRUE}), (4, {"s": FALSE})]
    with pytest.raises(InputError) as info:
        list(iter_events(io.StringIO('{"s": true}\n\n{"s": 1}\n'), spec))
    assert info.value.line_number == 3


def test_load_trace(compile_spec, tmp_path):
    spec = compile_spec(ONCE)
    path = tmp_path / "trace.jsonl"
    path.write_text(write_trace([{"s": FALSE}, {"s": TRUE}]), encoding="utf-8")
    assert path.read_text(encoding="utf-8") == '{"s":false}\n{"s":true}\n'
    assert load_trace(path, spec) == [{"s": FALSE}, {"s": TRUE}]
    with pytest.raises(InputError):
        load_trace(tmp_path / "missing.jsonl", spec)


def test_write_row_formats(compile_spec):
    assert write_row(OutputRow(1, {"once_s": TRUE})) == '{"instant":1,"once_s":true}'
    assert write_row(OutputRow(0, {})) == '{"instant":0}'
    assert write_row(OutputRow(7, {"smooth_period_width": int_value(50)})) == \
        '{"instant":7,"smooth_period_width":50}'
    state = compile_spec(MIXED).stream_type("senderState")
    row = OutputRow(2, {"st": enum_value(state, "Get"), "label": text_value("é")})
    assert json.loads(write_row(row)) == {"instant": 2, "st": "Get", "label": "é"}
