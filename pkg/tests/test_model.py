"""Parser and data-model tests."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracesim import (
    Frame,
    MalformedReport,
    StackTrace,
    frame_token,
    load_corpus,
    parse_report,
    save_corpus,
    to_java_text,
)
from tracesim.model import (
    CrashReport,
    parse_corpus_text,
    report_from_dict,
    report_to_dict,
    split_raw_reports,
)


def test_parse_standard_report():
    report = parse_report(
        "java.lang.NullPointerException: boom\n\tat com.example.Foo.bar(Foo.java:42)"
    )
    trace = report.trace
    assert trace.exception_type == "java.lang.NullPointerException"
    assert trace.message == "boom"
    assert trace.frames == (Frame("com.example.Foo.bar", "Foo.java", 42),)


def test_parse_unknown_source_frame():
    report = parse_report("java.lang.Error\n\tat A.b(Unknown Source)")
    assert report.trace.exception_type == "java.lang.Error"
    assert report.trace.message is None
    assert report.trace.frames == (Frame("A.b", None, None),)


def test_parse_native_method_and_file_only():
    text = (
        "java.lang.Error: x\n"
        "\tat A.b(Native Method)\n"
        "\tat C.d(C.java)\n"
        "\tat E.f(E.java:9) ~[app.jar:?]\n"
    )
    frames = parse_report(text).trace.frames
    assert frames[0] == Frame("A.b", None, None)
    assert frames[1] == Frame("C.d", "C.java", None)
    assert frames[2] == Frame("E.f", "E.java", 9)


def test_parse_no_frames_raises_with_line_number():
    with pytest.raises(MalformedReport) as excinfo:
        parse_report("java.lang.Error: nothing here\njust text")
    assert "line 1" in str(excinfo.value)


def test_parse_caused_by_truncated():
    text = (
        "java.lang.RuntimeException: outer\n"
        "\tat a.B.c(B.java:1)\n"
        "\tat d.E.f(E.java:2)\n"
        "Caused by: java.lang.IllegalStateException: inner\n"
        "\tat g.H.i(H.java:3)\n"
        "\t... 12 more\n"
    )
    trace = parse_report(text).trace
    assert [f.qualifier for f in trace.frames] == ["a.B.c", "d.E.f"]
    assert trace.exception_type == "java.lang.RuntimeException"


def test_parse_thread_prefix_header():
    text = 'Exception in thread "main" java.lang.IllegalStateException: bad\n\tat a.B.c(B.java:1)'
    trace = parse_report(text).trace
    assert trace.exception_type == "java.lang.IllegalStateException"
    assert trace.message == "bad"


def test_parse_preamble_lines_ignored():
    text = (
        "Product: Example 2024.1\n"
        "OS: Linux\n"
        "\n"
        "java.io.IOException: disk\n"
        "\tat a.B.c(B.java:1)\n"
    )
    trace = parse_report(text).trace
    assert trace.exception_type == "java.io.IOException"
    assert trace.message == "disk"


def test_parse_negative_line_dropped():
    trace = parse_report("e.T: x\n\tat a.B.c(B.java:-1)").trace
    assert trace.frames[0] == Frame("a.B.c", "B.java", None)


def test_frame_token_ignores_file_and_line():
    f1 = Frame("com.example.Foo.bar", "Foo.java", 42)
    f2 = Frame("com.example.Foo.bar", "Other.java", 7)
    f3 = Frame("com.example.Foo.baz", "Foo.java", 42)
    assert frame_token(f1) == "com.example.Foo.bar"
    assert frame_token(f1) == frame_token(f2)
    assert frame_token(f1) != frame_token(f3)


def test_frame_validation():
    with pytest.raises(ValueError):
        Frame("")
    with pytest.raises(ValueError):
        Frame("has space.Q.r")
    with pytest.raises(ValueError):
        Frame("a.B.c", line=-3)


_qualifiers = st.from_regex(r"[a-z]{1,3}\.[A-Z][a-z]{0,2}\.[a-z]{1,4}", fullmatch=True)


@st.composite
def reports(draw):
    tokens = draw(st.lists(_qualifiers, min_size=1, max_size=8))
    message = draw(st.one_of(st.none(), st.text(alphabet="abc xyz", min_size=1, max_size=12).map(str.strip).filter(bool)))
    with_file = draw(st.booleans())
    frames = tuple(
        Frame(t, f"{t.split('.')[1]}.java" if with_file else None, i + 1 if with_file else None)
        for i, t in enumerate(tokens)
    )
    trace = StackTrace(frames, "java.lang.RuntimeException", message)
    return CrashReport(draw(st.text(alphabet="abcdef0123456789", min_size=1, max_size=8)), trace)


@given(reports())
@settings(max_examples=80)
def test_raw_text_round_trip_preserves_frames(report):
    parsed = parse_report(to_java_text(report))
    assert [f.qualifier for f in parsed.trace.frames] == [
        f.qualifier for f in report.trace.frames
    ]
    assert parsed.trace.exception_type == report.trace.exception_type
    assert parsed.trace.message == report.trace.message
    assert parsed.trace.frames == report.trace.frames


@given(reports())
@settings(max_examples=80)
def test_json_round_trip_structural_equality(report):
    again = report_from_dict(json.loads(json.dumps(report_to_dict(report))))
    assert again.id == report.id
    assert again.trace == report.trace
    assert again.metadata == report.metadata


def test_json_omits_absent_fields():
    report = CrashReport("r1", StackTrace((Frame("a.B.c"),), "e.T"))
    obj = report_to_dict(report)
    assert "message" not in obj
    assert "metadata" not in obj
    assert "file" not in obj["frames"][0]
    assert "line" not in obj["frames"][0]


def test_corpus_round_trip(tmp_path):
    reports = [
        CrashReport("r1", StackTrace((Frame("a.B.c", "B.java", 3),), "e.T", "m"), {"os": "Linux"}),
        CrashReport("r2", StackTrace((Frame("d.E.f"),), "e.U")),
    ]
    path = tmp_path / "corpus.jsonl"
    save_corpus(reports, path)
    again = load_corpus(path)
    assert [r.id for r in again] == ["r1", "r2"]
    assert [r.trace for r in again] == [r.trace for r in reports]
    assert again[0].metadata == {"os": "Linux"}


def test_load_corpus_rejects_duplicate_ids(tmp_path):
    path = tmp_path / "corpus.jsonl"
    line = json.dumps({"id": "r1", "exception_type": "e.T", "frames": [{"qualifier": "a.B.c"}]})
    path.write_text(line + "\n" + line + "\n")
    with pytest.raises(MalformedReport, match="duplicate"):
        load_corpus(path)


def test_split_raw_reports_blank_line_separated():
    text = "e.T: a\n\tat a.B.c(B.java:1)\n\n\ne.U: b\n\tat d.E.f(E.java:2)\n"
    blocks = split_raw_reports(text)
    assert len(blocks) == 2


def test_parse_corpus_text_assigns_stable_ids(tmp_path):
    raw = tmp_path / "reports.txt"
    raw.write_text(
        "e.T: a\n\tat a.B.c(B.java:1)\n\ne.U: b\n\tat d.E.f(E.java:2)\n"
    )
    reports = parse_corpus_text(raw)
    assert [r.id for r in reports] == ["r000000", "r000001"]
    assert reports[0].metadata["source"] == "reports.txt#0"


def test_parse_corpus_text_from_directory(tmp_path):
    (tmp_path / "b.txt").write_text("e.U: b\n\tat d.E.f(E.java:2)\n")
    (tmp_path / "a.txt").write_text(
        "e.T: a\n\tat a.B.c(B.java:1)\n\ne.T: c\n\tat g.H.i(H.java:3)\n"
    )
    reports = parse_corpus_text(tmp_path)
    # files visited in sorted order, blocks in file order
    assert [r.metadata["source"] for r in reports] == ["a.txt#0", "a.txt#1", "b.txt#0"]
    assert [r.id for r in reports] == ["r000000", "r000001", "r000002"]


def test_parser_never_reorders_frames():
    qualifiers = [f"p.C.m{i}" for i in range(12)]
    text = "e.T: x\n" + "\n".join(f"\tat {q}(C.java:{i+1})" for i, q in enumerate(qualifiers))
    trace = parse_report(text).trace
    assert [f.qualifier for f in trace.frames] == qualifiers
