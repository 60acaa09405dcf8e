"""Java crash-report parsing and the canonical data model.

A crash report is an exception header followed by ``at ...`` frame lines.
Only the outermost stack trace is kept; ``Caused by:`` / ``Suppressed:``
chains are truncated at the first boundary. Frames are identified by their
fully qualified method name; source file and line are carried along but
never participate in frame identity.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import IoFailure, MalformedReport

_FRAME_RE = re.compile(r"^\s*at\s+(?P<qualifier>\S+?)\s*\((?P<location>[^()]*)\)")
_CHAIN_RE = re.compile(r"^\s*(?:Caused by:|Suppressed:)")
_OMITTED_RE = re.compile(r"^\s*\.\.\.\s*\d+\s+(?:more|common frames omitted)")
_THREAD_PREFIX_RE = re.compile(r'^\s*Exception in thread "[^"]*"\s*:?\s*')
_LOCATION_RE = re.compile(r"^(?P<file>.*?):(?P<line>-?\d+)$")

# Location markers that carry no file/line information.
_OPAQUE_LOCATIONS = frozenset({"", "Unknown Source", "Native Method"})


@dataclass(frozen=True)
class Frame:
    """One call-stack entry: qualified method name plus optional source location."""

    qualifier: str
    file: str | None = None
    line: int | None = None

    def __post_init__(self) -> None:
        if not self.qualifier or any(ch.isspace() for ch in self.qualifier):
            raise ValueError(
                f"frame qualifier must be non-empty without whitespace: {self.qualifier!r}"
            )
        if self.line is not None and self.line < 0:
            raise ValueError(f"frame line must be >= 0, got {self.line}")


@dataclass(frozen=True)
class StackTrace:
    """Ordered frame sequence; index 0 is the method that raised the error."""

    frames: tuple[Frame, ...]
    exception_type: str
    message: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class CrashReport:
    """A stack trace plus the report id and free-form metadata."""

    id: str
    trace: StackTrace
    metadata: dict[str, str] = field(default_factory=dict)


def frame_token(frame: Frame) -> str:
    """Canonical identity of a frame: the qualifier only, never file or line."""
    return frame.qualifier


def trace_tokens(trace: StackTrace) -> tuple[str, ...]:
    """Frame tokens of a trace in stack order."""
    return tuple(f.qualifier for f in trace.frames)


def _parse_location(location: str) -> tuple[str | None, int | None]:
    location = location.strip()
    if location in _OPAQUE_LOCATIONS:
        return None, None
    match = _LOCATION_RE.match(location)
    if match is None:
        return location, None
    file = match.group("file") or None
    line = int(match.group("line"))
    if line < 0:
        # Synthetic frames occasionally carry ":-1"; keep the file, drop the line.
        return file, None
    return file, line


def parse_report(text: str, *, report_id: str = "") -> CrashReport:
    """Parse raw Java crash-report text into a CrashReport.

    The first ``at`` line becomes frame 0. The exception header is the last
    non-blank line above the first frame; its text before the first ``:`` is
    the exception type and the remainder the message. Raises MalformedReport
    when no frame line is present.
    """
    lines = text.splitlines()
    frames: list[Frame] = []
    first_frame_lineno: int | None = None
    for lineno, raw in enumerate(lines, start=1):
        if _CHAIN_RE.match(raw):
            break
        if _OMITTED_RE.match(raw):
            continue
        match = _FRAME_RE.match(raw)
        if match is None:
            continue
        if first_frame_lineno is None:
            first_frame_lineno = lineno
        file, line = _parse_location(match.group("location"))
        frames.append(Frame(match.group("qualifier"), file, line))

    if not frames or first_frame_lineno is None:
        offending = next(
            (i for i, raw in enumerate(lines, start=1) if raw.strip()), 1
        )
        raise MalformedReport(f"no stack frame line found (line {offending})")

    exception_type = ""
    message: str | None = None
    for raw in reversed(lines[: first_frame_lineno - 1]):
        stripped = raw.strip()
        if not stripped or _OMITTED_RE.match(stripped):
            continue
        header = _THREAD_PREFIX_RE.sub("", stripped)
        head, sep, rest = header.partition(":")
        exception_type = head.strip()
        if sep:
            message = rest.strip() or None
        break

    return CrashReport(report_id, StackTrace(tuple(frames), exception_type, message))


def to_java_text(report: CrashReport) -> str:
    """Render a report back to standard Java stack-trace text."""
    trace = report.trace
    header = trace.exception_type
    if trace.message is not None:
        header = f"{header}: {trace.message}"
    lines = [header]
    for frame in trace.frames:
        if frame.file is None:
            location = "Unknown Source"
        elif frame.line is None:
            location = frame.file
        else:
            location = f"{frame.file}:{frame.line}"
        lines.append(f"\tat {frame.qualifier}({location})")
    return "\n".join(lines)


def split_raw_reports(text: str) -> list[str]:
    """Split a text blob into report blocks separated by blank lines."""
    blocks = re.split(r"\n\s*\n", text)
    return [block for block in blocks if block.strip()]


def iter_raw_blocks(path: str | Path) -> Iterator[tuple[str, str]]:
    """Yield (source label, report text) blocks from a file or a directory."""
    path = Path(path)
    try:
        if path.is_dir():
            for child in sorted(p for p in path.iterdir() if p.is_file()):
                for k, block in enumerate(split_raw_reports(child.read_text())):
                    yield f"{child.name}#{k}", block
        else:
            for k, block in enumerate(split_raw_reports(path.read_text())):
                yield f"{path.name}#{k}", block
    except OSError as exc:
        raise IoFailure(f"cannot read raw reports from {path}: {exc}") from exc


def parse_corpus_text(path: str | Path) -> list[CrashReport]:
    """Parse every blank-line-separated report under ``path`` with stable ids."""
    reports = []
    for ordinal, (source, block) in enumerate(iter_raw_blocks(path)):
        report = parse_report(block, report_id=f"r{ordinal:06d}")
        report.metadata["source"] = source
        reports.append(report)
    if not reports:
        raise MalformedReport(f"no reports found in {path}")
    return reports


def report_to_dict(report: CrashReport) -> dict:
    """JSON-ready dict for one report; absent optional fields are omitted."""
    frames = []
    for frame in report.trace.frames:
        entry: dict = {"qualifier": frame.qualifier}
        if frame.file is not None:
            entry["file"] = frame.file
        if frame.line is not None:
            entry["line"] = frame.line
        frames.append(entry)
    obj: dict = {
        "id": report.id,
        "exception_type": report.trace.exception_type,
        "frames": frames,
    }
    if report.trace.message is not None:
        obj["message"] = report.trace.message
    if report.metadata:
        obj["metadata"] = dict(report.metadata)
    return obj


def report_from_dict(obj: Mapping) -> CrashReport:
    try:
        frames = tuple(
            Frame(f["qualifier"], f.get("file"), f.get("line")) for f in obj["frames"]
        )
        trace = StackTrace(frames, obj["exception_type"], obj.get("message"))
        return CrashReport(obj["id"], trace, dict(obj.get("metadata", {})))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedReport(f"bad report record: {exc}") from exc


def save_corpus(reports: Iterable[CrashReport], path: str | Path) -> None:
    """Write reports as JSON Lines, one report per line, stable key order."""
    try:
        with open(path, "w", encoding="utf-8") as fp:
            for report in reports:
                fp.write(json.dumps(report_to_dict(report), sort_keys=True))
                fp.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write corpus to {path}: {exc}") from exc


def load_corpus(path: str | Path) -> list[CrashReport]:
    """Load a JSON Lines corpus; ids must be unique within the file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read corpus from {path}: {exc}") from exc
    reports: list[CrashReport] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except ValueError as exc:
            raise MalformedReport(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        report = report_from_dict(obj)
        if report.id in seen:
            raise MalformedReport(f"{path}:{lineno}: duplicate report id {report.id!r}")
        seen.add(report.id)
        reports.append(report)
    if not reports:
        raise MalformedReport(f"{path}: corpus file contains no reports")
    return reports


def corpus_traces(reports: Iterable[CrashReport]) -> dict[str, StackTrace]:
    """Map report id to trace, the shape the scoring harness consumes."""
    return {report.id: report.trace for report in reports}
