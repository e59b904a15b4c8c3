"""Plain-text trace format.

    #mistqueue-trace v1 W=<int> V=<int> seed=<int> [key=value ...]
    <cycle>\t<n>\t<w1>:<v1>:<K|U>,<w2>:<v2>:<K|U>,...

One line per non-empty cycle.  Extra header tokens carry the remaining
generation parameters so that a written trace reads back equal.
"""

from __future__ import annotations

import io
import os
from typing import IO, Union

from .model import Arrival, ArrivalBatch, Trace

MAGIC = "#mistqueue-trace"
VERSION = "v1"
_REQUIRED = ("W", "V", "seed")


class TraceFormatError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(text: str) -> object:
    if text in ("true", "false"):
        return text == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def dumps(trace: Trace) -> str:
    buf = io.StringIO()
    write_trace(trace, buf)
    return buf.getvalue()


def loads(text: str) -> Trace:
    return read_trace(io.StringIO(text))


def write_trace(trace: Trace, sink: IO[str]) -> None:
    meta = trace.meta
    head = [MAGIC, VERSION] + [f"{k}={_format_value(meta[k])}" for k in _REQUIRED]
    for key, value in meta.items():
        if key in _REQUIRED:
            continue
        text = _format_value(value)
        if any(c.isspace() for c in str(key) + text) or "=" in str(key):
            raise ValueError(f"meta entry {key!r}={text!r} cannot be written to a header")
        head.append(f"{key}={text}")
    sink.write(" ".join(head) + "\n")
    for batch in trace.batches:
        items = ",".join(f"{a.work}:{a.profit}:{'K' if a.known else 'U'}" for a in batch.packets)
        sink.write(f"{batch.cycle}\t{len(batch.packets)}\t{items}\n")


def read_trace(source: IO[str]) -> Trace:
    header = source.readline()
    if not header:
        raise TraceFormatError(1, "missing header")
    tokens = header.split()
    if len(tokens) < 2 or tokens[0] != MAGIC or tokens[1] != VERSION:
        raise TraceFormatError(1, f"expected '{MAGIC} {VERSION}' header")
    meta = {}
    for tok in tokens[2:]:
        key, sep, value = tok.partition("=")
        if not sep or not key:
            raise TraceFormatError(1, f"malformed header token {tok!r}")
        meta[key] = _parse_value(value)
    for key in _REQUIRED:
        if not isinstance(meta.get(key), int):
            raise TraceFormatError(1, f"header needs integer {key}=")
    W, V = meta["W"], meta["V"]
    if W < 1 or V < 1:
        raise TraceFormatError(1, "W and V must be positive")

    batches = []
    prev = -1
    for line_no, line in enumerate(source, start=2):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise TraceFormatError(line_no, "expected <cycle>\\t<n>\\t<packets>")
        try:
            cycle, count = int(fields[0]), int(fields[1])
        except ValueError:
            raise TraceFormatError(line_no, "cycle and count must be integers") from None
        if cycle <= prev:
            raise TraceFormatError(line_no, f"cycle {cycle} is not after cycle {prev}")
        items = fields[2].split(",") if fields[2] else []
        if count < 1 or len(items) != count:
            raise TraceFormatError(line_no, f"count {count} does not match {len(items)} packets")
        packets = []
        for item in items:
            parts = item.split(":")
            if len(parts) != 3 or parts[2] not in ("K", "U"):
                raise TraceFormatError(line_no, f"malformed packet {item!r}")
            try:
                w, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise TraceFormatError(line_no, f"malformed packet {item!r}") from None
            if not 1 <= w <= W:
                raise TraceFormatError(line_no, f"work {w} outside [1, {W}]")
            if not 1 <= v <= V:
                raise TraceFormatError(line_no, f"profit {v} outside [1, {V}]")
            packets.append(Arrival(w, v, parts[2] == "K"))
        batches.append(ArrivalBatch(cycle, tuple(packets)))
        prev = cycle
    return Trace(batches, meta)


PathLike = Union[str, os.PathLike]


def save(trace: Trace, path: PathLike) -> None:
    with open(path, "w", encoding="ascii") as fh:
        write_trace(trace, fh)


def load(path: PathLike) -> Trace:
    with open(path, encoding="ascii") as fh:
        return read_trace(fh)
