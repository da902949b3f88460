"""File formats: signal CSV/WAV, model JSON, pyramid CSV and plain CSV tables."""

from __future__ import annotations

import csv
import json
import re
import wave
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import LengthMismatch
from .lifting import LiftingModel
from .multirate import RationalRate, Signal
from .polyphase import PRCertificate, RationalFilterBank
from .transform import CoeffPyramid

__all__ = [
    "read_signal",
    "read_signal_csv",
    "write_signal_csv",
    "read_wav",
    "load_model",
    "save_model",
    "write_pyramid_csv",
    "read_pyramid_csv",
    "write_table_csv",
]

_HEADER = re.compile(r"#\s*(.*)")


def read_signal_csv(path: str | Path) -> Signal:
    """One real per line; an optional ``# origin=<int> rate=<float>`` header."""
    origin, rate = 0, None
    values = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            head = _HEADER.match(line)
            if head:
                for key, val in re.findall(r"(\w+)=(\S+)", head.group(1)):
                    if key == "origin":
                        origin = int(val)
                    elif key == "rate":
                        rate = float(val)
                continue
            try:
                values.append(float(line.split(",")[0]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from exc
    return Signal(np.array(values), origin, rate)


def write_signal_csv(path: str | Path, x: Signal | np.ndarray) -> None:
    sig = x if isinstance(x, Signal) else Signal(x)
    with open(path, "w") as fh:
        header = f"# origin={sig.origin}"
        if sig.sample_rate_hz is not None:
            header += f" rate={sig.sample_rate_hz:g}"
        fh.write(header + "\n")
        for v in sig.samples:
            fh.write(f"{float(v)!r}\n")


def read_wav(path: str | Path) -> Signal:
    """Mono 16-bit PCM, scaled to [-1, 1)."""
    with wave.open(str(path), "rb") as wf:
        if wf.getnchannels() != 1 or wf.getsampwidth() != 2:
            raise ValueError(f"{path}: only mono 16-bit PCM WAV is supported")
        frames = wf.readframes(wf.getnframes())
        rate = wf.getframerate()
    data = np.frombuffer(frames, dtype="<i2").astype(float) / 32768.0
    return Signal(data, 0, float(rate))


def read_signal(path: str | Path) -> Signal:
    path = Path(path)
    if path.suffix.lower() == ".wav":
        return read_wav(path)
    return read_signal_csv(path)


def save_model(path: str | Path, model: LiftingModel | RationalFilterBank,
               certificate: PRCertificate | None = None) -> None:
    if isinstance(model, LiftingModel):
        payload = model.to_dict()
    else:
        payload = model.to_dict()
        if certificate is not None:
            payload["certificate"] = certificate.to_dict()
    Path(path).write_text(json.dumps(payload, indent=2))


def load_model(path: str | Path) -> tuple[RationalFilterBank, PRCertificate | None, dict]:
    """Return ``(bank, certificate or None, raw JSON)``; raises ``ValueError`` on bad input."""
    try:
        raw = json.loads(Path(path).read_text())
        bank = RationalFilterBank.from_dict(raw)
        cert = PRCertificate.from_dict(raw["certificate"]) if "certificate" in raw else None
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: not a filterbank model ({exc})") from exc
    return bank, cert, raw


def write_pyramid_csv(path: str | Path, p: CoeffPyramid) -> None:
    """Flat ``level,band,index,value`` rows; band is ``detail`` or ``approx``."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# rate={p.rate.q1}/{p.rate.m} levels={p.levels} "
                 f"lengths={','.join(str(n) for n in p.lengths)}\n")
        w = csv.writer(fh)
        w.writerow(["level", "band", "index", "value"])
        for lvl, d in enumerate(p.details, 1):
            for i, v in enumerate(d):
                w.writerow([lvl, "detail", i, repr(float(v))])
        for i, v in enumerate(p.approx):
            w.writerow([p.levels, "approx", i, repr(float(v))])


def read_pyramid_csv(path: str | Path) -> CoeffPyramid:
    meta = {}
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            head = _HEADER.match(line.strip())
            if head:
                meta.update(re.findall(r"(\w+)=(\S+)", head.group(1)))
                continue
            rows.append(line)
    rate = RationalRate.parse(meta["rate"])
    levels = int(meta["levels"])
    lengths = [int(v) for v in meta["lengths"].split(",")]
    details: list[list[float]] = [[] for _ in range(levels)]
    approx: list[float] = []
    for rec in csv.DictReader(rows):
        target = approx if rec["band"] == "approx" else details[int(rec["level"]) - 1]
        if int(rec["index"]) != len(target):
            raise LengthMismatch(f"{path}: coefficient rows out of order")
        target.append(float(rec["value"]))
    return CoeffPyramid(rate, [np.array(d) for d in details], np.array(approx), lengths)


def write_table_csv(path: str | Path, rows: Iterable[Mapping], columns: Iterable[str]) -> None:
    columns = list(columns)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})
