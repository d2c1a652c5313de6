"""Instrument data ingestion and serialization.

Two formats are supported: Touchstone v1 two-port files (.s2p) and a CSV
sweep schema with named header columns. Both produce the canonical
NetworkSweep; both writers round-trip through their parsers.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from .errors import ArgumentError, FormatError

__all__ = [
    "PORT_PAIRS",
    "NetworkSweep",
    "SweepMeta",
    "parse_touchstone",
    "write_touchstone",
    "parse_csv_sweep",
    "write_csv",
    "pair_from_name",
    "pair_name",
]

PortPair = Tuple[int, int]

# canonical two-port ordering used by Touchstone data rows
PORT_PAIRS: Tuple[PortPair, ...] = ((1, 1), (2, 1), (1, 2), (2, 2))

_FREQ_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}


def pair_name(pair: PortPair) -> str:
    """(2, 1) -> 's21'."""
    return f"s{pair[0]}{pair[1]}"


def pair_from_name(name: str) -> PortPair:
    """Accepts 's21', 'S21' or '21'."""
    text = name.strip().lower()
    if text.startswith("s"):
        text = text[1:]
    if len(text) == 2 and text[0] in "12" and text[1] in "12":
        return int(text[0]), int(text[1])
    raise ArgumentError(f"not a two-port pair name: {name!r}")


@dataclass
class NetworkSweep:
    """Frequency sweep of two-port S-parameters in linear amplitude."""

    freqs: np.ndarray
    s: Dict[PortPair, np.ndarray]
    ref_impedance: float = 50.0
    label: str = ""

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        if self.freqs.ndim != 1 or self.freqs.size == 0:
            raise ArgumentError("freqs must be a non-empty vector")
        if not np.all(np.isfinite(self.freqs)):
            raise ArgumentError("freqs must be finite")
        if np.any(np.diff(self.freqs) <= 0):
            raise ArgumentError("freqs must be strictly increasing")
        if not self.s:
            raise ArgumentError("at least one port pair is required")
        clean = {}
        for pair, vec in self.s.items():
            if pair not in PORT_PAIRS:
                raise ArgumentError(f"unknown port pair {pair!r}")
            vec = np.asarray(vec, dtype=complex)
            if vec.shape != self.freqs.shape:
                raise ArgumentError(
                    f"S{pair[0]}{pair[1]} length {vec.size} does not match "
                    f"{self.freqs.size} frequencies"
                )
            clean[pair] = vec
        self.s = clean
        if self.ref_impedance <= 0:
            raise ArgumentError("reference impedance must be positive")

    def pair(self, pair: PortPair) -> np.ndarray:
        try:
            return self.s[pair]
        except KeyError:
            present = ", ".join(pair_name(p) for p in self.s)
            raise ArgumentError(
                f"{pair_name(pair)} not present in sweep (has {present})"
            ) from None

    def has_pair(self, pair: PortPair) -> bool:
        return pair in self.s


@dataclass
class SweepMeta:
    """Optional device context carried alongside a sweep."""

    temperature: Optional[float] = None
    device_length: Optional[float] = None
    idt_pitch: Optional[float] = None
    notes: str = ""

    def __post_init__(self):
        if self.device_length is not None and self.device_length <= 0:
            raise ArgumentError("device_length must be positive")
        if self.idt_pitch is not None and self.idt_pitch <= 0:
            raise ArgumentError("idt_pitch must be positive")


def _decode(data) -> str:
    if isinstance(data, str):
        return data
    if isinstance(data, (bytes, bytearray)):
        # undecodable bytes surface later as token errors, never as a crash
        return bytes(data).decode("utf-8", errors="replace")
    raise ArgumentError("expected str or bytes input")


def _parse_option_line(line: str, lineno: int):
    tokens = line[1:].split()
    unit_scale = 1e9
    representation = "MA"
    impedance = 50.0
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in _FREQ_UNITS:
            unit_scale = _FREQ_UNITS[tok]
        elif tok in ("RI", "MA", "DB"):
            representation = tok
        elif tok == "S":
            pass
        elif tok in ("Y", "Z", "H", "G"):
            raise FormatError(f"only S-parameters are supported, got {tok}", lineno)
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise FormatError("option line R token missing impedance", lineno)
            i += 1
            try:
                impedance = float(tokens[i])
            except ValueError:
                raise FormatError(
                    f"bad impedance {tokens[i]!r} in option line", lineno
                ) from None
        else:
            raise FormatError(f"unknown option token {tokens[i]!r}", lineno)
        i += 1
    return unit_scale, representation, impedance


def _pairs_from_columns(cols, representation: str):
    out = []
    for k in range(4):
        a, b = cols[2 * k], cols[2 * k + 1]
        if representation == "RI":
            out.append(complex(a, b))
        else:
            if representation == "DB":
                a = 10.0 ** (a / 20.0)
            rad = math.radians(b)
            out.append(complex(a * math.cos(rad), a * math.sin(rad)))
    return out


def parse_touchstone(data) -> NetworkSweep:
    """Parse Touchstone v1 two-port text into a NetworkSweep.

    Grammar: '!' starts a comment, one '# <unit> S <RI|MA|DB> R <imp>'
    option line, then data rows of 9 numeric columns ordered
    f, S11, S21, S12, S22 (real/imag, magnitude/angle or dB/angle pairs).
    Touchstone v2 keyword blocks are rejected.
    """
    text = _decode(data)
    option = None
    freqs = []
    rows = []
    last_f = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        cut = raw.find("!")
        line = (raw if cut < 0 else raw[:cut]).strip()
        if not line:
            continue
        if line.startswith("["):
            raise FormatError(
                f"Touchstone v2 keyword {line.split()[0]} not supported; "
                "this parser reads v1 only",
                lineno,
            )
        if line.startswith("#"):
            if option is not None:
                raise FormatError("second option line", lineno)
            option = _parse_option_line(line, lineno)
            continue
        if option is None:
            raise FormatError("data before the option line (missing '#' line)", lineno)
        parts = line.split()
        if len(parts) != 9:
            raise FormatError(
                f"expected 9 columns for a two-port row, got {len(parts)}", lineno
            )
        try:
            cols = [float(p) for p in parts]
        except ValueError as exc:
            raise FormatError(f"bad number in data row: {exc}", lineno) from None
        if not all(math.isfinite(c) for c in cols):
            raise FormatError("non-finite value in data row", lineno)
        f = cols[0] * option[0]
        if last_f is not None and f <= last_f:
            raise FormatError(
                f"frequency not strictly increasing at {cols[0]!r}", lineno
            )
        last_f = f
        freqs.append(f)
        rows.append(_pairs_from_columns(cols[1:], option[1]))
    if option is None:
        raise FormatError("missing option line (no '#' line found)")
    if not rows:
        raise FormatError("no data rows")
    values = np.asarray(rows, dtype=complex)
    s = {pair: values[:, k] for k, pair in enumerate(PORT_PAIRS)}
    return NetworkSweep(freqs=np.asarray(freqs), s=s, ref_impedance=option[2])


def write_touchstone(sweep: NetworkSweep, unit: str = "GHZ", representation: str = "RI") -> bytes:
    """Serialize a sweep as Touchstone v1 two-port text.

    Port pairs absent from the sweep are written as zeros since the row
    grammar always carries all four. Values are printed with 17
    significant digits so an RI round trip is exact.
    """
    unit = unit.upper()
    if unit not in _FREQ_UNITS:
        raise ArgumentError(f"unknown frequency unit {unit!r}")
    representation = representation.upper()
    if representation not in ("RI", "MA", "DB"):
        raise ArgumentError(f"unknown representation {representation!r}")
    scale = _FREQ_UNITS[unit]
    lines = []
    if sweep.label:
        lines.append(f"! {sweep.label}")
    lines.append(f"# {unit} S {representation} R {sweep.ref_impedance:.17g}")
    zeros = np.zeros(sweep.freqs.size, dtype=complex)
    columns = [sweep.s.get(pair, zeros) for pair in PORT_PAIRS]
    for i, f in enumerate(sweep.freqs):
        cells = [f"{f / scale:.17g}"]
        for col in columns:
            v = col[i]
            if representation == "RI":
                a, b = v.real, v.imag
            else:
                mag = abs(v)
                ang = math.degrees(math.atan2(v.imag, v.real))
                if representation == "DB":
                    # floor far below any measurable level instead of -inf
                    mag = 20.0 * math.log10(mag) if mag > 0 else -400.0
                a, b = mag, ang
            cells.append(f"{a:.17g}")
            cells.append(f"{b:.17g}")
        lines.append(" ".join(cells))
    return ("\n".join(lines) + "\n").encode()


_CSV_SUFFIXES = ("re", "im", "db", "deg")


def _canonical_roles():
    roles = ["freq"]
    for pair in PORT_PAIRS:
        for suffix in _CSV_SUFFIXES:
            roles.append(f"{pair_name(pair)}_{suffix}")
    return roles


def parse_csv_sweep(data, column_spec: Optional[Dict[str, str]] = None) -> NetworkSweep:
    """Parse a CSV sweep with named header columns.

    The default schema is ``freq_hz`` plus ``s{ij}_re``/``s{ij}_im`` or
    ``s{ij}_db``/``s{ij}_deg`` per port pair. ``column_spec`` maps those
    role names (using ``freq`` for the frequency column) to whatever the
    file's headers actually are. Frequencies are always in Hz.
    """
    text = _decode(data)
    known = set(_canonical_roles())
    mapping = {"freq": "freq_hz"}
    for role in known - {"freq"}:
        mapping[role] = role
    if column_spec:
        for role, header in column_spec.items():
            if role not in known:
                raise ArgumentError(
                    f"unknown column role {role!r}; expected 'freq' or s<ij>_<re|im|db|deg>"
                )
            mapping[role] = header

    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise FormatError("empty CSV input")
    try:
        rows = list(csv.reader(lines))
    except csv.Error as exc:
        raise FormatError(f"malformed CSV: {exc}") from None
    if not rows:  # pragma: no cover - lines is non-empty
        raise FormatError("empty CSV input")
    header = [h.strip() for h in rows[0]]
    index = {name: i for i, name in enumerate(header)}

    def column_for(role, required=False):
        name = mapping[role]
        if name in index:
            return index[name]
        if required or (column_spec and role in column_spec):
            raise FormatError(
                f"column {name!r} (for {role}) not found; available: {', '.join(header)}"
            )
        return None

    fcol = column_for("freq", required=True)
    pair_cols = {}
    for pair in PORT_PAIRS:
        base = pair_name(pair)
        re_i, im_i = column_for(f"{base}_re"), column_for(f"{base}_im")
        db_i, deg_i = column_for(f"{base}_db"), column_for(f"{base}_deg")
        if re_i is not None or im_i is not None:
            if re_i is None or im_i is None:
                raise FormatError(f"{base} needs both _re and _im columns")
            if db_i is not None or deg_i is not None:
                raise FormatError(f"{base} has both re/im and db/deg columns")
            pair_cols[pair] = ("ri", re_i, im_i)
        elif db_i is not None or deg_i is not None:
            if db_i is None or deg_i is None:
                raise FormatError(f"{base} needs both _db and _deg columns")
            pair_cols[pair] = ("db", db_i, deg_i)
    if not pair_cols:
        raise FormatError(
            f"no S-parameter columns found; available: {', '.join(header)}"
        )

    freqs = []
    data_cols = {pair: [] for pair in pair_cols}
    last_f = None
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise FormatError(
                f"expected {len(header)} cells, got {len(row)}", lineno
            )
        try:
            f = float(row[fcol])
        except ValueError:
            raise FormatError(f"bad frequency {row[fcol]!r}", lineno) from None
        if not math.isfinite(f):
            raise FormatError("non-finite frequency", lineno)
        if last_f is not None and f <= last_f:
            raise FormatError("frequency not strictly increasing", lineno)
        last_f = f
        freqs.append(f)
        for pair, (kind, ia, ib) in pair_cols.items():
            try:
                a, b = float(row[ia]), float(row[ib])
            except ValueError as exc:
                raise FormatError(f"bad number: {exc}", lineno) from None
            if kind == "ri":
                data_cols[pair].append(complex(a, b))
            else:
                mag = 10.0 ** (a / 20.0)
                rad = math.radians(b)
                data_cols[pair].append(complex(mag * math.cos(rad), mag * math.sin(rad)))
    if not freqs:
        raise FormatError("CSV has a header but no data rows")
    s = {pair: np.asarray(vals, dtype=complex) for pair, vals in data_cols.items()}
    return NetworkSweep(freqs=np.asarray(freqs), s=s)


def write_csv(sweep: NetworkSweep, which: Iterable[PortPair], representation: str = "ri") -> bytes:
    """Serialize selected port pairs as CSV.

    representation 'ri' writes s<ij>_re/_im columns, 'db_phase' writes
    s<ij>_db/_deg. Values carry 17 significant digits; 'ri' output
    round-trips through parse_csv_sweep bit for bit.
    """
    pairs = list(which)
    if not pairs:
        raise ArgumentError("no port pairs requested")
    if representation not in ("ri", "db_phase"):
        raise ArgumentError(f"unknown representation {representation!r}")
    for pair in pairs:
        if pair not in sweep.s:
            raise ArgumentError(f"{pair_name(pair)} not present in sweep")
    header = ["freq_hz"]
    for pair in pairs:
        base = pair_name(pair)
        if representation == "ri":
            header += [f"{base}_re", f"{base}_im"]
        else:
            header += [f"{base}_db", f"{base}_deg"]
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for i, f in enumerate(sweep.freqs):
        cells = [f"{f:.17g}"]
        for pair in pairs:
            v = sweep.s[pair][i]
            if representation == "ri":
                cells.append(f"{v.real:.17g}")
                cells.append(f"{v.imag:.17g}")
            else:
                mag = abs(v)
                db = 20.0 * math.log10(mag) if mag > 0 else -400.0
                deg = math.degrees(math.atan2(v.imag, v.real))
                cells.append(f"{db:.17g}")
                cells.append(f"{deg:.17g}")
        out.write(",".join(cells) + "\n")
    return out.getvalue().encode()
