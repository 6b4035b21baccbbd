"""Plain-text packing files and JSON search reports.

A packing file is UTF-8 text.  Header lines start with ``#`` and hold
``key: value`` pairs; the first header line names the format and version.
Each following line holds the three decimal coordinates of one sphere centre
in Euclidean units (radius 1)::

    # spherepack-packing 1
    # n: 4
    # p: 2
    # provenance: ccp
    # r: -
    # digits: 20
    # seed: -
    # edge: 1.41421356237309504881
    0 0 0
    ...

Coordinates are exact decimals, so the certifier reads precisely the values
written.  Files are written atomically through a temporary file.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from gmpy2 import isqrt, mpz

from .certifier import inflate_to_valid
from .lattice import Packing, Provenance
from .numerics import exact_decimal, parse_decimal

FORMAT_NAME = "spherepack-packing"
FORMAT_VERSION = 1
HEADER_KEYS = ("n", "p", "provenance", "r", "digits", "seed", "edge")


class PackingFormatError(ValueError):
    """A packing file does not follow the format or its own header."""


@dataclass
class PackingFile:
    n: int
    p: int
    provenance: str
    digits: int
    edge: str
    rows: list[tuple[str, str, str]]
    r: int | None = None
    seed: int | None = None
    version: int = FORMAT_VERSION
    extra: dict = field(default_factory=dict)

    def exact_rows(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        return [tuple(parse_decimal(c) for c in row) for row in self.rows]

    def validate(self) -> None:
        if self.n != len(self.rows):
            raise PackingFormatError(f"header says n={self.n} but file has {len(self.rows)} rows")
        edge = parse_decimal(self.edge)
        for row in self.exact_rows():
            for c in row:
                if c < 0 or c > edge:
                    raise PackingFormatError(f"coordinate {c} outside [0, edge={self.edge}]")

    def dumps(self) -> str:
        head = {
            "n": self.n,
            "p": self.p,
            "provenance": self.provenance,
            "r": "-" if self.r is None else self.r,
            "digits": self.digits,
            "seed": "-" if self.seed is None else self.seed,
            "edge": self.edge,
        }
        lines = [f"# {FORMAT_NAME} {self.version}"]
        lines += [f"# {k}: {head[k]}" for k in HEADER_KEYS]
        lines += [f"# {k}: {v}" for k, v in self.extra.items()]
        lines += [" ".join(row) for row in self.rows]
        return "\n".join(lines) + "\n"


def _optional_int(v: str):
    return None if v in ("-", "", "none", "None") else int(v)


def loads(text: str) -> PackingFile:
    head: dict[str, str] = {}
    rows = []
    version = None
    for num, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            body = s[1:].strip()
            if version is None:
                name, _, ver = body.partition(" ")
                if name != FORMAT_NAME:
                    raise PackingFormatError(f"not a {FORMAT_NAME} file")
                version = int(ver or 0)
                continue
            key, sep, value = body.partition(":")
            if not sep:
                raise PackingFormatError(f"line {num}: bad header line {line!r}")
            head[key.strip()] = value.strip()
            continue
        parts = s.split()
        if len(parts) != 3:
            raise PackingFormatError(f"line {num}: expected 3 coordinates, got {len(parts)}")
        for c in parts:
            try:
                parse_decimal(c)
            except ValueError as exc:
                raise PackingFormatError(f"line {num}: {exc}") from None
        rows.append(tuple(parts))
    if version is None:
        raise PackingFormatError("missing format header")
    if version != FORMAT_VERSION:
        raise PackingFormatError(f"unsupported format version {version}")
    missing = [k for k in HEADER_KEYS if k not in head]
    if missing:
        raise PackingFormatError(f"missing header keys: {', '.join(missing)}")
    extra = {k: v for k, v in head.items() if k not in HEADER_KEYS}
    pf = PackingFile(
        n=int(head["n"]),
        p=int(head["p"]),
        provenance=head["provenance"],
        digits=int(head["digits"]),
        edge=head["edge"],
        rows=rows,
        r=_optional_int(head["r"]),
        seed=_optional_int(head["seed"]),
        version=version,
        extra=extra,
    )
    pf.validate()
    return pf


def read_packing(path) -> PackingFile:
    return loads(Path(path).read_text(encoding="utf-8"))


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_packing(path, pf: PackingFile) -> None:
    pf.validate()
    atomic_write(path, pf.dumps())


def euclidean_rows(packing: Packing, places: int | None = None) -> list[tuple[Fraction, ...]]:
    """Exact Euclidean coordinates suitable for a decimal file.

    * Lattice-unit packings are scaled by ``sqrt2`` rounded *up* to ``places``
      decimals.  Uniform scaling keeps every contact at least 2 and leaves the
      certifier verdict unchanged.
    * Other packings are written exactly when their values are binary
      fractions, except constructive packings whose contacts sit at rounding
      level; those are rounded to ``places`` and inflated until valid.
    """
    places = places or packing.digits
    unit_sq = Fraction(packing.unit_sq)
    exact = packing.exact_points()
    if unit_sq == 2:
        s = _sqrt2_up(places)
        rows = [tuple(c * s for c in pt) for pt in exact]
    elif unit_sq == 1:
        if packing.provenance == Provenance.CONSTRUCTIVE:
            rows = inflate_to_valid(exact, places)
        else:
            rows = exact
    else:
        raise ValueError(f"unsupported coordinate unit {unit_sq}")
    lows = [min(pt[a] for pt in rows) for a in range(3)]
    return [tuple(pt[a] - lows[a] for a in range(3)) for pt in rows]


def _sqrt2_up(places: int) -> Fraction:
    scale = mpz(10) ** places
    root = isqrt(2 * scale * scale)
    if root * root < 2 * scale * scale:
        root += 1
    return Fraction(root, scale)


def render_packing(packing: Packing, places: int | None = None) -> PackingFile:
    """A :class:`PackingFile` holding the packing in exact Euclidean decimals."""
    rows = euclidean_rows(packing, places)
    edge = max(max(pt[a] for pt in rows) for a in range(3))
    prov = packing.provenance
    return PackingFile(
        n=len(rows),
        p=packing.p,
        provenance=prov.value if isinstance(prov, Provenance) else str(prov),
        digits=packing.digits,
        edge=exact_decimal(edge),
        rows=[tuple(exact_decimal(c) for c in pt) for pt in rows],
        r=packing.r,
        seed=packing.seed,
    )


def write_report(path, report, include_wall_time: bool = True) -> None:
    atomic_write(path, report.to_json(include_wall_time))


def read_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
