"""
BasisFile: exact, hand-editable storage of a basis of l1^n.

CSV form (row i holds coordinate i, column j holds the vector x_j):

    # l1-basis v1 n=3
    # labels: x1,x2,x3
    1/3,1,1
    1/3,1,0
    1/3,0,1

JSON form carries the same data with one list per vector:

    {"format": "l1-basis", "version": 1, "n": 3, "labels": [...],
     "columns": [["1/3", "1/3", "1/3"], ["1", "1", "0"], ["1", "0", "1"]]}

Cells are integers, "p/q" rationals or decimals; decimals are read exactly.
"""
import csv
import io
import json
import hashlib
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

try:
    from . import config
    from .seq_core import BasisError, Vector, as_scalar
    from .basis_constants import Basis
except ImportError:
    import config
    from seq_core import BasisError, Vector, as_scalar
    from basis_constants import Basis

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"^#\s*" + re.escape(config.FORMAT_NAME) + r"\s+v(\d+)(?:\s+n=(\d+))?\s*$")
_LABELS = re.compile(r"^#\s*labels: ?(.*)$")


class BasisFileError(BasisError):
    def __init__(self, reason: str, line: Optional[int] = None, source: str = "<input>"):
        self.line = line
        self.reason = reason
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {reason}")


@dataclass(frozen=True)
class BasisFile:
    version: int
    n: int
    columns: Tuple[Tuple[Fraction, ...], ...]
    labels: Optional[Tuple[str, ...]] = None

    @classmethod
    def from_basis(cls, basis: Basis) -> "BasisFile":
        return cls(version=config.FORMAT_VERSION, n=basis.n,
                   columns=tuple(tuple(v) for v in basis.vectors), labels=basis.labels)

    def to_basis(self) -> Basis:
        """Raises SingularMatrix when the columns are dependent."""
        return Basis.from_vectors([Vector(c) for c in self.columns], self.labels)


def _cell(text: str, line: int, source: str) -> Fraction:
    try:
        return as_scalar(text)
    except ValueError:
        raise BasisFileError(f"bad cell {text.strip()!r}: expected an integer, p/q or a decimal", line, source)


def _validate(version: int, n: Optional[int], columns: List[List[Fraction]],
              labels: Optional[List[str]], source: str) -> BasisFile:
    if version != config.FORMAT_VERSION:
        raise BasisFileError(f"unsupported format version {version}", source=source)
    if not columns:
        raise BasisFileError("no entries", source=source)
    size = len(columns)
    if n is not None and n != size:
        raise BasisFileError(f"header says n={n} but the file holds {size} vectors", source=source)
    for j, col in enumerate(columns):
        if len(col) != size:
            raise BasisFileError(f"vector {j + 1} has {len(col)} coordinates, expected {size}", source=source)
    if labels is not None and len(labels) != size:
        raise BasisFileError(f"{len(labels)} labels for {size} vectors", source=source)
    if labels is not None and any("\n" in s or "\r" in s for s in labels):
        raise BasisFileError("labels must not contain line breaks", source=source)
    return BasisFile(version=version, n=size, columns=tuple(tuple(c) for c in columns),
                     labels=tuple(labels) if labels is not None else None)


def _parse_csv(text: str, source: str) -> BasisFile:
    version, n, labels = config.FORMAT_VERSION, None, None
    rows: List[List[Fraction]] = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            header = _HEADER.match(line)
            if header:
                version = int(header.group(1))
                n = int(header.group(2)) if header.group(2) else None
                continue
            # labels keep their own whitespace; only the line terminator is gone
            found = _LABELS.match(raw.lstrip())
            if found:
                labels = next(csv.reader([found.group(1)]))
            continue
        cells = next(csv.reader([line]))
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise BasisFileError(f"row has {len(cells)} cells, expected {width}", lineno, source)
        rows.append([_cell(c, lineno, source) for c in cells])
    if rows and len(rows) != width:
        raise BasisFileError(f"matrix is {len(rows)}x{width}, not square", source=source)
    columns = [[rows[i][j] for i in range(len(rows))] for j in range(width or 0)]
    return _validate(version, n, columns, labels, source)


def _parse_json(text: str, source: str) -> BasisFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise BasisFileError(f"invalid JSON: {e.msg}", e.lineno, source)
    if not isinstance(doc, dict) or doc.get("format") != config.FORMAT_NAME:
        raise BasisFileError(f"not an {config.FORMAT_NAME} document", source=source)
    raw_columns = doc.get("columns")
    if not isinstance(raw_columns, list) or not all(isinstance(c, list) for c in raw_columns):
        raise BasisFileError("'columns' must be a list of lists", source=source)
    columns = []
    for col in raw_columns:
        cells = []
        for cell in col:
            if isinstance(cell, float):
                raise BasisFileError(f"JSON number {cell!r} is not exact; write it as a string", source=source)
            cells.append(_cell(cell if isinstance(cell, str) else str(cell), None, source))
        columns.append(cells)
    labels = doc.get("labels")
    return _validate(int(doc.get("version", config.FORMAT_VERSION)), doc.get("n"), columns,
                     [str(s) for s in labels] if labels is not None else None, source)


def parse(text: str, source: str = "<input>") -> BasisFile:
    """Parse either form; JSON is recognized by a leading '{'."""
    if text.lstrip().startswith("{"):
        return _parse_json(text, source)
    return _parse_csv(text, source)


def load(path: str) -> BasisFile:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise BasisFileError(f"cannot read: {e.strerror}", source=path)
    return parse(text, source=path)


def serialize(bf: BasisFile, fmt: str = "csv") -> str:
    if fmt == "json":
        doc = {
            "format": config.FORMAT_NAME,
            "version": bf.version,
            "n": bf.n,
            "columns": [[str(x) for x in col] for col in bf.columns],
        }
        if bf.labels is not None:
            doc["labels"] = list(bf.labels)
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown basis file format {fmt!r}")
    buf = io.StringIO()
    buf.write(f"# {config.FORMAT_NAME} v{bf.version} n={bf.n}\n")
    if bf.labels is not None:
        buf.write("# labels: ")
        edged = any(s != s.strip() for s in bf.labels)
        csv.writer(buf, lineterminator="\n",
                   quoting=csv.QUOTE_ALL if edged else csv.QUOTE_MINIMAL).writerow(bf.labels)
    writer = csv.writer(buf, lineterminator="\n")
    for i in range(bf.n):
        writer.writerow([str(bf.columns[j][i]) for j in range(bf.n)])
    return buf.getvalue()


def digest(bf: BasisFile) -> str:
    """sha256 of the canonical CSV form; equal values give equal digests."""
    canonical = serialize(BasisFile(bf.version, bf.n, bf.columns, None), "csv")
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()
