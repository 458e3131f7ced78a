"""Append-only sample store persisted as CSV.

Line 1 is `# space_fingerprint=<hex>`, line 2 the header (parameter names in
space order, then objective,status,wall_time). Reals use 17 significant digits
so a load after persist reproduces every field bit-exactly.
"""

import csv
import io
from collections.abc import Iterable, Iterator, Sequence
from pathlib import Path

from app.core.exceptions import EncodingError, FingerprintMismatchError, StoreFormatError
from app.core.logging import get_logger
from app.driver.models import SampleRecord, SampleStatus
from app.space.params import ParameterSpace, check_config, fingerprint

logger = get_logger(__name__)

FINGERPRINT_PREFIX = "# space_fingerprint="
RESULT_COLUMNS = ("objective", "status", "wall_time")


class SampleStore:
    """Append-only sequence of sample records for one parameter space."""

    def __init__(self, space: ParameterSpace, records: Iterable[SampleRecord] = ()) -> None:
        self.space = space
        self.space_fingerprint = fingerprint(space)
        self._records: list[SampleRecord] = list(records)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[SampleRecord]:
        return iter(self._records)

    def __getitem__(self, index: int) -> SampleRecord:
        return self._records[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleStore):
            return NotImplemented
        return (
            self.space_fingerprint == other.space_fingerprint
            and self._records == other._records
        )

    @property
    def records(self) -> tuple[SampleRecord, ...]:
        return tuple(self._records)

    def append(self, record: SampleRecord) -> None:
        self._records.append(record)

    def extend(self, records: Iterable[SampleRecord]) -> None:
        self._records.extend(records)

    def usable(self) -> list[SampleRecord]:
        """Records whose objective is a (possibly clipped) measurement."""
        return [r for r in self._records if r.status.usable]

    def status_counts(self) -> dict[str, int]:
        counts = {s.value: 0 for s in SampleStatus}
        for r in self._records:
            counts[r.status.value] += 1
        return counts

    def total_wall_time(self) -> float:
        return sum(r.wall_time for r in self._records)


def _header(space: ParameterSpace) -> list[str]:
    return [*space.names, *RESULT_COLUMNS]


def _row(space: ParameterSpace, record: SampleRecord) -> list[str]:
    cells = [spec.format(v) for spec, v in zip(space.params, record.config, strict=True)]
    return [
        *cells,
        format(record.objective, ".17g"),
        record.status.value,
        format(record.wall_time, ".17g"),
    ]


def _write_rows(handle, space: ParameterSpace, records: Iterable[SampleRecord]) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    for record in records:
        writer.writerow(_row(space, record))


def persist(store: SampleStore, path: Path) -> None:
    """Write the whole store, replacing any existing file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as f:
        f.write(f"{FINGERPRINT_PREFIX}{store.space_fingerprint}\n")
        csv.writer(f, lineterminator="\n").writerow(_header(store.space))
        _write_rows(f, store.space, store)
    tmp.replace(path)
    logger.bind(path=str(path), records=len(store)).debug("store_persisted")


def append(path: Path, space: ParameterSpace, records: Sequence[SampleRecord]) -> None:
    """Append a batch to an existing store file (creating it if absent)."""
    path = Path(path)
    if not path.exists():
        persist(SampleStore(space, records), path)
        return
    with open(path, "a", newline="") as f:
        _write_rows(f, space, records)
    logger.bind(path=str(path), appended=len(records)).debug("store_appended")


def _parse_float(text: str, column: str, line: int) -> float:
    try:
        return float(text)
    except ValueError as e:
        raise StoreFormatError(f"non-numeric {column} {text!r}", line) from e


def _parse_row(space: ParameterSpace, row: list[str], line: int) -> SampleRecord:
    n_params = len(space)
    if len(row) != n_params + len(RESULT_COLUMNS):
        raise StoreFormatError(f"expected {n_params + 3} fields, got {len(row)}", line)
    try:
        config = tuple(spec.parse(cell) for spec, cell in zip(space.params, row, strict=False))
        check_config(space, config)
    except EncodingError as e:
        raise StoreFormatError(str(e), line) from e
    objective = _parse_float(row[n_params], "objective", line)
    try:
        status = SampleStatus(row[n_params + 1])
    except ValueError as e:
        raise StoreFormatError(f"unknown status {row[n_params + 1]!r}", line) from e
    wall_time = _parse_float(row[n_params + 2], "wall_time", line)
    return SampleRecord(config, objective, status, wall_time)


def load(path: Path, space: ParameterSpace) -> SampleStore:
    """Read a store written by `persist`/`append`.

    A malformed last line without a line terminator is what an interrupted
    append leaves behind: it is dropped with a warning instead of raising.

    Raises:
        FingerprintMismatchError: If the file belongs to another space
        StoreFormatError: On any other malformed line (1-based line number attached)
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not lines[0].startswith(FINGERPRINT_PREFIX):
        raise StoreFormatError("missing space fingerprint comment", 1)

    found = lines[0][len(FINGERPRINT_PREFIX) :].strip()
    expected = fingerprint(space)
    if found != expected:
        raise FingerprintMismatchError(expected, found)

    reader = csv.reader(io.StringIO("\n".join(lines[1:])))
    try:
        header = next(reader)
    except StopIteration as e:
        raise StoreFormatError("missing header row", 2) from e
    if header != _header(space):
        raise StoreFormatError(f"unexpected header {header}", 2)

    unterminated = len(lines) if not text.endswith("\n") else None
    store = SampleStore(space)
    for offset, row in enumerate(reader):
        line = offset + 3
        if not row:
            continue
        try:
            store.append(_parse_row(space, row, line))
        except StoreFormatError as e:
            if line != unterminated:
                raise
            logger.bind(path=str(path), line=line, error=str(e)).warning("store_truncated_line")

    logger.bind(path=str(path), records=len(store)).debug("store_loaded")
    return store
