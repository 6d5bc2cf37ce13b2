"""
JSON and CSV encoding of records.

Rationals are written twice, as a decimal and as an exact ``p/q`` string.
"""
import csv
import dataclasses
import json
import logging
import os
import tempfile
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, List, Sequence

import numpy as np
from pydantic import BaseModel

from core.exceptions import OutputError

logger = logging.getLogger(__name__)


def exact(value: Fraction) -> dict:
    return {"decimal": float(value), "fraction": f"{value.numerator}/{value.denominator}"}


def to_jsonable(value: Any) -> Any:
    """Convert records, dataclasses, enums and numpy scalars to plain JSON types."""
    if isinstance(value, Fraction):
        return exact(value)
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump(by_alias=True))
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def dumps(value: Any) -> str:
    return json.dumps(to_jsonable(value), indent=2, sort_keys=True)


def _atomic_write(path: Path, write) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="", encoding="utf-8") as handle:
                write(handle)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as e:
        raise OutputError(f"cannot write {path.name}: {e}", str(path)) from e
    return path


def write_json(path: Path, value: Any) -> Path:
    """Write ``value`` as JSON through a temporary file in the same directory."""
    text = dumps(value)
    return _atomic_write(path, lambda handle: handle.write(text + "\n"))


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    def write(handle):
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)

    return _atomic_write(path, write)


def remove_quietly(paths: List[Path]) -> None:
    """Delete files written by a failed run; paths that cannot be removed are logged and skipped."""
    for path in paths:
        try:
            Path(path).unlink(missing_ok=True)
        except OSError as e:
            logger.warning(f"⚠️ Could not remove {path}: {e}")
