# app/adapters/output.py
"""
Escritura de artefactos CSV / JSON con flotantes exactos de ida y vuelta
"""
import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..core.errors import OutputError
from ..models.field import WaveField

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """repr de float da la representación decimal más corta que recupera el mismo binario"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def ensure_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"cannot create output directory {out}: {e}") from e
    return out


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    ensure_dir(path.parent)
    try:
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    logger.info(f"💾 Escrito {path}")
    return path


def write_dict_rows(path, rows: List[Dict[str, Any]], header: Sequence[str]) -> Path:
    return write_csv(path, header, ([row.get(k) for k in header] for row in rows))


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_json(path, payload: Any) -> Path:
    path = Path(path)
    ensure_dir(path.parent)
    try:
        path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except (OSError, TypeError, ValueError) as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    logger.info(f"💾 Escrito {path}")
    return path


def read_json(path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise OutputError(f"cannot read {path}: {e}") from e


FIELD_HEADER = ("x", "t", "re_psi", "im_psi", "abs_psi")


def field_header(field: WaveField) -> Tuple[str, ...]:
    """Encabezado del campo; la columna `mass` solo si el campo la trae"""
    return FIELD_HEADER if field.mass is None else FIELD_HEADER + ("mass",)


def field_rows(field: WaveField) -> List[List[Any]]:
    rows = []
    for i, t in enumerate(field.t):
        for j, x in enumerate(field.x):
            v = field.values[i, j]
            row = [x, t, v.real, v.imag, abs(v)]
            if field.mass is not None:
                row.append(field.mass[i, j])
            rows.append(row)
    return rows


def write_field(path, field: WaveField, fmt: str = "csv") -> Path:
    if fmt == "json":
        return write_json(path, {
            "metadata": field.metadata(),
            "rows": [dict(zip(field_header(field), row)) for row in field_rows(field)],
        })
    return write_csv(path, field_header(field), field_rows(field))
