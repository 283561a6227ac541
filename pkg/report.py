"""
Machine-readable reports.

A report is a plain dict that serializes deterministically: keys sorted, no
timestamps, every rational written as {"exact": "p/q", "decimal": "..."}.
Per-trial suite rows go through pandas for CSV export and summaries.
"""
import json
import logging
from dataclasses import fields, is_dataclass
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

try:
    from . import config
    from .seq_core import NormValue, PNorm, Vector, decimal_display
except ImportError:
    import config
    from seq_core import NormValue, PNorm, Vector, decimal_display

logger = logging.getLogger(__name__)

Report = Dict[str, Any]

PROVENANCE = {
    'k1': "coefficient-functional formula (exact optimum)",
    'k2': "coefficient-functional formula (exact optimum)",
    'K': "sign enumeration",
    'delta_min': "bottleneck assignment",
    'dual_norms': "l_inf norms of the coefficient functionals",
}


def scalar_entry(x: Fraction, precision: Optional[int] = None) -> Dict[str, str]:
    return {'exact': str(x), 'decimal': decimal_display(x, precision)}


def jsonable(value: Any, precision: Optional[int] = None) -> Any:
    """Recursively convert results (Fractions, dataclasses, vectors) into JSON values."""
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return value
    if isinstance(value, Fraction):
        return scalar_entry(value, precision)
    if isinstance(value, Decimal):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, PNorm):
        return str(value)
    if isinstance(value, NormValue):
        out = {'p': str(value.p), 'display': str(value.display), 'exact': value.exact}
        if value.exact:
            out['power'] = str(value.power)
        else:
            out['lower'] = str(value.lower)
            out['upper'] = str(value.upper)
        return out
    if isinstance(value, Vector):
        return [str(x) for x in value]
    if is_dataclass(value):
        return {f.name: jsonable(getattr(value, f.name), precision)
                for f in fields(value) if f.repr and not f.name.startswith('_')}
    if isinstance(value, dict):
        return {str(k): jsonable(v, precision) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v, precision) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist(), precision)
    if isinstance(value, np.generic):
        return jsonable(value.item(), precision)
    return str(value)


def new_report(command: str, params: Dict[str, Any], precision: Optional[int] = None) -> Report:
    return {
        'tool': config.APP_NAME,
        'report_version': config.REPORT_VERSION,
        'command': command,
        'params': jsonable(params, precision),
    }


def dumps(report: Report) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _flat(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (list, tuple)):
        return " ".join(str(_flat(v)) for v in value)
    return value


def trials_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    """One row per trial, exact rationals as strings; the reproduction instance is dropped."""
    records = [{k: _flat(v) for k, v in row.items() if k != 'instance'} for row in rows]
    return pd.DataFrame.from_records(records)


def write_csv(rows: List[Dict[str, Any]], path: str) -> None:
    trials_frame(rows).to_csv(path, index=False)
    logger.info(f"Per-trial table written to {path}")
