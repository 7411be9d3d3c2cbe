"""File formats, market-data ingestion and atomic output.

CSV layouts (header row first, floats written with ``repr`` so they re-parse
to identical values):

* paths     -- ``time,path_id,y1,y2``, one row per (path, grid time)
* prices    -- ``K,fft_price,mc_price,mc_se,delta`` (empty cell = not computed)
* quotes    -- ``underlying_id,maturity,strike,price``
* forwards  -- ``underlying_id,forward``; row order fixes leg 1 and leg 2
* series    -- ``date,<id_1>,<id_2>``, forward quotes in chronological order

Parameters and contracts are JSON objects; a params file carries a
``"model"`` key and is loadable with :func:`sdnig.models.params_from_dict`.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .calibration import VanillaQuote
from .errors import IngestionError, ValidationError
from .models import params_from_dict
from .pricing import SpreadContract
from .simulation import PathBatch

PATH_COLUMNS = ["time", "path_id", "y1", "y2"]
PRICE_COLUMNS = ["K", "fft_price", "mc_price", "mc_se", "delta"]
QUOTE_COLUMNS = ["underlying_id", "maturity", "strike", "price"]
FORWARD_COLUMNS = ["underlying_id", "forward"]
MIN_OBSERVATIONS = 30


# ---------------------------------------------------------------- writing

def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=folder)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


def paths_rows(batch: PathBatch):
    n_t = batch.times.size
    for i in range(batch.n_paths):
        for k in range(n_t):
            yield dict(time=float(batch.times[k]), path_id=i, y1=float(batch.y1[i, k]), y2=float(batch.y2[i, k]))


def paths_csv(batch: PathBatch) -> str:
    return csv_text(PATH_COLUMNS, paths_rows(batch))


def prices_csv(rows) -> str:
    return csv_text(PRICE_COLUMNS, rows)


# ---------------------------------------------------------------- reading

def _read_text(path) -> str:
    try:
        with open(path, newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc.strerror}", ["file exists"]) from exc


def read_csv(path, required) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(_read_text(path))))
    header = set(rows[0]) if rows else set()
    missing = [c for c in required if c not in header]
    if not rows or missing:
        raise IngestionError(f"{path}: missing columns {missing or list(required)}", ["csv header"])
    return rows


def _float(row, key, path):
    try:
        return float(row[key])
    except (TypeError, ValueError) as exc:
        raise IngestionError(f"{path}: bad number {row.get(key)!r} in column {key}", ["numeric cells"]) from exc


def read_json(path) -> dict:
    try:
        obj = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise IngestionError(f"{path}: invalid JSON ({exc.msg})", ["valid JSON"]) from exc
    if not isinstance(obj, dict):
        raise IngestionError(f"{path}: expected a JSON object", ["JSON object"])
    return obj


def read_params(path):
    return params_from_dict(read_json(path))


def read_contract(path) -> SpreadContract:
    d = read_json(path)
    keys = ["K", "T", "r", "f1_0", "f2_0"]
    missing = [k for k in keys if k not in d]
    if missing:
        raise IngestionError(f"{path}: contract misses {missing}", ["contract fields"])
    try:
        return SpreadContract(**{k: float(d[k]) for k in keys})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise IngestionError(f"{path}: contract fields must be numbers", ["numeric fields"]) from exc


def read_paths(path) -> PathBatch:
    """Inverse of :func:`paths_csv` (seed and model tag are not stored)."""
    rows = read_csv(path, PATH_COLUMNS)
    t = np.array([_float(r, "time", path) for r in rows])
    ids = np.array([int(r["path_id"]) for r in rows])
    times = np.unique(t)
    n = ids.max() + 1
    if len(rows) != n * times.size:
        raise IngestionError(f"{path}: ragged path table", ["rectangular table"])
    y1 = np.array([_float(r, "y1", path) for r in rows]).reshape(n, times.size)
    y2 = np.array([_float(r, "y2", path) for r in rows]).reshape(n, times.size)
    return PathBatch(times, y1, y2, seed=-1, model_tag="")


def read_prices(path) -> list[dict]:
    rows = read_csv(path, PRICE_COLUMNS)
    return [{c: (None if r[c] == "" else _float(r, c, path)) for c in PRICE_COLUMNS} for r in rows]


def read_quotes(path) -> list[VanillaQuote]:
    rows = read_csv(path, QUOTE_COLUMNS)
    return [VanillaQuote(r["underlying_id"], _float(r, "maturity", path), _float(r, "strike", path),
                         _float(r, "price", path)) for r in rows]


def read_forwards(path) -> dict:
    rows = read_csv(path, FORWARD_COLUMNS)
    out = {}
    for r in rows:
        f = _float(r, "forward", path)
        if not f > 0:
            raise IngestionError(f"{path}: forward of {r['underlying_id']} must be > 0", ["forward > 0"])
        out[r["underlying_id"]] = f
    return out


def write_quotes_csv(path, quotes) -> None:
    rows = [dict(underlying_id=q.underlying_id, maturity=q.maturity, strike=q.strike, price=q.price) for q in quotes]
    atomic_write(path, csv_text(QUOTE_COLUMNS, rows))


# ---------------------------------------------------------------- market series

@dataclass(frozen=True)
class MarketSeries:
    dates: tuple
    quotes: dict

    def __post_init__(self):
        n = len(self.dates)
        if len(self.quotes) != 2:
            raise IngestionError("a market series needs exactly two underlyings", ["two underlyings"])
        for k, v in self.quotes.items():
            v = np.asarray(v, dtype=float)
            if v.shape != (n,):
                raise IngestionError(f"series {k} has {v.size} quotes for {n} dates", ["aligned lengths"])
            if not np.all(v > 0):
                raise IngestionError(f"series {k} has non-positive quotes", ["quotes > 0"])


def read_series(path) -> MarketSeries:
    rows = read_csv(path, ["date"])
    ids = [c for c in rows[0] if c != "date"]
    if len(ids) != 2:
        raise IngestionError(f"{path}: expected date plus two quote columns, got {ids}", ["two quote columns"])
    quotes = {}
    for k in ids:
        if any(r[k] in ("", None) for r in rows):
            raise IngestionError(f"{path}: missing quotes in column {k}", ["aligned series"])
        quotes[k] = np.array([_float(r, k, path) for r in rows])
    return MarketSeries(tuple(r["date"] for r in rows), quotes)


def compute_hist_correlation(series: MarketSeries) -> float:
    """Pearson correlation of consecutive log-returns of the two forwards."""
    if len(series.dates) < MIN_OBSERVATIONS:
        raise IngestionError(f"need >= {MIN_OBSERVATIONS} observations, got {len(series.dates)}", ["n >= 30"])
    r1, r2 = (np.diff(np.log(np.asarray(v, dtype=float))) for v in series.quotes.values())
    if np.std(r1) == 0 or np.std(r2) == 0:
        raise IngestionError("constant series: correlation undefined", ["non-constant returns"])
    rho = float(np.corrcoef(r1, r2)[0, 1])
    return max(-1.0, min(1.0, rho))


# ---------------------------------------------------------------- argument grids

def parse_grid(text: str) -> np.ndarray:
    """``"0,0.25,0.5"`` or ``"T:n"`` (n uniform steps from 0 to T)."""
    try:
        if ":" in text:
            T, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            return np.linspace(0.0, float(T), n + 1)
        return np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise ValidationError(f"bad grid {text!r}: use 't0,t1,...' or 'T:n'", ["grid syntax"]) from exc


def parse_k_grid(text: str) -> list[float]:
    """``"0,1,2"`` or ``"start:stop:step"`` (stop included)."""
    try:
        if ":" in text:
            a, b, h = (float(x) for x in text.split(":"))
            if h <= 0 or b < a:
                raise ValueError
            n = int(math.floor((b - a) / h + 1e-9))
            return [a + i * h for i in range(n + 1)]
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad strike grid {text!r}: use 'k0,k1,...' or 'start:stop:step'", ["k-grid syntax"]) from exc


def parse_float_list(text: str, name: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad {name} list {text!r}", [f"{name} syntax"]) from exc
