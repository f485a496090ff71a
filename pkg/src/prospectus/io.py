"""File formats: CSV schemas for survey data and deterministic output writers.

All CSV files are UTF-8 with an exact header row; unknown or missing
columns are schema errors that name the offending column, and bad cells
are reported with their line number.  Output floats are printed with 12
significant digits so repeated runs hash identically.

Schemas (documented in the README as well):

- options.csv: mode,t_walk,t_wait,t_ride,tariff
- choice.csv:  respondent_id,situation_id,mode,t_walk,t_wait,t_ride,tariff,chosen
- ce.csv:      u_lo,u_hi,p_lo,ce
- lottery.csv: respondent_id,lottery_id,frame,p,gain,loss,response
- series.csv:  gamma plus one column per emitted curve
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

from .choice import TripOption
from .errors import ProspectusError, SchemaError
from .estimation import (
    CertaintyEquivalentObservation,
    ChoiceObservation,
    Frame,
    LotteryResponse,
)
from .experiments import ExperimentSeries
from .types import Mode, TripTimes

SCHEMA_VERSION = 1

OPTIONS_COLUMNS = ("mode", "t_walk", "t_wait", "t_ride", "tariff")
CHOICE_COLUMNS = ("respondent_id", "situation_id", "mode",
                  "t_walk", "t_wait", "t_ride", "tariff", "chosen")
CE_COLUMNS = ("u_lo", "u_hi", "p_lo", "ce")
LOTTERY_COLUMNS = ("respondent_id", "lottery_id", "frame", "p", "gain", "loss", "response")


def fmt(x: float) -> str:
    """Canonical 12-significant-digit rendering of a float."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".12g")
    return str(x)


def dumps_json(obj, indent: int = 2) -> str:
    """Serialize to JSON with sorted keys and canonical float rendering.

    Infinities are emitted as the strings "inf"/"-inf" (JSON has no
    representation for them).
    """
    out: list[str] = []
    _emit(obj, out, indent, 0)
    out.append("\n")
    return "".join(out)


def _emit(obj, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    close_pad = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, float):
        if math.isfinite(obj):
            out.append(fmt(obj))
        else:
            out.append(f'"{fmt(obj)}"')
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj, key=str)
        for i, key in enumerate(keys):
            out.append(f"{pad}{_escape(str(key))}: ")
            _emit(obj[key], out, indent, level + 1)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(close_pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not len(obj):
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(obj):
            out.append(pad)
            _emit(item, out, indent, level + 1)
            out.append(",\n" if i + 1 < len(obj) else "\n")
        out.append(close_pad + "]")
    else:
        raise ProspectusError(f"cannot serialize value of type {type(obj).__name__}")


def _escape(s: str) -> str:
    escaped = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


def write_json(path: Path, payload: dict) -> None:
    body = dict(payload)
    body.setdefault("schema_version", SCHEMA_VERSION)
    Path(path).write_text(dumps_json(body), encoding="utf-8")


# ---------------------------------------------------------------------------
# CSV readers
# ---------------------------------------------------------------------------


def _read_rows(path: Path, columns: Sequence[str]) -> list[dict[str, str]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{path}: file is empty; expected header {','.join(columns)}")
    header = [h.strip() for h in header]
    missing = [c for c in columns if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    unknown = [c for c in header if c not in columns]
    if unknown:
        raise SchemaError(f"{path}: unknown column(s) {', '.join(unknown)}")
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise SchemaError(
                f"{path}:{line_no}: expected {len(header)} cells, got {len(row)}")
        rows.append({name: cell.strip() for name, cell in zip(header, row)})
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _cell_float(path: Path, line_no: int, row: dict[str, str], column: str) -> float:
    try:
        return float(row[column])
    except ValueError:
        raise SchemaError(
            f"{path}:{line_no}: column {column!r} is not a number: {row[column]!r}")


def _cell_int(path: Path, line_no: int, row: dict[str, str], column: str) -> int:
    try:
        return int(row[column])
    except ValueError:
        raise SchemaError(
            f"{path}:{line_no}: column {column!r} is not an integer: {row[column]!r}")


def _cell_mode(path: Path, line_no: int, row: dict[str, str]) -> Mode:
    try:
        return Mode(row["mode"])
    except ValueError:
        valid = ", ".join(m.value for m in Mode)
        raise SchemaError(
            f"{path}:{line_no}: column 'mode' must be one of {valid}, got {row['mode']!r}")


def _wrap_row_error(path: Path, line_no: int, exc: Exception) -> SchemaError:
    return SchemaError(f"{path}:{line_no}: {exc}")


def read_trip_options(path: Path) -> list[TripOption]:
    """Read a set of trip alternatives (options.csv schema)."""
    options = []
    for line_no, row in enumerate(_read_rows(path, OPTIONS_COLUMNS), start=2):
        try:
            options.append(TripOption(
                mode=_cell_mode(path, line_no, row),
                times=TripTimes(
                    _cell_float(path, line_no, row, "t_walk"),
                    _cell_float(path, line_no, row, "t_wait"),
                    _cell_float(path, line_no, row, "t_ride"),
                ),
                tariff=_cell_float(path, line_no, row, "tariff"),
            ))
        except ProspectusError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise _wrap_row_error(path, line_no, exc) from exc
    return options


def read_choice_observations(path: Path) -> list[ChoiceObservation]:
    """Read stated-choice data (choice.csv schema, long format).

    Rows sharing (respondent_id, situation_id) form one choice situation;
    exactly one row per situation must have chosen=1, the rest chosen=0.
    """
    grouped: dict[tuple[str, str], list[tuple[int, TripOption, int]]] = {}
    for line_no, row in enumerate(_read_rows(path, CHOICE_COLUMNS), start=2):
        try:
            option = TripOption(
                mode=_cell_mode(path, line_no, row),
                times=TripTimes(
                    _cell_float(path, line_no, row, "t_walk"),
                    _cell_float(path, line_no, row, "t_wait"),
                    _cell_float(path, line_no, row, "t_ride"),
                ),
                tariff=_cell_float(path, line_no, row, "tariff"),
            )
        except ProspectusError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise _wrap_row_error(path, line_no, exc) from exc
        chosen = _cell_int(path, line_no, row, "chosen")
        if chosen not in (0, 1):
            raise SchemaError(f"{path}:{line_no}: column 'chosen' must be 0 or 1")
        key = (row["respondent_id"], row["situation_id"])
        grouped.setdefault(key, []).append((line_no, option, chosen))
    observations = []
    for (respondent_id, situation_id), rows in grouped.items():
        picked = [i for i, (_, _, ch) in enumerate(rows) if ch == 1]
        if len(picked) != 1:
            raise SchemaError(
                f"{path}: situation {situation_id!r} of respondent {respondent_id!r} "
                f"must have exactly one chosen row, found {len(picked)}")
        try:
            observations.append(ChoiceObservation(
                respondent_id=respondent_id,
                options=tuple(opt for _, opt, _ in rows),
                chosen=picked[0],
            ))
        except ProspectusError as exc:
            raise _wrap_row_error(path, rows[0][0], exc) from exc
    return observations


def read_certainty_equivalents(path: Path) -> list[CertaintyEquivalentObservation]:
    """Read certainty-equivalent elicitation data (ce.csv schema)."""
    observations = []
    for line_no, row in enumerate(_read_rows(path, CE_COLUMNS), start=2):
        try:
            observations.append(CertaintyEquivalentObservation(
                u_lo=_cell_float(path, line_no, row, "u_lo"),
                u_hi=_cell_float(path, line_no, row, "u_hi"),
                p_lo=_cell_float(path, line_no, row, "p_lo"),
                ce=_cell_float(path, line_no, row, "ce"),
            ))
        except ProspectusError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise _wrap_row_error(path, line_no, exc) from exc
    return observations


def read_lottery_responses(path: Path) -> list[LotteryResponse]:
    """Read lottery survey answers (lottery.csv schema)."""
    responses = []
    for line_no, row in enumerate(_read_rows(path, LOTTERY_COLUMNS), start=2):
        frame_cell = row["frame"]
        try:
            frame = Frame(frame_cell)
        except ValueError:
            valid = ", ".join(f.value for f in Frame)
            raise SchemaError(
                f"{path}:{line_no}: column 'frame' must be one of {valid}, got {frame_cell!r}")
        try:
            responses.append(LotteryResponse(
                respondent_id=row["respondent_id"],
                lottery_id=row["lottery_id"],
                frame=frame,
                p=_cell_float(path, line_no, row, "p"),
                gain=_cell_float(path, line_no, row, "gain"),
                loss=_cell_float(path, line_no, row, "loss"),
                response=_cell_float(path, line_no, row, "response"),
            ))
        except ProspectusError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise _wrap_row_error(path, line_no, exc) from exc
    return responses


# ---------------------------------------------------------------------------
# CSV / JSON writers
# ---------------------------------------------------------------------------


def write_series_csv(path: Path, series: ExperimentSeries) -> None:
    names = series.column_names()
    lines = ["gamma," + ",".join(names)]
    for i, g in enumerate(series.gamma):
        cells = [fmt(float(g))] + [fmt(float(series.columns[n][i])) for n in names]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_series_json(path: Path, series: ExperimentSeries) -> None:
    write_json(Path(path), {
        "metadata": dict(series.metadata),
        "gamma": [float(g) for g in series.gamma],
        "columns": {n: [float(v) for v in series.columns[n]] for n in series.column_names()},
    })


def write_lottery_csv(path: Path, responses: Iterable[LotteryResponse]) -> None:
    lines = [",".join(LOTTERY_COLUMNS)]
    for r in responses:
        lines.append(",".join([r.respondent_id, r.lottery_id, r.frame.value,
                               fmt(r.p), fmt(r.gain), fmt(r.loss), fmt(r.response)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_ce_csv(path: Path, observations: Iterable[CertaintyEquivalentObservation]) -> None:
    lines = [",".join(CE_COLUMNS)]
    for o in observations:
        lines.append(",".join([fmt(o.u_lo), fmt(o.u_hi), fmt(o.p_lo), fmt(o.ce)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_choice_csv(path: Path, observations: Iterable[ChoiceObservation]) -> None:
    lines = [",".join(CHOICE_COLUMNS)]
    by_resp: dict[str, int] = {}
    for o in observations:
        situation = by_resp.get(o.respondent_id, 0)
        by_resp[o.respondent_id] = situation + 1
        for a, option in enumerate(o.options):
            lines.append(",".join([
                o.respondent_id, str(situation), option.mode.value,
                fmt(option.times.walk), fmt(option.times.wait), fmt(option.times.ride),
                fmt(option.tariff), "1" if a == o.chosen else "0",
            ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
