"""Decision-ready outputs: quadrant labels, scatter and choropleth data, summary tables.

Everything here emits plot *data*; rendering is left to downstream tools.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import SummaryRow
from .indicators import OVERALL, TerritoryScore
from .io import json_value, write_csv, write_json
from .models import SpecialtyConfig, ValidationError
from .territory import Level, TerritoryIndex

CUTOFF = 1.0


class Quadrant(enum.Enum):
    UPPER_RIGHT = "UpperRight"
    UPPER_LEFT = "UpperLeft"
    LOWER_RIGHT = "LowerRight"
    LOWER_LEFT = "LowerLeft"

    def __str__(self):
        return self.value


def classify_quadrant(normalized_kc_pc: float, mean_normalized_fss: float | None) -> Quadrant:
    """Place a territory relative to the national averages; exactly 1.0 counts as above."""
    if mean_normalized_fss is None:
        raise ValueError("territory has no professors, so it has no performance score")
    for value in (normalized_kc_pc, mean_normalized_fss):
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"scores must be finite and non-negative, got {value!r}")
    right = normalized_kc_pc >= CUTOFF
    upper = mean_normalized_fss >= CUTOFF
    if upper:
        return Quadrant.UPPER_RIGHT if right else Quadrant.UPPER_LEFT
    return Quadrant.LOWER_RIGHT if right else Quadrant.LOWER_LEFT


def slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_") or "x"


@dataclass
class ScatterData:
    level: Level
    specialty: str
    rows: list[dict] = field(default_factory=list)
    excluded: list[dict] = field(default_factory=list)


SCATTER_COLUMNS = ("code", "name", "x", "y", "quadrant", "professor_count", "low_headcount_flag")


def scatter_data(scores: Sequence[TerritoryScore], level: Level, specialty: str,
                 index: TerritoryIndex) -> ScatterData:
    level = Level(level)
    selected = [s for s in scores if s.level is level and s.specialty == specialty]
    if not selected:
        known = sorted({s.specialty for s in scores if s.level is level})
        if not known:
            raise ValidationError(f"no scores computed at level {level.name}")
        raise ValidationError(f"unknown specialty {specialty!r}; known: {', '.join(known)}")
    data = ScatterData(level, specialty)
    for s in sorted(selected, key=lambda s: s.territory_code):
        name = index[s.territory_code].name
        if s.mean_normalized_fss is None:
            data.excluded.append({"code": s.territory_code, "name": name, "reason": "no-staff"})
            continue
        data.rows.append({
            "code": s.territory_code,
            "name": name,
            "x": s.normalized_kc_pc,
            "y": s.mean_normalized_fss,
            "quadrant": classify_quadrant(s.normalized_kc_pc, s.mean_normalized_fss).value,
            "professor_count": s.professor_count,
            "low_headcount_flag": s.low_headcount_flag,
        })
    return data


def emit_scatter(scores: Sequence[TerritoryScore], level: Level, specialty: str, index: TerritoryIndex,
                 out_dir, *, fmt: str = "csv", manifest: str | None = None) -> tuple[ScatterData, list[Path]]:
    """Write one scatter file (plus an excluded-territory list for CSV)."""
    data = scatter_data(scores, level, specialty, index)
    stem = f"scatter_{Level(level).label}_{slug(specialty)}"
    out_dir = Path(out_dir)
    if fmt == "json":
        payload = {
            "level": data.level.label,
            "specialty": data.specialty,
            "rows": [{k: json_value(v) for k, v in r.items()} for r in data.rows],
            "excluded": data.excluded,
        }
        return data, [write_json(out_dir / f"{stem}.json", payload, manifest=manifest)]
    paths = [
        write_csv(out_dir / f"{stem}.csv", SCATTER_COLUMNS,
                  ([r[c] for c in SCATTER_COLUMNS] for r in data.rows), manifest=manifest),
        write_csv(out_dir / f"{stem}_excluded.csv", ("code", "name", "reason"),
                  ([r["code"], r["name"], r["reason"]] for r in data.excluded), manifest=manifest),
    ]
    return data, paths


def choropleth_data(values: Mapping[str, float], level: Level, index: TerritoryIndex) -> tuple[list, dict]:
    level = Level(level)
    unknown = sorted(c for c in values if c not in index)
    if unknown:
        raise ValidationError(f"territories absent from the gazetteer: {', '.join(unknown)}")
    wrong = sorted(c for c in values if index[c].level is not level)
    if wrong:
        raise ValidationError(f"territories not at level {level.name}: {', '.join(wrong)}")
    rows = [(code, index[code].name, values[code]) for code in sorted(values)]
    nums = [v for _, _, v in rows if v is not None]
    legend = {
        "min": min(nums) if nums else None,
        "max": max(nums) if nums else None,
        "mean": math.fsum(nums) / len(nums) if nums else None,
    }
    return rows, legend


def emit_choropleth(values: Mapping[str, float], level: Level, index: TerritoryIndex, path, *,
                    fmt: str = "csv", manifest: str | None = None, metric: str = "value") -> Path:
    """Write ``(code, name, value)`` rows with a min/max/mean legend block.

    In CSV the legend sits in ``#min``/``#max``/``#mean`` comment lines ahead
    of the header.
    """
    rows, legend = choropleth_data(values, level, index)
    path = Path(path)
    if fmt == "json":
        payload = {
            "level": Level(level).label,
            "metric": metric,
            "legend": {k: json_value(v) for k, v in legend.items()},
            "rows": [{"code": c, "name": n, "value": json_value(v)} for c, n, v in rows],
        }
        return write_json(path.with_suffix(".json"), payload, manifest=manifest)
    return write_csv(path.with_suffix(".csv"), ("code", "name", "value"), rows, manifest=manifest,
                     preamble=[("metric", metric), *legend.items()])


def summary_rows(rows: Sequence[SummaryRow]):
    return [(r.specialty, r.publications, r.citations, r.authorships, r.provinces, r.regions) for r in rows]


SUMMARY_COLUMNS = ("specialty", "publications", "citations", "authorships", "provinces", "regions")


def emit_summary(rows: Sequence[SummaryRow], path, *, manifest: str | None = None) -> Path:
    return write_csv(path, SUMMARY_COLUMNS, summary_rows(rows), manifest=manifest)


def region_overview(scores: Sequence[TerritoryScore], config: SpecialtyConfig, index: TerritoryIndex,
                    level: Level = Level.NUTS2) -> tuple[list[str], list[list]]:
    """One row per territory: normalized KC_PC per specialty with the all-specialty mean,
    then mean normalized FSS per specialty with the covered-specialty mean."""
    level = Level(level)
    names = [s.name for s in config.specialties]
    cells: dict[tuple[str, str], TerritoryScore] = {
        (s.territory_code, s.specialty): s for s in scores if s.level is level
    }
    header = ["code", "name", "parent", "population_millions", "total_professors", "specialties_covered_pct"]
    header += [f"kc_pc:{n}" for n in names] + ["kc_pc:total"]
    header += [f"fss:{n}" for n in names] + ["fss:total"]
    rows = []
    for code in index.codes_at(level):
        overall = cells.get((code, OVERALL))
        if overall is None:
            continue
        per = [cells[(code, n)] for n in names]
        covered = sum(1 for s in per if s.mean_normalized_fss is not None)
        pop = index.population(code)
        row = [code, index[code].name, index.parent(code) or "",
               pop / 1e6 if pop is not None else None, overall.professor_count,
               100.0 * covered / len(names) if names else 0.0]
        row += [s.normalized_kc_pc for s in per] + [overall.normalized_kc_pc]
        row += [s.mean_normalized_fss for s in per] + [overall.mean_normalized_fss]
        rows.append(row)
    return header, rows


def emit_region_overview(scores, config, index, path, *, level: Level = Level.NUTS2,
                         manifest: str | None = None) -> Path:
    header, rows = region_overview(scores, config, index, level)
    return write_csv(path, header, rows, manifest=manifest)
