"""Territorial hierarchy: LAU -> NUTS3 -> NUTS2 -> NUTS1 (-> NATION).

The index is built once from a gazetteer and a population table and is
read-only afterwards.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .io import read_csv
from .models import InstitutionRecord, ValidationError, fold


class Level(enum.IntEnum):
    LAU = 0
    NUTS3 = 1
    NUTS2 = 2
    NUTS1 = 3
    NATION = 4

    @classmethod
    def parse(cls, text: str) -> "Level":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown territorial level {text!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


# rollup key used when the gazetteer carries no explicit NATION node
NATION_TOTAL = "NATION"


class Resolution(enum.Enum):
    FOREIGN = "Foreign"
    UNRESOLVED = "Unresolved"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class TerritoryNode:
    code: str
    level: Level
    name: str
    parent: str | None
    population: int | None = None
    aliases: tuple[str, ...] = ()


class TerritoryIndex:
    def __init__(self, nodes: Iterable[TerritoryNode], country: str = "Italy"):
        self.country = country
        self._nodes: dict[str, TerritoryNode] = {}
        for node in nodes:
            if node.code in self._nodes:
                raise ValidationError(f"duplicate territory code {node.code!r}")
            self._nodes[node.code] = node
        self._check_hierarchy()

        self._children: dict[str, list[str]] = {code: [] for code in self._nodes}
        for node in self._nodes.values():
            if node.parent:
                self._children[node.parent].append(node.code)
        for kids in self._children.values():
            kids.sort()

        self._by_level: dict[Level, list[str]] = {lvl: [] for lvl in Level}
        for code in sorted(self._nodes):
            self._by_level[self._nodes[code].level].append(code)

        self._population = self._resolve_populations()
        self._city_lookup = self._build_city_lookup()

    def _check_hierarchy(self):
        for node in self._nodes.values():
            if node.parent and node.parent not in self._nodes:
                raise ValidationError(
                    f"orphan territory {node.code!r}: parent {node.parent!r} is not in the gazetteer"
                )
        for start in self._nodes:
            seen = [start]
            parent = self._nodes[start].parent
            while parent:
                if parent in seen:
                    cycle = " -> ".join(seen[seen.index(parent):] + [parent])
                    raise ValidationError(f"cycle in territorial hierarchy: {cycle}")
                seen.append(parent)
                parent = self._nodes[parent].parent
        for node in self._nodes.values():
            if node.level is Level.NATION:
                if node.parent:
                    raise ValidationError(f"NATION node {node.code!r} cannot have a parent")
                continue
            if not node.parent:
                if node.level is Level.NUTS1:
                    continue
                raise ValidationError(f"orphan territory {node.code!r}: {node.level.name} node without parent")
            parent = self._nodes[node.parent]
            if parent.level != node.level + 1:
                raise ValidationError(
                    f"territory {node.code!r} ({node.level.name}) has parent {parent.code!r} "
                    f"at level {parent.level.name}, expected {Level(node.level + 1).name}"
                )

    def _resolve_populations(self) -> dict[str, int | None]:
        resolved: dict[str, int | None] = {}
        for level in Level:
            for code in self._by_level[level]:
                node = self._nodes[code]
                if node.population is not None:
                    resolved[code] = node.population
                    continue
                kids = self._children[code]
                if kids and all(resolved[k] is not None for k in kids):
                    resolved[code] = sum(resolved[k] for k in kids)
                else:
                    resolved[code] = None
        return resolved

    def _build_city_lookup(self) -> dict[str, str]:
        lookup: dict[str, str] = {}
        for code in self._by_level[Level.LAU]:
            node = self._nodes[code]
            for key in {fold(node.name), *(fold(a) for a in node.aliases)}:
                if not key:
                    continue
                other = lookup.get(key)
                if other is not None and other != code:
                    raise ValidationError(
                        f"ambiguous city name {key!r} shared by LAUs {other!r} and {code!r}; "
                        "disambiguate with aliases"
                    )
                lookup[key] = code
        return lookup

    def __contains__(self, code) -> bool:
        return code in self._nodes

    def __getitem__(self, code: str) -> TerritoryNode:
        return self._nodes[code]

    def __len__(self):
        return len(self._nodes)

    def codes_at(self, level: Level) -> list[str]:
        return list(self._by_level[level])

    def children(self, code: str) -> list[str]:
        return list(self._children[code])

    def parent(self, code: str) -> str | None:
        return self._nodes[code].parent

    def ancestor(self, code: str, level: Level) -> str | None:
        node = self._nodes[code]
        while node.level < level:
            if not node.parent:
                return None
            node = self._nodes[node.parent]
        return node.code if node.level == level else None

    def ancestors(self, code: str) -> list[str]:
        chain = []
        parent = self._nodes[code].parent
        while parent:
            chain.append(parent)
            parent = self._nodes[parent].parent
        return chain

    def population(self, code: str) -> int | None:
        return self._population[code]

    def national_population(self) -> int | None:
        nations = self._by_level[Level.NATION]
        if nations:
            return self._population[nations[0]]
        tops = self._by_level[Level.NUTS1]
        if tops and all(self._population[c] is not None for c in tops):
            return sum(self._population[c] for c in tops)
        return None

    def lookup_city(self, city: str) -> str | None:
        return self._city_lookup.get(fold(city))

    def is_domestic(self, country: str) -> bool:
        return fold(country) == fold(self.country)


def build_index(gazetteer_path, population_path=None, *, country: str = "Italy") -> TerritoryIndex:
    populations: dict[str, int] = {}
    if population_path is not None:
        for line, row in read_csv(population_path, ("code", "population")):
            code = row["code"].strip()
            try:
                value = int(row["population"])
            except ValueError:
                raise ValidationError("population must be an integer", path=population_path, line=line,
                                      field="population") from None
            if value < 0:
                raise ValidationError("population must be non-negative", path=population_path, line=line,
                                      field="population")
            if code in populations:
                raise ValidationError(f"duplicate population row for {code!r}", path=population_path, line=line)
            populations[code] = value

    nodes = []
    for line, row in read_csv(gazetteer_path, ("code", "level", "name", "parent_code")):
        code = row["code"].strip()
        if not code:
            raise ValidationError("empty territory code", path=gazetteer_path, line=line, field="code")
        try:
            level = Level.parse(row["level"])
        except ValueError as exc:
            raise ValidationError(str(exc), path=gazetteer_path, line=line, field="level") from None
        aliases = tuple(a.strip() for a in (row.get("aliases") or "").split(";") if a.strip())
        nodes.append(TerritoryNode(code, level, row["name"].strip(), row["parent_code"].strip() or None,
                                   populations.get(code), aliases))

    known = {n.code for n in nodes}
    unknown = sorted(set(populations) - known)
    if unknown:
        raise ValidationError(f"population rows for codes absent from the gazetteer: {', '.join(unknown)}",
                              path=population_path)
    return TerritoryIndex(nodes, country=country)


def reduce_address(city: str, country: str, index: TerritoryIndex) -> str | Resolution:
    """Map a ``city, country`` address to a LAU code, ``FOREIGN`` or ``UNRESOLVED``."""
    if not index.is_domestic(country):
        return Resolution.FOREIGN
    code = index.lookup_city(city)
    return Resolution.UNRESOLVED if code is None else code


def resolve_institutions(
    institutions: Mapping[str, InstitutionRecord], index: TerritoryIndex
) -> tuple[dict[str, InstitutionRecord], list[InstitutionRecord]]:
    """Fill missing LAU codes of domestic institutions from their city.

    Returns the updated mapping and the domestic institutions whose city
    could not be resolved (their ``lau_code`` stays ``None``).
    """
    resolved = {}
    unresolved = []
    for inst_id in sorted(institutions):
        inst = institutions[inst_id]
        if inst.lau_code is not None:
            if inst.lau_code not in index or index[inst.lau_code].level is not Level.LAU:
                raise ValidationError(f"institution {inst_id!r} references unknown LAU {inst.lau_code!r}")
            resolved[inst_id] = inst
            continue
        where = reduce_address(inst.city, inst.country, index)
        if where is Resolution.UNRESOLVED:
            unresolved.append(inst)
            resolved[inst_id] = inst
        elif where is Resolution.FOREIGN:
            resolved[inst_id] = inst
        else:
            resolved[inst_id] = replace(inst, lau_code=where)
    return resolved, unresolved


def rollup(values: Mapping[str, float], target_level: Level, index: TerritoryIndex) -> dict[str, float]:
    """Sum values up the hierarchy to ``target_level``.

    Keys must all sit at one level at or below the target. Aggregation
    always climbs one level at a time with children visited in code order,
    so rolling up in one jump or in several hops gives identical floats.
    """
    target_level = Level(target_level)
    if not values:
        return {}
    levels = set()
    for code in values:
        if code not in index:
            raise ValidationError(f"unknown territory code {code!r} in rollup input")
        levels.add(index[code].level)
    if len(levels) != 1:
        raise ValidationError(f"rollup input mixes levels: {sorted(l.name for l in levels)}")
    (source,) = levels
    if source > target_level:
        raise ValidationError(f"cannot roll {source.name} values down to {target_level.name}")

    current = {code: values[code] for code in sorted(values)}
    level = source
    while level < target_level:
        parent_level = Level(level + 1)
        if parent_level is Level.NATION and not index.codes_at(Level.NATION):
            acc = 0.0
            for code in sorted(current):
                acc += current[code]
            return {NATION_TOTAL: acc}
        totals: dict[str, float] = {}
        for code in index.codes_at(parent_level):
            kids = [k for k in index.children(code) if k in current]
            if kids:
                acc = 0.0
                for k in kids:
                    acc += current[k]
                totals[code] = acc
        current = totals
        level = parent_level
    return current
