"""The four numeral systems and exact readings of notations.

Digit values are fixed per system (not positional) and larger quantities
repeat a digit, so a notation's reading is a sum of count x value terms in
exact rationals.  A reading is invalid (None) when a sign is not used by
the system or a digit is repeated more times than the bundling step to the
next-higher digit allows.

Two built-in table profiles are shipped:

* ``paper-examples`` (default): identifies N45 as the 3600-valued top of
  the sexagesimal chain and values N08/N8B at 1/2, which is what the
  published worked examples require.
* ``figure1-chain``: keeps only the digit identities that the bundling
  diagram itself establishes, naming every other chain position U1..Uk.

The two cannot be merged: the worked-example identities conflict with a
literal reading of the bundling diagram, and the historical identity of the
high-value sexagesimal glyphs is uncertain.  Placeholder signs (U-names)
hold their chain positions so bundling limits stay correct, but they can
never occur in a transliterated notation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import ceil
from pathlib import Path
from typing import Mapping, Sequence

from .atf import DigitRun, NumeralNotation, SignToken, is_digit_name


class System(str, Enum):
    B = "B"
    C = "C"
    D = "D"
    S = "S"

    def __str__(self) -> str:  # stable across py versions
        return self.value


#: Fixed order used for iteration and deterministic tie-breaking.
SYSTEM_ORDER: tuple[System, ...] = (System.B, System.C, System.D, System.S)


class TableError(ValueError):
    """Bad system-table definition or config file."""


class NotRepresentableError(ValueError):
    """Value cannot be written with the system's transliterable digits."""


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise TableError(f"bad rational literal {text!r}") from exc


ANCHOR_SIGN = "N01"


@dataclass(frozen=True)
class SystemTable:
    """One system's digit values and per-digit repeat limits.

    ``chain`` is ascending: each (sign, multiplier) pair says how many
    copies of the sign equal one of the next sign up; the top sign has
    multiplier None.  ``max_counts`` maps each sign to multiplier - 1
    (None = unbounded, top of the chain).
    """

    system: System
    chain: tuple[tuple[str, int | None], ...]
    values: Mapping[str, Fraction]
    max_counts: Mapping[str, int | None]

    def signs(self) -> tuple[str, ...]:
        return tuple(self.values)

    def digit_signs(self) -> tuple[str, ...]:
        """Signs that can actually occur in notations (placeholders excluded)."""
        return tuple(s for s in self.values if is_digit_name(s))

    def chain_signs_descending(self) -> tuple[str, ...]:
        return tuple(sign for sign, _ in reversed(self.chain))


def build_table(
    system: System,
    chain: Sequence[tuple[str, int | None]],
    extra_signs: Mapping[str, Fraction] | None = None,
    anchor: str = ANCHOR_SIGN,
) -> SystemTable:
    """Derive absolute values and repeat limits from a bundling chain.

    The chain is ascending and anchored at value(anchor) = 1; signs below
    the anchor get fractional values.  ``extra_signs`` adds non-chain signs
    with explicit values (their repeat limit derives from the next-higher
    table value).
    """
    if not chain:
        raise TableError("empty chain")
    signs = [sign for sign, _ in chain]
    if len(set(signs)) != len(signs):
        raise TableError(f"duplicate sign in chain for {system}")
    if anchor not in signs:
        raise TableError(f"chain for {system} is missing the anchor sign {anchor}")
    for sign, mult in chain[:-1]:
        if mult is None or mult < 2:
            raise TableError(f"multiplier for {sign} must be an integer >= 2")
    if chain[-1][1] is not None:
        raise TableError("top-of-chain sign must have multiplier None")

    values: dict[str, Fraction] = {}
    anchor_idx = signs.index(anchor)
    values[anchor] = Fraction(1)
    for i in range(anchor_idx + 1, len(signs)):
        values[signs[i]] = values[signs[i - 1]] * chain[i - 1][1]
    for i in range(anchor_idx - 1, -1, -1):
        values[signs[i]] = values[signs[i + 1]] / chain[i][1]

    max_counts: dict[str, int | None] = {
        sign: (mult - 1 if mult is not None else None) for sign, mult in chain
    }

    for sign, value in (extra_signs or {}).items():
        if sign in values:
            raise TableError(f"extra sign {sign} already in chain for {system}")
        if value <= 0:
            raise TableError(f"extra sign {sign} must have a positive value")
        values[sign] = value
        higher = [v for v in values.values() if v > value]
        max_counts[sign] = ceil(min(higher) / value) - 1 if higher else None

    ordered = dict(sorted(values.items(), key=lambda kv: kv[1]))
    return SystemTable(system, tuple(chain), ordered, max_counts)


# --------------------------------------------------------------------------
# Built-in table profiles
# --------------------------------------------------------------------------

PROFILE_PAPER_EXAMPLES = "paper-examples"
PROFILE_FIGURE1_CHAIN = "figure1-chain"
PROFILES = (PROFILE_PAPER_EXAMPLES, PROFILE_FIGURE1_CHAIN)

_BUILTIN_CHAINS: dict[str, dict[System, dict]] = {
    PROFILE_PAPER_EXAMPLES: {
        # N45 = 3600 at the top (required by the worked examples); the
        # unidentified 600-valued sign keeps its slot as U1.  N8B is the
        # half unit below N01; N08 is its attested variant, same value.
        System.S: {
            "chain": [("N8B", 2), ("N01", 10), ("N14", 6), ("N34", 10), ("U1", 6), ("N45", None)],
            "extra": {"N08": Fraction(1, 2)},
        },
        System.D: {
            "chain": [("N01", 10), ("N14", 10), ("U3", 10), ("U2", 10), ("U1", None)],
        },
        System.B: {
            "chain": [("N01", 10), ("N14", 6), ("N34", 2), ("N51", 10), ("U1", None)],
        },
        System.C: {
            "chain": [
                ("U5", 2), ("U4", 2), ("U3", 3), ("U2", 2), ("N39B", 5),
                ("N01", 6), ("N14", 10), ("N45", 3), ("N34", 10), ("N48", 6),
                ("U1", None),
            ],
        },
    },
    PROFILE_FIGURE1_CHAIN: {
        System.S: {
            "chain": [("U3", 2), ("N01", 10), ("N14", 6), ("N34", 10), ("U2", 6), ("U1", None)],
        },
        System.D: {
            "chain": [("N01", 10), ("N14", 10), ("U3", 10), ("U2", 10), ("U1", None)],
        },
        System.B: {
            "chain": [("N01", 10), ("N14", 6), ("N34", 2), ("N51", 10), ("U1", None)],
        },
        System.C: {
            "chain": [
                ("U6", 2), ("U5", 2), ("U4", 3), ("U3", 2), ("U2", 5),
                ("N01", 6), ("N14", 10), ("N45", 3), ("N34", 10), ("N48", 6),
                ("U1", None),
            ],
        },
    },
}

TableSet = dict[System, SystemTable]


def builtin_tables(profile: str = PROFILE_PAPER_EXAMPLES) -> TableSet:
    try:
        spec = _BUILTIN_CHAINS[profile]
    except KeyError:
        raise TableError(f"unknown table profile {profile!r}; known: {', '.join(PROFILES)}")
    return {
        system: build_table(system, entry["chain"], entry.get("extra"))
        for system, entry in spec.items()
    }


def tables_to_config(tables: TableSet, name: str = "custom") -> dict:
    """Render a table set as the JSON config structure."""
    systems = {}
    for system in SYSTEM_ORDER:
        table = tables[system]
        chain_signs = {sign for sign, _ in table.chain}
        systems[system.value] = {
            "anchor": ANCHOR_SIGN,
            "chain": [[sign, mult] for sign, mult in table.chain],
            "extra": {
                sign: format_rational(value)
                for sign, value in table.values.items()
                if sign not in chain_signs
            },
        }
    return {"name": name, "systems": systems}


def tables_from_config(config: dict) -> TableSet:
    try:
        systems_cfg = config["systems"]
    except (TypeError, KeyError):
        raise TableError("config must be an object with a 'systems' key")
    tables: TableSet = {}
    for system in SYSTEM_ORDER:
        if system.value not in systems_cfg:
            raise TableError(f"config missing system {system.value!r}")
        entry = systems_cfg[system.value]
        chain = [(sign, mult) for sign, mult in entry["chain"]]
        extra = {
            sign: parse_rational(text) for sign, text in entry.get("extra", {}).items()
        }
        tables[system] = build_table(
            system, chain, extra, anchor=entry.get("anchor", ANCHOR_SIGN)
        )
    return tables


def load_tables_config(path: str | Path) -> TableSet:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            config = json.load(handle)
        except json.JSONDecodeError as exc:
            raise TableError(f"invalid JSON in {path}: {exc}") from exc
    return tables_from_config(config)


# --------------------------------------------------------------------------
# Readings
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReadingSet:
    """Per-system readings of one notation; None marks an invalid reading."""

    by_system: Mapping[System, Fraction | None]

    def __getitem__(self, system: System) -> Fraction | None:
        return self.by_system[system]

    @property
    def valid_systems(self) -> tuple[System, ...]:
        return tuple(s for s in SYSTEM_ORDER if self.by_system[s] is not None)

    @property
    def is_unambiguous(self) -> bool:
        return len(self.valid_systems) == 1

    @property
    def sole_system(self) -> System | None:
        valid = self.valid_systems
        return valid[0] if len(valid) == 1 else None


def value_of(
    notation: NumeralNotation,
    table: SystemTable,
    enforce_max_counts: bool = True,
    slack: int = 0,
) -> Fraction | None:
    """Exact reading of a notation in one system, or None if invalid.

    Invalid means a sign the system does not use, or (unless disabled for
    diagnostics) a run repeated past the bundling limit.  ``slack`` relaxes
    every limit by that many extra repeats, for lenient scans of noisy
    corpora.  Invalidity is absorbing: one bad run invalidates the whole
    notation.
    """
    total = Fraction(0)
    for run in notation.runs:
        value = table.values.get(run.sign.name)
        if value is None:
            return None
        if enforce_max_counts:
            limit = table.max_counts.get(run.sign.name)
            if limit is not None and run.count > limit + slack:
                return None
        total += run.count * value
    return total


def readings(
    notation: NumeralNotation,
    tables: TableSet,
    enforce_max_counts: bool = True,
    slack: int = 0,
) -> ReadingSet:
    return ReadingSet(
        {
            s: value_of(notation, tables[s], enforce_max_counts, slack=slack)
            for s in SYSTEM_ORDER
        }
    )


def canonicalize(value: Fraction, table: SystemTable) -> NumeralNotation:
    """Greedy largest-digit-first decomposition of a positive value.

    Only transliterable digits are used; a value that would need a
    placeholder chain sign (or leaves a remainder below the smallest digit)
    raises NotRepresentableError.
    """
    if value <= 0:
        raise NotRepresentableError(f"value must be positive, got {value}")
    remainder = value
    runs: list[DigitRun] = []
    for sign in table.chain_signs_descending():
        if not is_digit_name(sign):
            continue
        count = int(remainder / table.values[sign])
        if count:
            limit = table.max_counts.get(sign)
            if limit is not None and count > limit:
                raise NotRepresentableError(
                    f"{format_rational(value)} needs {count} x {sign} in {table.system}, "
                    f"over the bundling limit of {limit}"
                )
            runs.append(DigitRun(count, SignToken(sign)))
            remainder -= count * table.values[sign]
    if remainder != 0:
        raise NotRepresentableError(
            f"{format_rational(value)} is not representable in system {table.system}"
        )
    return NumeralNotation(tuple(runs))


def is_canonical(notation: NumeralNotation, table: SystemTable) -> bool:
    value = value_of(notation, table)
    if value is None:
        return False
    return canonicalize(value, table).runs == notation.runs


class CanonicalStatus(Enum):
    CANONICAL = "canonical"
    INVALID_READING = "invalid-reading"
    NONCANONICAL_FORM = "noncanonical-form"


def canonical_status(notation: NumeralNotation, table: SystemTable) -> CanonicalStatus:
    """Lint helper: keeps bundling violations (invalid readings) apart from
    merely non-canonical digit order/decomposition."""
    value = value_of(notation, table)
    if value is None:
        return CanonicalStatus.INVALID_READING
    try:
        canonical = canonicalize(value, table)
    except NotRepresentableError:
        return CanonicalStatus.NONCANONICAL_FORM
    if canonical.runs == notation.runs:
        return CanonicalStatus.CANONICAL
    return CanonicalStatus.NONCANONICAL_FORM
