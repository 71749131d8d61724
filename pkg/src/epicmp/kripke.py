"""Pointed-model machinery: relations, models, files, frame classes.

Relations over n worlds are stored as n row bitmasks: bit j of ``rows[i]``
set iff world i reaches world j.  With the hard caps (16 worlds, 8 agents)
every row fits a machine int and closures are bitset sweeps.

Model text format (line oriented, ``#`` starts a comment, sections in this
order)::

    agents: a b c
    worlds: s t u
    atoms: H1 T1
    closure: reflexive symmetric      # optional, applied to every relation
    rel a: (s,t) (t,u)                # one line per agent
    val H1: s t                       # worlds where the atom is true
    witness: t                        # optional, advisory

Omitted ``val`` lines mean false everywhere; an omitted ``rel`` line is the
empty relation.  ``save_model`` writes relations as-is (already closed if
they were built that way) and never writes a ``closure:`` directive.
"""

from __future__ import annotations

import itertools
import re
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Iterator, Mapping, Sequence

from .syntax import Group, Supergroup

MAX_WORLDS = 16
MAX_AGENTS = 8

CLOSURE_PROPS = ("reflexive", "symmetric", "transitive")

__all__ = [
    "MAX_WORLDS", "MAX_AGENTS", "CLOSURE_PROPS",
    "Relation", "KripkeModel", "FrameClass", "RelationFlags", "FrameReport",
    "ModelError", "ModelFormatError", "UnknownAgentError", "UnknownWorldError",
    "classify_frame", "joint_relation", "common_relation", "cdk_relation",
    "apply_closure", "load_model", "load_model_witness", "save_model",
    "canonicalize", "encode_model",
]


class ModelError(ValueError):
    """Base class for model construction/use errors."""


class ModelFormatError(ModelError):
    """Malformed model text; message carries the 1-based line number."""


class UnknownAgentError(ModelError):
    pass


class UnknownWorldError(ModelError):
    pass


@dataclass(frozen=True)
class Relation:
    """Binary relation on {0..n-1} as a tuple of row bitmasks."""

    rows: tuple[int, ...]

    def __post_init__(self):
        n = len(self.rows)
        full = (1 << n) - 1
        for i, row in enumerate(self.rows):
            if not 0 <= row <= full:
                raise ModelError(f"row {i} mask {row:#x} out of range for "
                                 f"{n} worlds")

    @property
    def size(self) -> int:
        return len(self.rows)

    def has(self, i: int, j: int) -> bool:
        return bool(self.rows[i] >> j & 1)

    def pairs(self) -> Iterator[tuple[int, int]]:
        for i, row in enumerate(self.rows):
            for j in range(self.size):
                if row >> j & 1:
                    yield (i, j)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> Relation:
        rows = [0] * n
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < n):
                raise ModelError(f"pair ({i},{j}) out of range for {n} worlds")
            rows[i] |= 1 << j
        return cls(tuple(rows))

    @classmethod
    def identity(cls, n: int) -> Relation:
        return cls(tuple(1 << i for i in range(n)))

    @classmethod
    def total(cls, n: int) -> Relation:
        full = (1 << n) - 1
        return cls((full,) * n)

    def __and__(self, other: Relation) -> Relation:
        return Relation(tuple(a & b for a, b in zip(self.rows, other.rows,
                                                    strict=True)))

    def __or__(self, other: Relation) -> Relation:
        return Relation(tuple(a | b for a, b in zip(self.rows, other.rows,
                                                    strict=True)))

    def __le__(self, other: Relation) -> bool:
        """Subset as a set of pairs."""
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows,
                                               strict=True))

    def reflexive_closure(self) -> Relation:
        return Relation(tuple(row | (1 << i)
                              for i, row in enumerate(self.rows)))

    def symmetric_closure(self) -> Relation:
        rows = list(self.rows)
        for i in range(self.size):
            for j in range(self.size):
                if rows[i] >> j & 1:
                    rows[j] |= 1 << i
        return Relation(tuple(rows))

    def transitive_closure(self) -> Relation:
        rows = list(self.rows)
        for k in range(self.size):
            for i in range(self.size):
                if rows[i] >> k & 1:
                    rows[i] |= rows[k]
        return Relation(tuple(rows))

    def is_reflexive(self) -> bool:
        return all(row >> i & 1 for i, row in enumerate(self.rows))

    def is_symmetric(self) -> bool:
        return self == self.symmetric_closure()

    def is_transitive(self) -> bool:
        return self == self.transitive_closure()

    def is_euclidean(self) -> bool:
        # wRu and wRv imply uRv: every successor of w reaches all of them
        for row in self.rows:
            for u in range(self.size):
                if row >> u & 1 and row & ~self.rows[u]:
                    return False
        return True


def _closed(rel: Relation, props: Iterable[str]) -> Relation:
    """Apply closure properties in a fixed order until nothing changes."""
    wanted = set(props)
    unknown = wanted.difference(CLOSURE_PROPS)
    if unknown:
        raise ModelError(f"unknown closure property: {sorted(unknown)[0]!r}")
    while True:
        before = rel
        if "reflexive" in wanted:
            rel = rel.reflexive_closure()
        if "symmetric" in wanted:
            rel = rel.symmetric_closure()
        if "transitive" in wanted:
            rel = rel.transitive_closure()
        if rel == before:
            return rel


class FrameClass(IntEnum):
    """Strongest standard frame condition every agent relation meets."""

    NONE = 0
    KT = 1   # reflexive
    S4 = 2   # reflexive + transitive
    S5 = 3   # reflexive + transitive + symmetric (equivalence)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class RelationFlags:
    reflexive: bool
    transitive: bool
    symmetric: bool
    euclidean: bool


@dataclass(frozen=True)
class FrameReport:
    agents: tuple[str, ...]
    flags: tuple[RelationFlags, ...]
    overall: FrameClass

    def flags_for(self, agent: str) -> RelationFlags:
        try:
            return self.flags[self.agents.index(agent)]
        except ValueError:
            raise UnknownAgentError(f"unknown agent {agent!r}") from None


@dataclass(frozen=True)
class KripkeModel:
    """Worlds + one relation per agent + valuation (atom -> world bitmask)."""

    worlds: tuple[str, ...]
    agents: tuple[str, ...]
    relations: tuple[Relation, ...]   # aligned with agents
    atoms: tuple[str, ...]
    valuation: tuple[int, ...]        # aligned with atoms

    def __post_init__(self):
        n = len(self.worlds)
        if not 1 <= n <= MAX_WORLDS:
            raise ModelError(f"need 1..{MAX_WORLDS} worlds, got {n}")
        if not 1 <= len(self.agents) <= MAX_AGENTS:
            raise ModelError(f"need 1..{MAX_AGENTS} agents, "
                             f"got {len(self.agents)}")
        for label, names in (("world", self.worlds), ("agent", self.agents),
                             ("atom", self.atoms)):
            if len(set(names)) != len(names):
                raise ModelError(f"duplicate {label} name")
        if len(self.relations) != len(self.agents):
            raise ModelError("one relation per agent required")
        for rel in self.relations:
            if rel.size != n:
                raise ModelError(f"relation over {rel.size} worlds in a "
                                 f"{n}-world model")
        if len(self.valuation) != len(self.atoms):
            raise ModelError("one valuation mask per atom required")
        full = (1 << n) - 1
        for atom, mask in zip(self.atoms, self.valuation):
            if not 0 <= mask <= full:
                raise ModelError(f"valuation mask for {atom!r} out of range")

    @property
    def n_worlds(self) -> int:
        return len(self.worlds)

    def world_index(self, name: str) -> int:
        try:
            return self.worlds.index(name)
        except ValueError:
            raise UnknownWorldError(f"unknown world {name!r}") from None

    def agent_index(self, name: str) -> int:
        try:
            return self.agents.index(name)
        except ValueError:
            raise UnknownAgentError(f"unknown agent {name!r}") from None

    def relation(self, agent: str) -> Relation:
        return self.relations[self.agent_index(agent)]

    def atom_mask(self, atom: str) -> int | None:
        """Bitmask of worlds where the atom holds, or None if undeclared."""
        try:
            return self.valuation[self.atoms.index(atom)]
        except ValueError:
            return None

    @classmethod
    def from_edges(cls, worlds: Sequence[str], agents: Sequence[str],
                   edges: Mapping[str, Iterable[tuple[str, str]]],
                   valuation: Mapping[str, Iterable[str]] | None = None,
                   closure: Iterable[str] = ()) -> KripkeModel:
        """Build from named edge lists, applying closure properties."""
        worlds = tuple(worlds)
        index = {w: i for i, w in enumerate(worlds)}
        n = len(worlds)

        def _idx(name: str) -> int:
            if name not in index:
                raise UnknownWorldError(f"unknown world {name!r}")
            return index[name]

        for agent in edges:
            if agent not in agents:
                raise UnknownAgentError(f"unknown agent {agent!r}")
        relations = []
        for agent in agents:
            pairs = [(_idx(s), _idx(t)) for s, t in edges.get(agent, ())]
            relations.append(_closed(Relation.from_pairs(n, pairs), closure))
        valuation = valuation or {}
        masks = []
        for atom in valuation:
            mask = 0
            for name in valuation[atom]:
                mask |= 1 << _idx(name)
            masks.append((atom, mask))
        return cls(worlds=worlds, agents=tuple(agents),
                   relations=tuple(relations),
                   atoms=tuple(a for a, _ in masks),
                   valuation=tuple(m for _, m in masks))


def classify_frame(m: KripkeModel) -> FrameReport:
    flags = []
    for rel in m.relations:
        flags.append(RelationFlags(
            reflexive=rel.is_reflexive(),
            transitive=rel.is_transitive(),
            symmetric=rel.is_symmetric(),
            euclidean=rel.is_euclidean(),
        ))
    if all(f.reflexive and f.transitive and f.symmetric for f in flags):
        overall = FrameClass.S5
    elif all(f.reflexive and f.transitive for f in flags):
        overall = FrameClass.S4
    elif all(f.reflexive for f in flags):
        overall = FrameClass.KT
    else:
        overall = FrameClass.NONE
    return FrameReport(agents=m.agents, flags=tuple(flags), overall=overall)


def apply_closure(m: KripkeModel, props: Iterable[str]) -> KripkeModel:
    props = tuple(props)
    return KripkeModel(
        worlds=m.worlds, agents=m.agents,
        relations=tuple(_closed(rel, props) for rel in m.relations),
        atoms=m.atoms, valuation=m.valuation)


def joint_relation(m: KripkeModel, group: Group) -> Relation:
    """Intersection of the members' relations (pooled information)."""
    rels = [m.relation(a) for a in group.agents]
    out = rels[0]
    for rel in rels[1:]:
        out = out & rel
    return out


def common_relation(m: KripkeModel, group: Group) -> Relation:
    """Reflexive-transitive closure of the members' union (reachability)."""
    rels = [m.relation(a) for a in group.agents]
    out = rels[0]
    for rel in rels[1:]:
        out = out | rel
    return out.reflexive_closure().transitive_closure()


def cdk_relation(m: KripkeModel, groups: Supergroup) -> Relation:
    """Common-knowledge relation treating each member group as one agent."""
    rels = [joint_relation(m, g) for g in groups.groups]
    out = rels[0]
    for rel in rels[1:]:
        out = out | rel
    return out.reflexive_closure().transitive_closure()


# --- text format ---------------------------------------------------------

_PAIR_RE = re.compile(r"\(\s*([A-Za-z][A-Za-z0-9_]*)\s*,"
                      r"\s*([A-Za-z][A-Za-z0-9_]*)\s*\)")
_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")

# section order ranks; rel and val may repeat but may not interleave backwards
_SECTION_RANK = {"agents": 0, "worlds": 1, "atoms": 2, "closure": 3,
                 "rel": 4, "val": 5, "witness": 6}


def _split_names(body: str, lineno: int, kind: str) -> list[str]:
    names = body.split()
    for name in names:
        if not _NAME_RE.match(name):
            raise ModelFormatError(f"line {lineno}: bad {kind} name {name!r}")
    return names


def load_model_witness(text: str) -> tuple[KripkeModel, str | None]:
    """Parse model text; returns the model and the witness world, if any."""
    agents: list[str] | None = None
    worlds: list[str] | None = None
    atoms: list[str] | None = None
    closure: list[str] = []
    edges: dict[str, list[tuple[str, str]]] = {}
    val: dict[str, list[str]] = {}
    witness: str | None = None
    rank = -1

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, body = line.partition(":")
        if not sep:
            raise ModelFormatError(f"line {lineno}: expected 'section: ...'")
        head = head.strip()
        body = body.strip()
        key = head.split()[0] if head else ""
        if key not in _SECTION_RANK:
            raise ModelFormatError(f"line {lineno}: unknown section {head!r}")
        if _SECTION_RANK[key] < rank:
            raise ModelFormatError(
                f"line {lineno}: {key!r} section out of order")
        rank = _SECTION_RANK[key]

        if key == "agents":
            if agents is not None:
                raise ModelFormatError(f"line {lineno}: duplicate agents:")
            agents = _split_names(body, lineno, "agent")
        elif key == "worlds":
            if worlds is not None:
                raise ModelFormatError(f"line {lineno}: duplicate worlds:")
            worlds = _split_names(body, lineno, "world")
        elif key == "atoms":
            if atoms is not None:
                raise ModelFormatError(f"line {lineno}: duplicate atoms:")
            atoms = _split_names(body, lineno, "atom")
        elif key == "closure":
            closure = body.split()
            for prop in closure:
                if prop not in CLOSURE_PROPS:
                    raise ModelFormatError(
                        f"line {lineno}: unknown closure property {prop!r}")
        elif key == "rel":
            parts = head.split()
            if len(parts) != 2:
                raise ModelFormatError(
                    f"line {lineno}: expected 'rel <agent>:'")
            agent = parts[1]
            if agents is None or agent not in agents:
                raise ModelFormatError(
                    f"line {lineno}: unknown agent {agent!r}")
            if agent in edges:
                raise ModelFormatError(
                    f"line {lineno}: duplicate rel line for {agent!r}")
            pairs = []
            rest = body
            while rest:
                mm = _PAIR_RE.match(rest)
                if mm is None:
                    raise ModelFormatError(
                        f"line {lineno}: expected '(s,t)' pairs, "
                        f"got {rest!r}")
                for name in mm.group(1, 2):
                    if worlds is None or name not in worlds:
                        raise ModelFormatError(
                            f"line {lineno}: unknown world {name!r}")
                pairs.append((mm.group(1), mm.group(2)))
                rest = rest[mm.end():].lstrip()
            edges[agent] = pairs
        elif key == "val":
            parts = head.split()
            if len(parts) != 2:
                raise ModelFormatError(f"line {lineno}: expected 'val <atom>:'")
            atom = parts[1]
            if atoms is None or atom not in atoms:
                raise ModelFormatError(f"line {lineno}: unknown atom {atom!r}")
            if atom in val:
                raise ModelFormatError(
                    f"line {lineno}: duplicate val line for {atom!r}")
            names = _split_names(body, lineno, "world")
            for name in names:
                if worlds is None or name not in worlds:
                    raise ModelFormatError(
                        f"line {lineno}: unknown world {name!r}")
            val[atom] = names
        elif key == "witness":
            names = _split_names(body, lineno, "world")
            if len(names) != 1:
                raise ModelFormatError(
                    f"line {lineno}: witness takes one world")
            witness = names[0]

    for label, value in (("agents", agents), ("worlds", worlds),
                         ("atoms", atoms)):
        if value is None:
            raise ModelFormatError(f"missing {label}: section")
    assert agents is not None and worlds is not None and atoms is not None

    try:
        m = KripkeModel.from_edges(
            worlds, agents, edges,
            valuation={a: val.get(a, []) for a in atoms},
            closure=closure)
    except ModelError as exc:
        raise ModelFormatError(str(exc)) from exc
    if witness is not None and witness not in worlds:
        raise ModelFormatError(f"witness names unknown world {witness!r}")
    return m, witness


def load_model(text: str) -> KripkeModel:
    return load_model_witness(text)[0]


def save_model(m: KripkeModel, witness: str | None = None) -> str:
    """Render to the text format; load_model(save_model(m)) == m."""
    def _section(name: str, names: Sequence[str]) -> str:
        return f"{name}: " + " ".join(names) if names else f"{name}:"

    lines = [
        _section("agents", m.agents),
        _section("worlds", m.worlds),
        _section("atoms", m.atoms),
    ]
    for agent, rel in zip(m.agents, m.relations):
        pairs = " ".join(f"({m.worlds[i]},{m.worlds[j]})"
                         for i, j in rel.pairs())
        lines.append(f"rel {agent}:" + (" " + pairs if pairs else ""))
    for atom, mask in zip(m.atoms, m.valuation):
        if mask:
            names = " ".join(w for i, w in enumerate(m.worlds)
                             if mask >> i & 1)
            lines.append(f"val {atom}: {names}")
    if witness is not None:
        m.world_index(witness)
        lines.append(f"witness: {witness}")
    return "\n".join(lines) + "\n"


# --- canonical encoding --------------------------------------------------

_ENCODE_MAX_WORLDS = 8  # packed relation must fit one 64-bit field


def encode_model(m: KripkeModel, atom_pool: Sequence[str]) -> bytes:
    """Pack world count, relation masks (agent order), valuation masks
    (atom_pool order) into bytes; byte order sorts the way enumeration does.
    """
    n = m.n_worlds
    if n > _ENCODE_MAX_WORLDS:
        raise ModelError(f"encoding supports up to {_ENCODE_MAX_WORLDS} "
                         f"worlds, got {n}")
    rel_ints = [_rel_int(rel.rows, n) for rel in m.relations]
    val_ints = [m.atom_mask(a) or 0 for a in atom_pool]
    return struct.pack(">B" + "Q" * len(rel_ints) + "H" * len(val_ints),
                       n, *rel_ints, *val_ints)


def _rel_int(rows: Sequence[int], n: int) -> int:
    out = 0
    for i, row in enumerate(rows):
        out |= row << (i * n)
    return out


def canonicalize(m: KripkeModel, atom_pool: Sequence[str] | None = None) \
        -> bytes:
    """Isomorphism-invariant key: minimal encoding over world relabelings.

    Two models give equal keys iff some world bijection carries relations
    and valuations (over atom_pool, default the model's atoms) across.
    Agent and atom names are matched positionally, not renamed.
    """
    if atom_pool is None:
        atom_pool = m.atoms
    n = m.n_worlds
    if n > _ENCODE_MAX_WORLDS:  # n! blowup guard; 8! = 40320 is the ceiling
        raise ModelError(f"canonicalize supports up to {_ENCODE_MAX_WORLDS} "
                         f"worlds, got {n}")
    masks = [m.atom_mask(a) or 0 for a in atom_pool]
    best: bytes | None = None
    for perm in itertools.permutations(range(n)):
        # perm[new] = old; new-index i relates to j iff old perm[i] -> perm[j]
        rel_ints = []
        for rel in m.relations:
            out = 0
            for i in range(n):
                old_row = rel.rows[perm[i]]
                row = 0
                for j in range(n):
                    if old_row >> perm[j] & 1:
                        row |= 1 << j
                out |= row << (i * n)
            rel_ints.append(out)
        val_ints = []
        for mask in masks:
            out = 0
            for i in range(n):
                if mask >> perm[i] & 1:
                    out |= 1 << i
            val_ints.append(out)
        enc = struct.pack(">B" + "Q" * len(rel_ints) + "H" * len(val_ints),
                          n, *rel_ints, *val_ints)
        if best is None or enc < best:
            best = enc
    assert best is not None
    return best
