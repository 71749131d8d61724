"""Bounded countermodel search over enumerated models.

Models are enumerated world count ascending, then lexicographically on the
packed encoding (per-agent relation masks agent-major, then valuation masks
atom-major) -- the order `kripke.encode_model` sorts by.  Frame classes fix
the per-agent relation pool:

    KT  every reflexive relation
    S4  every reflexive transitive relation
    S5  every equivalence (one per set partition of the worlds)

`check_validity` sweeps the whole space with numpy: one axis enumerates
frames (tuples of per-agent relations), one enumerates valuations, and all
connectives become uint32 bitmask arithmetic on world-row masks.  The first
countermodel it reports is the first in enumeration order, with the lowest
falsifying world as witness, so results are reproducible and independent of
--jobs chunking.  `mod_iso` switches to the (slow) object-path enumeration
that skips isomorphic duplicates; the first countermodel is unchanged
because the first-seen representative of a class is its enumeration-minimal
member.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .kripke import FrameClass, KripkeModel, Relation, canonicalize
from .semantics import extension
from .syntax import (And, Atom, CDK, CK, Cmp, CmpOp, DK, Formula, Group, Iff,
                     Imp, IndK, Not, Or, Supergroup, agent_names, atom_names,
                     parse)

AGENT_POOL = ("a", "b", "c", "d")
MAX_SEARCH_WORLDS = 5
MAX_SEARCH_AGENTS = len(AGENT_POOL)
MAX_SEARCH_ATOMS = 3

# ~1M uint32 cells per evaluated block keeps peak memory in the tens of MB
_CHUNK_CELLS = 1 << 18

__all__ = [
    "AGENT_POOL", "MAX_SEARCH_WORLDS", "MAX_SEARCH_AGENTS",
    "MAX_SEARCH_ATOMS", "BoundsError", "SearchBounds", "NoCountermodelUpTo",
    "Countermodel", "SearchOutcome", "enumerate_models", "count_models",
    "check_validity", "check_schema", "instantiate_schema", "SchemaInstance",
    "GROUP_PLACEHOLDERS", "FORMULA_PLACEHOLDERS", "DEFAULT_FORMULA_POOL",
]


class BoundsError(ValueError):
    """Search parameters outside the supported ranges, or a formula that
    mentions agents/atoms the bounds do not cover."""


@dataclass(frozen=True)
class SearchBounds:
    frame: FrameClass
    n_agents: int
    max_worlds: int
    atoms: tuple[str, ...] = ()
    mod_iso: bool = False

    def __post_init__(self):
        if self.frame not in (FrameClass.KT, FrameClass.S4, FrameClass.S5):
            raise BoundsError(f"frame must be KT, S4 or S5, got {self.frame}")
        if not 1 <= self.n_agents <= MAX_SEARCH_AGENTS:
            raise BoundsError(f"n_agents must be 1..{MAX_SEARCH_AGENTS}, "
                              f"got {self.n_agents}")
        if not 1 <= self.max_worlds <= MAX_SEARCH_WORLDS:
            raise BoundsError(f"max_worlds must be 1..{MAX_SEARCH_WORLDS}, "
                              f"got {self.max_worlds}")
        if len(self.atoms) > MAX_SEARCH_ATOMS:
            raise BoundsError(f"at most {MAX_SEARCH_ATOMS} atoms, "
                              f"got {len(self.atoms)}")
        if len(set(self.atoms)) != len(self.atoms):
            raise BoundsError("duplicate atom in bounds")

    @property
    def agents(self) -> tuple[str, ...]:
        return AGENT_POOL[:self.n_agents]


@dataclass(frozen=True)
class NoCountermodelUpTo:
    bounds: SearchBounds
    models_checked: int


@dataclass(frozen=True)
class Countermodel:
    model: KripkeModel
    witness: str


SearchOutcome = NoCountermodelUpTo | Countermodel


# --- per-frame relation pools --------------------------------------------

def _set_partitions(n: int) -> Iterator[list[int]]:
    """Block assignments in restricted-growth order; a[i] is i's block."""
    a = [0] * n

    def rec(i: int, mx: int) -> Iterator[list[int]]:
        if i == n:
            yield a
            return
        for v in range(mx + 2):
            a[i] = v
            yield from rec(i + 1, max(mx, v))

    yield from rec(1, 0)


def _rows_key(rows: Sequence[int], n: int) -> int:
    out = 0
    for i, row in enumerate(rows):
        out |= row << (i * n)
    return out


@lru_cache(maxsize=None)
def frame_relations(frame: FrameClass, n: int) -> np.ndarray:
    """All per-agent relations for the frame class over n worlds, as a
    (count, n) uint32 array of row masks, ascending in encoding order."""
    if frame is FrameClass.S5:
        rels = []
        for assign in _set_partitions(n):
            blocks: dict[int, int] = {}
            for i, b in enumerate(assign):
                blocks[b] = blocks.get(b, 0) | (1 << i)
            rels.append(tuple(blocks[b] for b in assign))
        rels.sort(key=lambda rows: _rows_key(rows, n))
        return np.array(rels, dtype=np.uint32)

    free = n * n - n
    count = 1 << free
    rows = np.zeros((count, n), dtype=np.uint32)
    r = np.arange(count, dtype=np.uint64)
    k = 0
    for i in range(n):
        rows[:, i] = np.uint32(1 << i)
        for j in range(n):
            if i == j:
                continue
            rows[:, i] |= ((r >> np.uint64(k)) & 1).astype(np.uint32) << j
            k += 1
    if frame is FrameClass.S4:
        ok = np.ones(count, dtype=bool)
        for i in range(n):
            for kk in range(n):
                via = ((rows[:, i] >> kk) & 1).astype(bool)
                ok &= ~(via & ((rows[:, i] | rows[:, kk]) != rows[:, i]))
        rows = rows[ok]
    return rows


def count_models(bounds: SearchBounds) -> int:
    """Size of the full (non-deduplicated) enumeration."""
    total = 0
    for n in range(1, bounds.max_worlds + 1):
        frames = len(frame_relations(bounds.frame, n)) ** bounds.n_agents
        total += frames << (n * len(bounds.atoms))
    return total


def enumerate_models(bounds: SearchBounds) -> Iterator[KripkeModel]:
    """Yield every model within bounds in the documented order.  With
    mod_iso, only the first member of each isomorphism class is yielded."""
    agents = bounds.agents
    k = len(bounds.atoms)
    for n in range(1, bounds.max_worlds + 1):
        worlds = tuple(f"w{i}" for i in range(n))
        pool = [tuple(int(x) for x in rows)
                for rows in frame_relations(bounds.frame, n)]
        seen: set[bytes] | None = set() if bounds.mod_iso else None
        for combo in itertools.product(pool, repeat=len(agents)):
            relations = tuple(Relation(rows) for rows in combo)
            for masks in itertools.product(range(1 << n), repeat=k):
                m = KripkeModel(worlds=worlds, agents=agents,
                                relations=relations, atoms=bounds.atoms,
                                valuation=tuple(masks))
                if seen is not None:
                    key = canonicalize(m, bounds.atoms)
                    if key in seen:
                        continue
                    seen.add(key)
                yield m


# --- vectorized evaluation -----------------------------------------------

class _VecEval:
    """Evaluate one formula over a block of frames x all valuations.

    Every extension is a uint32 array of world bitmasks, shaped (F, V),
    (F, 1) or (1, V) and broadcast on demand; F indexes frames in the
    block, V valuations.
    """

    def __init__(self, rows_by_agent: Mapping[str, np.ndarray], n: int,
                 atom_ext: Mapping[str, np.ndarray]):
        self.rows_by_agent = rows_by_agent
        self.n = n
        self.full = np.uint32((1 << n) - 1)
        self.atom_ext = atom_ext
        self._joint: dict[Group, np.ndarray] = {}
        self._reach: dict[object, np.ndarray] = {}
        self._memo: dict[Formula, np.ndarray] = {}

    def joint(self, group: Group) -> np.ndarray:
        out = self._joint.get(group)
        if out is None:
            out = self.rows_by_agent[group.agents[0]]
            for agent in group.agents[1:]:
                out = out & self.rows_by_agent[agent]
            self._joint[group] = out
        return out

    def _closure(self, rows: np.ndarray) -> np.ndarray:
        rows = rows | (np.uint32(1) << np.arange(self.n, dtype=np.uint32))
        for k in range(self.n):
            rows = rows | ((rows >> np.uint32(k)) & 1) * rows[:, k:k + 1]
        return rows

    def common(self, group: Group) -> np.ndarray:
        key = ("common", group)
        out = self._reach.get(key)
        if out is None:
            acc = self.rows_by_agent[group.agents[0]]
            for agent in group.agents[1:]:
                acc = acc | self.rows_by_agent[agent]
            out = self._closure(acc)
            self._reach[key] = out
        return out

    def cdk(self, groups: Supergroup) -> np.ndarray:
        key = ("cdk", groups)
        out = self._reach.get(key)
        if out is None:
            acc = self.joint(groups.groups[0])
            for g in groups.groups[1:]:
                acc = acc | self.joint(g)
            out = self._closure(acc)
            self._reach[key] = out
        return out

    def _box(self, rows: np.ndarray, ext: np.ndarray) -> np.ndarray:
        not_ext = ext ^ self.full
        out = None
        for w in range(self.n):
            bit = ((rows[:, w:w + 1] & not_ext) == 0).astype(np.uint32) << w
            out = bit if out is None else out | bit
        return out

    def _leq(self, left: Group, right: Group) -> np.ndarray:
        a, b = self.joint(left), self.joint(right)
        out = np.zeros(a.shape[0], dtype=np.uint32)
        for w in range(self.n):
            out |= ((a[:, w] & (b[:, w] ^ self.full)) == 0) \
                .astype(np.uint32) << w
        return out[:, None]

    def ext(self, f: Formula) -> np.ndarray:
        out = self._memo.get(f)
        if out is not None:
            return out
        if isinstance(f, Atom):
            out = self.atom_ext[f.name]
        elif isinstance(f, Not):
            out = self.ext(f.sub) ^ self.full
        elif isinstance(f, And):
            out = self.ext(f.left) & self.ext(f.right)
        elif isinstance(f, Or):
            out = self.ext(f.left) | self.ext(f.right)
        elif isinstance(f, Imp):
            out = (self.ext(f.left) ^ self.full) | self.ext(f.right)
        elif isinstance(f, Iff):
            out = (self.ext(f.left) ^ self.ext(f.right)) ^ self.full
        elif isinstance(f, DK):
            out = self._box(self.joint(f.group), self.ext(f.sub))
        elif isinstance(f, IndK):
            out = self._box(self.rows_by_agent[f.agent], self.ext(f.sub))
        elif isinstance(f, CK):
            out = self._box(self.common(f.group), self.ext(f.sub))
        elif isinstance(f, CDK):
            out = self._box(self.cdk(f.groups), self.ext(f.sub))
        elif isinstance(f, Cmp):
            if f.op is CmpOp.LEQ:
                out = self._leq(f.left, f.right)
            else:
                leq = self._leq(f.left, f.right)
                geq = self._leq(f.right, f.left)
                if f.op is CmpOp.LT:
                    out = leq & (geq ^ self.full)
                elif f.op is CmpOp.EQV:
                    out = leq & geq
                else:
                    out = (leq ^ self.full) & (geq ^ self.full)
        else:
            raise TypeError(f"not a formula node: {f!r}")
        self._memo[f] = out
        return out


def _validate_within(f: Formula, bounds: SearchBounds) -> None:
    stray = agent_names(f) - set(bounds.agents)
    if stray:
        raise BoundsError(f"formula mentions agent {sorted(stray)[0]!r} "
                          f"outside the {bounds.n_agents}-agent pool "
                          f"{bounds.agents}")
    stray = atom_names(f) - set(bounds.atoms)
    if stray:
        raise BoundsError(f"formula mentions atom {sorted(stray)[0]!r} "
                          f"not declared in bounds {bounds.atoms}")


def _scan_block(f: Formula, rel_rows: np.ndarray, bounds: SearchBounds,
                n: int, atom_ext: dict[str, np.ndarray],
                lo: int, hi: int) -> tuple[int, int, int] | None:
    """Check frames [lo, hi); returns (frame, valuation, extension-mask) of
    the first failure, or None."""
    n_rels = len(rel_rows)
    idx = np.arange(lo, hi, dtype=np.int64)
    rows_by_agent = {}
    for j, agent in enumerate(bounds.agents):
        stride = n_rels ** (bounds.n_agents - 1 - j)
        rows_by_agent[agent] = rel_rows[(idx // stride) % n_rels]
    ev = _VecEval(rows_by_agent, n, atom_ext)
    n_vals = 1 << (n * len(bounds.atoms))
    ext = np.broadcast_to(ev.ext(f), (hi - lo, n_vals))
    ok = ext == ev.full
    if ok.all():
        return None
    flat = int(np.argmin(ok.ravel()))
    local_f, val = divmod(flat, n_vals)
    return lo + local_f, val, int(ext[local_f, val])


def _model_at(bounds: SearchBounds, n: int, frame_idx: int,
              val_idx: int) -> KripkeModel:
    """Rebuild the model at a (frame, valuation) index pair."""
    rel_rows = frame_relations(bounds.frame, n)
    n_rels = len(rel_rows)
    relations = []
    for j in range(bounds.n_agents):
        stride = n_rels ** (bounds.n_agents - 1 - j)
        rows = rel_rows[(frame_idx // stride) % n_rels]
        relations.append(Relation(tuple(int(x) for x in rows)))
    k = len(bounds.atoms)
    full = (1 << n) - 1
    masks = tuple((val_idx >> (n * (k - 1 - t))) & full for t in range(k))
    return KripkeModel(worlds=tuple(f"w{i}" for i in range(n)),
                       agents=bounds.agents, relations=tuple(relations),
                       atoms=bounds.atoms, valuation=masks)


def _check_vectorized(f: Formula, bounds: SearchBounds,
                      jobs: int) -> SearchOutcome:
    checked = 0
    for n in range(1, bounds.max_worlds + 1):
        rel_rows = frame_relations(bounds.frame, n)
        n_frames = len(rel_rows) ** bounds.n_agents
        n_vals = 1 << (n * len(bounds.atoms))
        full = (1 << n) - 1
        atom_ext = {}
        if bounds.atoms:
            vv = np.arange(n_vals, dtype=np.uint32)
            for t, atom in enumerate(bounds.atoms):
                shift = n * (len(bounds.atoms) - 1 - t)
                atom_ext[atom] = ((vv >> np.uint32(shift))
                                  & np.uint32(full))[None, :]
        step = max(1, _CHUNK_CELLS // n_vals)
        spans = [(lo, min(lo + step, n_frames))
                 for lo in range(0, n_frames, step)]

        def scan(span: tuple[int, int]):
            return _scan_block(f, rel_rows, bounds, n, atom_ext, *span)

        hit: tuple[int, int, int] | None = None
        if jobs > 1 and len(spans) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as tpe:
                futures = [tpe.submit(scan, span) for span in spans]
                for fut in futures:
                    res = fut.result()
                    if res is not None:
                        hit = res
                        for other in futures:
                            other.cancel()
                        break
        else:
            for span in spans:
                res = scan(span)
                if res is not None:
                    hit = res
                    break
        if hit is not None:
            frame_idx, val_idx, ext_mask = hit
            m = _model_at(bounds, n, frame_idx, val_idx)
            missing = ~ext_mask & full
            witness = m.worlds[(missing & -missing).bit_length() - 1]
            return Countermodel(model=m, witness=witness)
        checked += n_frames * n_vals
    return NoCountermodelUpTo(bounds=bounds, models_checked=checked)


def _check_object_path(f: Formula, bounds: SearchBounds) -> SearchOutcome:
    checked = 0
    for m in enumerate_models(bounds):
        checked += 1
        holds = extension(m, f)
        if len(holds) != m.n_worlds:
            witness = next(w for w in m.worlds if w not in holds)
            return Countermodel(model=m, witness=witness)
    return NoCountermodelUpTo(bounds=bounds, models_checked=checked)


def check_validity(f: Formula, bounds: SearchBounds, *,
                   jobs: int = 1) -> SearchOutcome:
    """First countermodel to f within bounds, or proof of none.

    The countermodel is the enumeration-wise first falsifying model with
    its lowest falsifying world; `jobs` only parallelizes scanning and
    never changes the answer.  `bounds.mod_iso` uses the object path and
    counts isomorphism-class representatives instead of all models.
    """
    _validate_within(f, bounds)
    if bounds.mod_iso:
        return _check_object_path(f, bounds)
    return _check_vectorized(f, bounds, jobs)


# --- schema instantiation ------------------------------------------------

GROUP_PLACEHOLDERS = ("A", "B", "C", "E")
FORMULA_PLACEHOLDERS = ("phi", "psi", "chi")

DEFAULT_FORMULA_POOL: tuple[Formula, ...] = (
    parse("p"), parse("~p"), parse("p & q"), parse("D{a} p"),
)


@dataclass(frozen=True)
class SchemaInstance:
    group_map: tuple[tuple[str, Group], ...]
    formula_map: tuple[tuple[str, Formula], ...]
    formula: Formula
    outcome: SearchOutcome


def _subst_group(g: Group, group_map: Mapping[str, Group]) -> Group:
    agents: list[str] = []
    for a in g.agents:
        if a in group_map:
            agents.extend(group_map[a].agents)
        else:
            agents.append(a)
    return Group(agents)


def instantiate_schema(schema: Formula, group_map: Mapping[str, Group],
                       formula_map: Mapping[str, Formula]) -> Formula:
    """Substitute placeholder group members (unioning) and placeholder
    atoms; non-placeholder names pass through unchanged."""
    if isinstance(schema, Atom):
        return formula_map.get(schema.name, schema)
    if isinstance(schema, Not):
        return Not(instantiate_schema(schema.sub, group_map, formula_map))
    if isinstance(schema, (And, Or, Imp, Iff)):
        return type(schema)(
            instantiate_schema(schema.left, group_map, formula_map),
            instantiate_schema(schema.right, group_map, formula_map))
    if isinstance(schema, (DK, CK)):
        return type(schema)(
            _subst_group(schema.group, group_map),
            instantiate_schema(schema.sub, group_map, formula_map))
    if isinstance(schema, CDK):
        return CDK(
            Supergroup(_subst_group(g, group_map)
                       for g in schema.groups.groups),
            instantiate_schema(schema.sub, group_map, formula_map))
    if isinstance(schema, IndK):
        sub = instantiate_schema(schema.sub, group_map, formula_map)
        if schema.agent in group_map:
            return DK(group_map[schema.agent], sub)
        return IndK(schema.agent, sub)
    if isinstance(schema, Cmp):
        return Cmp(schema.op, _subst_group(schema.left, group_map),
                   _subst_group(schema.right, group_map))
    raise TypeError(f"not a formula node: {schema!r}")


def _placeholders_in(schema: Formula) -> tuple[list[str], list[str]]:
    groups = [p for p in GROUP_PLACEHOLDERS if p in agent_names(schema)]
    formulas = [p for p in FORMULA_PLACEHOLDERS if p in atom_names(schema)]
    return groups, formulas


def _subsets(pool: Sequence[str]) -> list[Group]:
    out = []
    for mask in range(1, 1 << len(pool)):
        out.append(Group(pool[i] for i in range(len(pool))
                         if mask >> i & 1))
    return out


def check_schema(schema: Formula, bounds: SearchBounds, pool: Sequence[str],
                 *, formula_pool: Sequence[Formula] | None = None,
                 constraint: Callable[[dict[str, Group]], bool] | None = None,
                 jobs: int = 1) -> list[SchemaInstance]:
    """Check every instantiation of a schema.

    Group placeholders (A/B/C/E) range over all non-empty subsets of pool;
    formula placeholders (phi/psi/chi) over formula_pool.  `constraint`
    filters group assignments.  Instantiations that produce the same
    formula share one search.
    """
    if formula_pool is None:
        formula_pool = DEFAULT_FORMULA_POOL
    gp, fp = _placeholders_in(schema)
    subsets = _subsets(pool)
    results: dict[Formula, SearchOutcome] = {}
    out: list[SchemaInstance] = []
    for groups in itertools.product(subsets, repeat=len(gp)):
        group_map = dict(zip(gp, groups))
        if constraint is not None and not constraint(group_map):
            continue
        for formulas in itertools.product(formula_pool, repeat=len(fp)):
            formula_map = dict(zip(fp, formulas))
            inst = instantiate_schema(schema, group_map, formula_map)
            outcome = results.get(inst)
            if outcome is None:
                outcome = check_validity(inst, bounds, jobs=jobs)
                results[inst] = outcome
            out.append(SchemaInstance(
                group_map=tuple(sorted(group_map.items())),
                formula_map=tuple(sorted(formula_map.items())),
                formula=inst, outcome=outcome))
    return out
