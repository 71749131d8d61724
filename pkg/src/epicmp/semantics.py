"""Truth evaluation of formulas on models.

Everything is computed as whole-model extensions (bitmasks over worlds), so
`satisfies`, `valid_in_model` and `extension` share one traversal.  Box-style
operators hold at w when the operand's extension covers the relation's row at
w.  The comparison `[A <= B]` holds at w when A's joint row at w is contained
in B's: A's pooled information is at least as sharp, so anything B jointly
knows at w transfers to A.  The strict/mutual/incomparable forms and `K{a}`
are evaluated directly with the same row tests their desugarings produce.

Atoms not declared by the model are false everywhere by default;
`strict_atoms=True` turns that into an UnknownAtomError.
"""

from __future__ import annotations

from .kripke import (KripkeModel, ModelError, Relation, cdk_relation,
                     common_relation, joint_relation)
from .syntax import (Atom, CK, CDK, Cmp, CmpOp, DK, Formula, Iff, Imp, IndK,
                     And, Group, Not, Or)

__all__ = ["satisfies", "valid_in_model", "extension", "UnknownAtomError"]


class UnknownAtomError(ModelError):
    pass


class _Evaluator:
    """One evaluation pass over a fixed model; memoizes per subformula."""

    def __init__(self, m: KripkeModel, strict_atoms: bool):
        self.m = m
        self.strict_atoms = strict_atoms
        self.full = (1 << m.n_worlds) - 1
        self._ext: dict[Formula, int] = {}
        self._rows: dict[object, Relation] = {}

    def rows(self, kind: str, key: Group | tuple) -> Relation:
        cache_key = (kind, key)
        rel = self._rows.get(cache_key)
        if rel is None:
            if kind == "joint":
                rel = joint_relation(self.m, key)
            elif kind == "common":
                rel = common_relation(self.m, key)
            else:
                rel = cdk_relation(self.m, key)
            self._rows[cache_key] = rel
        return rel

    def box(self, rel: Relation, ext: int) -> int:
        out = 0
        for w, row in enumerate(rel.rows):
            if row & ~ext == 0:
                out |= 1 << w
        return out

    def leq_bits(self, left: Group, right: Group) -> int:
        """Worlds where left's joint row is contained in right's."""
        a = self.rows("joint", left)
        b = self.rows("joint", right)
        out = 0
        for w in range(self.m.n_worlds):
            if a.rows[w] & ~b.rows[w] == 0:
                out |= 1 << w
        return out

    def ext(self, f: Formula) -> int:
        out = self._ext.get(f)
        if out is not None:
            return out
        if isinstance(f, Atom):
            mask = self.m.atom_mask(f.name)
            if mask is None:
                if self.strict_atoms:
                    raise UnknownAtomError(f"unknown atom {f.name!r}")
                mask = 0
            out = mask
        elif isinstance(f, Not):
            out = self.full & ~self.ext(f.sub)
        elif isinstance(f, And):
            out = self.ext(f.left) & self.ext(f.right)
        elif isinstance(f, Or):
            out = self.ext(f.left) | self.ext(f.right)
        elif isinstance(f, Imp):
            out = (self.full & ~self.ext(f.left)) | self.ext(f.right)
        elif isinstance(f, Iff):
            out = self.full & ~(self.ext(f.left) ^ self.ext(f.right))
        elif isinstance(f, DK):
            out = self.box(self.rows("joint", f.group), self.ext(f.sub))
        elif isinstance(f, IndK):
            out = self.box(self.rows("joint", Group([f.agent])),
                           self.ext(f.sub))
        elif isinstance(f, CK):
            out = self.box(self.rows("common", f.group), self.ext(f.sub))
        elif isinstance(f, CDK):
            out = self.box(self.rows("cdk", f.groups), self.ext(f.sub))
        elif isinstance(f, Cmp):
            leq = self.leq_bits(f.left, f.right)
            if f.op is CmpOp.LEQ:
                out = leq
            else:
                geq = self.leq_bits(f.right, f.left)
                if f.op is CmpOp.LT:
                    out = leq & ~geq & self.full
                elif f.op is CmpOp.EQV:
                    out = leq & geq
                else:
                    out = self.full & ~leq & ~geq
        else:
            raise TypeError(f"not a formula node: {f!r}")
        self._ext[f] = out
        return out


def _extension_mask(m: KripkeModel, f: Formula, strict_atoms: bool) -> int:
    return _Evaluator(m, strict_atoms).ext(f)


def satisfies(m: KripkeModel, world: str, f: Formula, *,
              strict_atoms: bool = False) -> bool:
    """Does f hold at the named world of m?"""
    w = m.world_index(world)
    return bool(_extension_mask(m, f, strict_atoms) >> w & 1)


def valid_in_model(m: KripkeModel, f: Formula, *,
                   strict_atoms: bool = False) -> bool:
    """Does f hold at every world of m?"""
    return _extension_mask(m, f, strict_atoms) == (1 << m.n_worlds) - 1


def extension(m: KripkeModel, f: Formula, *,
              strict_atoms: bool = False) -> set[str]:
    """The set of worlds (by name) where f holds."""
    mask = _extension_mask(m, f, strict_atoms)
    return {w for i, w in enumerate(m.worlds) if mask >> i & 1}
