"""Shared strategies and pair-set oracles for the property tests."""

import hypothesis.strategies as st

from epicmp.kripke import KripkeModel, Relation
from epicmp.syntax import (And, Atom, CDK, CK, Cmp, CmpOp, DK, Group, Iff,
                           Imp, IndK, Not, Or, Supergroup)

AGENTS = ("a", "b", "c", "d")

_CLOSURES = (
    (),
    ("reflexive",),
    ("reflexive", "transitive"),
    ("reflexive", "symmetric"),
    ("reflexive", "symmetric", "transitive"),
)


@st.composite
def models(draw, max_worlds=4, max_agents=3, atoms=("p", "q"),
           closures=_CLOSURES):
    """Random models; closure choices skew toward the standard frames."""
    n = draw(st.integers(1, max_worlds))
    k = draw(st.integers(1, max_agents))
    worlds = tuple(f"w{i}" for i in range(n))
    agents = AGENTS[:k]
    pair = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
    closure = draw(st.sampled_from(closures))
    edges = {}
    for agent in agents:
        pairs = draw(st.sets(pair, max_size=n * n))
        edges[agent] = [(worlds[i], worlds[j]) for i, j in pairs]
    valuation = {atom: [w for i, w in enumerate(worlds)
                        if draw(st.booleans())]
                 for atom in atoms}
    return KripkeModel.from_edges(worlds, agents, edges, valuation,
                                  closure=closure)


def kt_models(**kw):
    return models(closures=(("reflexive",),
                            ("reflexive", "transitive"),
                            ("reflexive", "symmetric", "transitive")), **kw)


def s5_models(**kw):
    return models(closures=(("reflexive", "symmetric", "transitive"),), **kw)


def formulas_over(agents, atoms=("p", "q", "r"), max_leaves=10):
    """Random formulas restricted to the given agents and atom names."""
    agent = st.sampled_from(list(agents))
    groups = st.sets(agent, min_size=1,
                     max_size=min(3, len(agents))).map(Group)
    base = st.one_of(
        st.sampled_from(list(atoms)).map(Atom),
        st.builds(Cmp, st.sampled_from(list(CmpOp)), groups, groups))

    def compound(children):
        return st.one_of(
            st.builds(Not, children),
            st.builds(And, children, children),
            st.builds(Or, children, children),
            st.builds(Imp, children, children),
            st.builds(Iff, children, children),
            st.builds(DK, groups, children),
            st.builds(CK, groups, children),
            st.builds(IndK, agent, children),
            st.builds(CDK,
                      st.sets(groups, min_size=1, max_size=2)
                      .map(Supergroup),
                      children),
        )

    return st.recursive(base, compound, max_leaves=max_leaves)


@st.composite
def model_formula_pairs(draw, max_worlds=4, max_agents=3,
                        atoms=("p", "q"), extra_atoms=("r",), **kw):
    """A random model plus a formula speaking only about its agents; the
    formula may also use atoms the model does not declare."""
    m = draw(models(max_worlds=max_worlds, max_agents=max_agents,
                    atoms=atoms, **kw))
    f = draw(formulas_over(m.agents, atoms=tuple(atoms) + tuple(extra_atoms)))
    return m, f


# --- pair-set oracles (independent re-implementations) -------------------

def rel_pairs(rel: Relation) -> set[tuple[int, int]]:
    return {(i, j) for i in range(rel.size) for j in range(rel.size)
            if rel.rows[i] >> j & 1}


def oracle_reflexive_transitive_closure(pairs, n):
    out = set(pairs) | {(i, i) for i in range(n)}
    while True:
        extra = {(i, l) for i, j in out for jj, l in out if j == jj} - out
        if not extra:
            return out
        out |= extra
