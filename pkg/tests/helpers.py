"""Shared builders, random generators and invariant checks for the tests."""

from __future__ import annotations

import itertools
import random

from subgoal_index.terms import (
    NIL,
    Atom,
    Int,
    List,
    Struct,
    Var,
    parse_term,
    term_vars,
)
from subgoal_index.trie import (
    HASHED,
    EvalIndexNode,
    FrameState,
    SiblingHash,
    SubgoalTrie,
    effective_in_eval,
)

# subgoals of the worked example, in trie insertion order; the two marked
# completed live under the 3 branch (n9..n11) and at n14
WORKED_CALLS = ["p(f(3),2,A)", "p(f(A),2,f(A))", "p(3,4,5)", "p(5,2,A)", "p(5,2,5)"]
WORKED_COMPLETED = ["p(3,4,5)", "p(5,2,A)"]


def build_worked_example(**kw) -> SubgoalTrie:
    trie = SubgoalTrie("p", 3, **kw)
    for text in WORKED_CALLS:
        frame, _ = trie.check_insert(parse_term(text))
        trie.mark_evaluating(frame)
    for text in WORKED_COMPLETED:
        trie.mark_completed(trie.lookup_variant(parse_term(text)))
    return trie


def worked_nodes(trie: SubgoalTrie) -> dict[str, object]:
    """Name the worked example's nodes n1..n15 by position."""
    n1, n9, n12 = list(trie.root.children())
    n2, n5 = list(n1.children())
    (n3,) = n2.children()
    (n4,) = n3.children()
    (n6,) = n5.children()
    (n7,) = n6.children()
    (n8,) = n7.children()
    (n10,) = n9.children()
    (n11,) = n10.children()
    (n13,) = n12.children()
    n14, n15 = list(n13.children())
    return dict(n1=n1, n2=n2, n3=n3, n4=n4, n5=n5, n6=n6, n7=n7, n8=n8, n9=n9,
                n10=n10, n11=n11, n12=n12, n13=n13, n14=n14, n15=n15)


# ---------------------------------------------------------------------------
# random terms

FUNCTORS = [("f", 1), ("g", 2), ("h", 3), ("k", 4)]


def random_term(rng: random.Random, depth: int, nvars: int, var_base: int = 0):
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        k = rng.random()
        if k < 0.3:
            return Var(var_base + rng.randrange(nvars))
        if k < 0.6:
            return Int(rng.randrange(6))
        if k < 0.85:
            return Atom(rng.choice("abc"))
        return NIL
    if roll < 0.85:
        name, arity = rng.choice(FUNCTORS)
        return Struct(name, tuple(random_term(rng, depth - 1, nvars, var_base) for _ in range(arity)))
    return List(random_term(rng, depth - 1, nvars, var_base), random_term(rng, depth - 1, nvars, var_base))


def term_depth(t) -> int:
    if isinstance(t, Struct):
        return 1 + max(term_depth(a) for a in t.args)
    if isinstance(t, List):
        return 1 + max(term_depth(t.head), term_depth(t.tail))
    return 0


def generalize(rng: random.Random, term, var_pool: int = 3, p: float = 0.3):
    """Replace random subterms of ``term`` by variables drawn from a small pool."""
    if rng.random() < p:
        return Var(1000 + rng.randrange(var_pool))
    if isinstance(term, Struct):
        return Struct(term.functor, tuple(generalize(rng, a, var_pool, p) for a in term.args))
    if isinstance(term, List):
        return List(generalize(rng, term.head, var_pool, p), generalize(rng, term.tail, var_pool, p))
    if isinstance(term, Var):
        return Var(1000 + term.id % var_pool)
    return term


def random_case(seed: int, max_subgoals: int = 200, max_depth: int = 4):
    """A trie with mixed evaluating/completed subgoals plus queries for it."""
    rng = random.Random(seed)
    arity = rng.randint(1, 4)
    wide = rng.random() < 0.45
    trie = SubgoalTrie("p", arity)
    for _ in range(rng.randint(0, max_subgoals)):
        args = [random_term(rng, rng.randint(0, max_depth - 1), 3) for _ in range(arity)]
        if wide:
            args[0] = Int(rng.randrange(60)) if rng.random() < 0.8 else args[0]
        frame, _ = trie.check_insert(Struct("p", tuple(args)))
        if frame.state is not FrameState.EVALUATING and rng.random() < 0.7:
            trie.mark_evaluating(frame)
    for frame in trie.frames:
        if frame.state is FrameState.EVALUATING and rng.random() < 0.4:
            trie.mark_completed(frame)
    queries = []
    for _ in range(4):
        roll = rng.random()
        if trie.frames and roll < 0.65:
            base = rng.choice(trie.frames).call
            queries.append(Struct("p", tuple(generalize(rng, a) for a in base.args)))
        elif trie.frames and roll < 0.75:
            queries.append(rng.choice(trie.frames).call)
        else:
            queries.append(Struct("p", tuple(random_term(rng, 2, 3, 1000) for _ in range(arity))))
    queries.append(Struct("p", tuple(Var(1000 + i) for i in range(arity))))
    return trie, queries


def has_hash_level(trie: SubgoalTrie) -> bool:
    return any(isinstance(n.child, SiblingHash) for n in itertools.chain([trie.root], trie.iter_nodes()))


# ---------------------------------------------------------------------------
# invariant checks


def recount(node) -> int:
    """Evaluating leaves at or below ``node``, found by walking the subtree."""
    total = 0
    stack = [node]
    while stack:
        n = stack.pop()
        if n.frame is not None and n.frame.state is FrameState.EVALUATING:
            total += 1
        stack.extend(n.children())
    return total


def subtree_counts(trie: SubgoalTrie) -> dict[int, int]:
    """Evaluating leaves below every node, keyed by ``id(node)``, in one pass."""
    order = []
    stack = [trie.root]
    while stack:
        n = stack.pop()
        order.append(n)
        stack.extend(n.children())
    counts: dict[int, int] = {}
    for n in reversed(order):
        own = 1 if n.frame is not None and n.frame.state is FrameState.EVALUATING else 0
        counts[id(n)] = own + sum(counts[id(c)] for c in n.children())
    return counts


def counter_violations(trie: SubgoalTrie) -> list[str]:
    problems = []
    evaluating = sum(1 for f in trie.frames if f.state is FrameState.EVALUATING)
    counts = subtree_counts(trie)
    if effective_in_eval(trie.root) != evaluating:
        problems.append(f"root count {effective_in_eval(trie.root)} != {evaluating} evaluating")
    if counts[id(trie.root)] != evaluating:
        problems.append("recount at root disagrees with frame states")
    for node in itertools.chain([trie.root], trie.iter_nodes()):
        if node is not trie.root and effective_in_eval(node) != counts[id(node)]:
            problems.append(f"{node!r}: recount {counts[id(node)]}")
        if node.status & HASHED:
            if not (node.in_eval == 0 or isinstance(node.in_eval, EvalIndexNode)):
                problems.append(f"{node!r}: hashed node holds a plain counter")
            elif node.in_eval and node.in_eval.node is not node:
                problems.append(f"{node!r}: index node points elsewhere")
        elif not isinstance(node.in_eval, int) or node.in_eval < 0:
            problems.append(f"{node!r}: bad plain counter {node.in_eval!r}")
        table = node.child
        if isinstance(table, SiblingHash):
            problems += index_violations(table)
    return problems


def index_violations(table: SiblingHash) -> list[str]:
    problems = []
    seen = []
    prev = None
    inode = table.index
    while inode is not None:
        if inode.prev is not prev:
            problems.append("evaluation index: broken prev link")
        if inode.in_eval <= 0:
            problems.append("evaluation index: non-positive count")
        seen.append(inode.node)
        prev, inode = inode, inode.next
    if table.index_tail is not prev:
        problems.append("evaluation index: stale tail")
    members = list(table.nodes())
    positive = {id(n) for n in members if effective_in_eval(n) > 0}
    if {id(n) for n in seen} != positive or len(seen) != len(positive):
        problems.append("evaluation index membership differs from positive members")
    for b, head in enumerate(table.buckets):
        n = head
        while n is not None:
            if table.bucket_of(n.symbol) != b:
                problems.append(f"{n!r} sits in the wrong bucket")
            n = n.sibling
    if len(members) != table.entry_count:
        problems.append("entry count out of date")
    return problems


# ---------------------------------------------------------------------------
# second subsumption oracle


def subterms(t):
    out = [t]
    if isinstance(t, Struct):
        for a in t.args:
            out += subterms(a)
    elif isinstance(t, List):
        out += subterms(t.head) + subterms(t.tail)
    return out


def substitute(t, sub):
    if isinstance(t, Var):
        return sub.get(t.id, t)
    if isinstance(t, Struct):
        return Struct(t.functor, tuple(substitute(a, sub) for a in t.args))
    if isinstance(t, List):
        return List(substitute(t.head, sub), substitute(t.tail, sub))
    return t


def brute_force_subsumes(general, specific) -> bool:
    """Try every binding of ``general``'s variables to subterms of ``specific``.

    ``specific``'s variables are renamed out of the way first so the two id
    spaces cannot collide.
    """
    shift = 1 + max([v.id for v in term_vars(general)] + [v.id for v in term_vars(specific)] + [0])
    specific = substitute(specific, {v.id: Var(v.id + shift) for v in term_vars(specific)})
    names = sorted({v.id for v in term_vars(general)})
    candidates = list(dict.fromkeys(subterms(specific)))
    for choice in itertools.product(candidates, repeat=len(names)):
        if substitute(general, dict(zip(names, choice))) == specific:
            return True
    return False
