"""Reference retrieval algorithms that ignore evaluation counters.

``collect_nirs`` matches every stored subgoal on its own, starting from its
leaf.  ``collect_sirs`` is the backtracking traversal without pruning: it
enters completed branches too and filters results by frame state at the
leaves.  Neither reads ``in_eval``, so both work on tries built with
``track_in_eval=False``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .matcher import (
    Cell,
    ChoicePointFrame,
    Compound,
    MatcherState,
    SubsumedSubgoalCollector,
    deref,
    load_term,
    try_variable_matching,
)
from .terms import Term, TrieSymbol, call_args
from .trie import (
    HASHED,
    ROOT,
    ArityError,
    FrameState,
    SiblingHash,
    SubgoalFrame,
    SubgoalTrie,
    TrieNode,
)


class LeafRegistry:
    """Append-only list of the leaves created in a trie."""

    def __init__(self, leaves: Iterable[TrieNode] = ()):
        self.leaves: list[TrieNode] = list(leaves)

    @classmethod
    def of(cls, trie: SubgoalTrie) -> "LeafRegistry":
        return cls(f.leaf for f in trie.frames)

    def add(self, leaf: TrieNode) -> None:
        self.leaves.append(leaf)

    def __len__(self):
        return len(self.leaves)


def _check_call(trie: SubgoalTrie, call: Term) -> tuple:
    args = call_args(call)
    if len(args) != trie.arity or call.functor != trie.functor:
        raise ArityError(f"call does not belong to table {trie.functor}/{trie.arity}")
    return args


def match_path(st: MatcherState, loaded_args: list, symbols: list[TrieSymbol]) -> bool:
    """Match loaded call arguments against one stored symbol path."""
    stack = st.term_stack
    stack.extend(reversed(loaded_args))
    for sym in symbols:
        t = deref(stack.pop())
        kind = type(t)
        if kind is Cell:
            if not try_variable_matching(st, t, sym):
                return False
        elif kind is Compound:
            if t.symbol != sym:
                return False
            stack.extend(reversed(t.args))
        elif t != sym:
            return False
    return True


def collect_nirs(trie: SubgoalTrie, registry: LeafRegistry, call: Term) -> list[SubgoalFrame]:
    args = _check_call(trie, call)
    st = MatcherState()
    cells: dict = {}
    loaded = [load_term(a, cells, st.arena) for a in args]
    arena = st.arena
    arena_mark = len(arena)
    trail = st.trail
    evaluating = FrameState.EVALUATING
    out = []
    for leaf in registry.leaves:
        symbols = []
        node = leaf
        while not node.status & ROOT:
            symbols.append(node.symbol)
            node = node.parent
        symbols.reverse()
        matched = match_path(st, loaded, symbols)
        st.term_stack.clear()
        if trail:
            st.unwind_trail(0)
        if len(arena) > arena_mark:
            del arena[arena_mark:]
        if matched and leaf.frame.state is evaluating:
            out.append(leaf.frame)
    return out


@dataclass
class HashChoicePointFrame(ChoicePointFrame):
    cursor_top: int = 0


class SemiNaiveCollector(SubsumedSubgoalCollector):
    """Backtracking retrieval that explores every branch.

    A variable meeting a hash table walks all its buckets; the bucket an
    alternative lives in is kept on an auxiliary cursor stack so the walk
    can resume from it after backtracking.
    """

    def __init__(self, trie: SubgoalTrie, state: Optional[MatcherState] = None,
                 trace: Optional[list] = None):
        super().__init__(trie, state, trace)
        self.hash_cursors: list[int] = []
        self._cursor = 0

    def accept(self, leaf: TrieNode) -> bool:
        return leaf.frame.state is FrameState.EVALUATING

    def try_constant_term(self, sym, node) -> Optional[TrieNode]:
        if node is None:
            return None
        if type(node) is SiblingHash:
            node = node.bucket(sym)
        while node is not None:
            if node.symbol == sym:
                return node
            node = node.sibling
        return None

    def try_structured_term(self, term: Compound, node) -> Optional[TrieNode]:
        node = self.try_constant_term(term.symbol, node)
        if node is not None:
            self.state.term_stack.extend(reversed(term.args))
        return node

    def try_variable_term(self, variable: Cell, node) -> Optional[TrieNode]:
        if node is None:
            return None
        if type(node) is SiblingHash:
            table = node
            found = _next_in_buckets(table, 0)
            if found is None:
                return None
            current, bucket = found
            self._push_hash_alternative(table, current, bucket)
        elif node.status & HASHED:
            current = node
            self._push_hash_alternative(node.parent.child, current, self._cursor)
        else:
            current = node
            if node.sibling is not None:
                self.push_choice_point(node.sibling)
        if self.try_variable_matching(variable, current.symbol):
            return current
        return None

    def _push_hash_alternative(self, table: SiblingHash, current: TrieNode, bucket: int) -> None:
        if current.sibling is not None:
            alt, alt_bucket = current.sibling, bucket
        else:
            found = _next_in_buckets(table, bucket + 1)
            if found is None:
                return
            alt, alt_bucket = found
        st = self.state
        st.cp_stack.append(HashChoicePointFrame(
            alt, len(st.term_stack) + 1, len(st.term_log_stack), len(st.trail), len(st.arena),
            len(self.hash_cursors)))
        self.hash_cursors.append(alt_bucket)

    def restore_computation(self, frame) -> None:
        super().restore_computation(frame)
        if isinstance(frame, HashChoicePointFrame):
            self._cursor = self.hash_cursors[frame.cursor_top]
            del self.hash_cursors[frame.cursor_top:]


def _next_in_buckets(table: SiblingHash, start: int):
    buckets = table.buckets
    for b in range(start, len(buckets)):
        if buckets[b] is not None:
            return buckets[b], b
    return None


def collect_sirs(trie: SubgoalTrie, call: Term, *,
                 state: Optional[MatcherState] = None,
                 trace: Optional[list] = None) -> list[SubgoalFrame]:
    return SemiNaiveCollector(trie, state, trace).run(call)
