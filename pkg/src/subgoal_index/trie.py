"""Subgoal tries with per-node evaluation counters.

Every node counts the evaluating subgoals stored below it (``in_eval``).
Sibling chains longer than :data:`HASH_THRESHOLD` move into a
:class:`SiblingHash`.  Nodes living in a hash table keep no counter of their
own: their ``in_eval`` slot is either ``0`` or a link to an
:class:`EvalIndexNode` in the table's evaluation index, a doubly-linked list
holding exactly the members with evaluating subgoals below them.
"""

from __future__ import annotations

import enum
from typing import Iterator, Optional, Union

from .terms import (
    Term,
    TrieSymbol,
    call_args,
    call_indicator,
    flatten_args,
    format_term,
    unflatten_args,
    Struct,
    Atom,
)

HASH_THRESHOLD = 8
INITIAL_BUCKETS = 64

# status bits
ROOT = 0x1
LEAF = 0x2
HASHED = 0x4


class ArityError(ValueError):
    pass


class LifecycleError(RuntimeError):
    """A frame was moved through an invalid evaluation-state transition."""


class FrameState(enum.Enum):
    NEW = "new"
    EVALUATING = "evaluating"
    COMPLETED = "completed"


class TrieNode:
    __slots__ = ("symbol", "child", "parent", "sibling", "status", "in_eval", "frame")

    def __init__(self, symbol: Optional[TrieSymbol], parent: Optional["TrieNode"], status: int = 0):
        self.symbol = symbol
        self.child: Union[TrieNode, SiblingHash, None] = None
        self.parent = parent
        self.sibling: Optional[TrieNode] = None
        self.status = status
        # counter for plain nodes; 0 or an EvalIndexNode for hashed nodes
        self.in_eval: Union[int, EvalIndexNode] = 0
        self.frame: Optional[SubgoalFrame] = None

    @property
    def is_root(self) -> bool:
        return bool(self.status & ROOT)

    @property
    def is_leaf(self) -> bool:
        return bool(self.status & LEAF)

    @property
    def is_hashed(self) -> bool:
        return bool(self.status & HASHED)

    def children(self) -> Iterator["TrieNode"]:
        """Children in chain order, or in bucket order for a hashed level."""
        child = self.child
        if isinstance(child, SiblingHash):
            yield from child.nodes()
            return
        while child is not None:
            yield child
            child = child.sibling

    def __repr__(self):
        return f"<TrieNode {self.symbol if self.symbol is not None else 'root'} in_eval={effective_in_eval(self)}>"


class EvalIndexNode:
    __slots__ = ("prev", "next", "node", "in_eval")

    def __init__(self, node: TrieNode, in_eval: int = 1):
        self.prev: Optional[EvalIndexNode] = None
        self.next: Optional[EvalIndexNode] = None
        self.node = node
        self.in_eval = in_eval


class SiblingHash:
    """Hash table replacing a long sibling chain; buckets chain via ``sibling``."""

    __slots__ = ("buckets", "entry_count", "index", "index_tail", "owner")

    def __init__(self, owner: TrieNode, bucket_count: int = INITIAL_BUCKETS):
        self.buckets: list[Optional[TrieNode]] = [None] * bucket_count
        self.entry_count = 0
        self.index: Optional[EvalIndexNode] = None
        self.index_tail: Optional[EvalIndexNode] = None
        self.owner = owner

    @property
    def bucket_count(self) -> int:
        return len(self.buckets)

    def bucket_of(self, symbol: TrieSymbol) -> int:
        return symbol.hkey & (len(self.buckets) - 1)

    def bucket(self, symbol: TrieSymbol) -> Optional[TrieNode]:
        """Head of the chain that would hold ``symbol``."""
        return self.buckets[symbol.hkey & (len(self.buckets) - 1)]

    def insert(self, node: TrieNode) -> None:
        b = self.bucket_of(node.symbol)
        node.sibling = self.buckets[b]
        self.buckets[b] = node
        self.entry_count += 1
        if self.entry_count > len(self.buckets):
            self._grow()

    def _grow(self) -> None:
        old = self.buckets
        self.buckets = [None] * (2 * len(old))
        for head in old:
            node = head
            while node is not None:
                nxt = node.sibling
                b = self.bucket_of(node.symbol)
                node.sibling = self.buckets[b]
                self.buckets[b] = node
                node = nxt

    def nodes(self) -> Iterator[TrieNode]:
        for head in self.buckets:
            node = head
            while node is not None:
                yield node
                node = node.sibling

    def add_index_node(self, node: TrieNode) -> EvalIndexNode:
        inode = EvalIndexNode(node)
        inode.prev = self.index_tail
        if self.index_tail is None:
            self.index = inode
        else:
            self.index_tail.next = inode
        self.index_tail = inode
        return inode

    def remove_index_node(self, inode: EvalIndexNode) -> None:
        if inode.prev is None:
            self.index = inode.next
        else:
            inode.prev.next = inode.next
        if inode.next is None:
            self.index_tail = inode.prev
        else:
            inode.next.prev = inode.prev
        inode.prev = inode.next = None

    def index_nodes(self) -> Iterator[EvalIndexNode]:
        inode = self.index
        while inode is not None:
            yield inode
            inode = inode.next


def effective_in_eval(node: TrieNode) -> int:
    """Number of evaluating subgoals below ``node``."""
    if node.status & HASHED:
        inode = node.in_eval
        return inode.in_eval if inode else 0
    return node.in_eval


class SubgoalFrame:
    __slots__ = ("id", "call", "leaf", "state")

    def __init__(self, id: int, call: Term, leaf: TrieNode):
        self.id = id
        self.call = call
        self.leaf = leaf
        self.state = FrameState.NEW

    @property
    def evaluating(self) -> bool:
        return self.state is FrameState.EVALUATING

    def __repr__(self):
        return f"<SubgoalFrame {self.id} {format_term(self.call)} {self.state.value}>"


class SubgoalTrie:
    """Table of the calls made to one predicate.

    With ``track_in_eval=False`` the evaluation counters are never touched;
    frame states still change.  The baseline retrieval algorithms run on
    such tries.
    """

    def __init__(self, functor: str, arity: int, *, track_in_eval: bool = True):
        if arity < 1:
            raise ArityError(f"{functor}/{arity}: tabled predicates need at least one argument")
        self.functor = functor
        self.arity = arity
        self.track_in_eval = track_in_eval
        self.root = TrieNode(None, None, ROOT)
        self.frames: list[SubgoalFrame] = []
        self.node_count = 0
        # bumped by every mutation; retrievals check it to detect interference
        self.version = 0

    @property
    def predicate(self) -> tuple[str, int]:
        return self.functor, self.arity

    def __len__(self):
        return len(self.frames)

    def _path(self, call: Term) -> list[TrieSymbol]:
        if call_indicator(call) != (self.functor, self.arity):
            name, arity = call_indicator(call)
            raise ArityError(f"{format_term(call)} is {name}/{arity}, table is {self.functor}/{self.arity}")
        return flatten_args(call_args(call))

    def make_call(self, args) -> Term:
        return Struct(self.functor, tuple(args)) if args else Atom(self.functor)

    def check_insert(self, call: Term) -> tuple[SubgoalFrame, bool]:
        """Find the frame for ``call``'s variant, creating its path if needed."""
        parent = self.root
        for sym in self._path(call):
            parent = self._child(parent, sym, create=True)
        if parent.frame is not None:
            return parent.frame, False
        self.version += 1
        parent.status |= LEAF
        canonical = self.make_call(unflatten_args(self._symbols_to(parent), self.arity))
        frame = SubgoalFrame(len(self.frames), canonical, parent)
        parent.frame = frame
        self.frames.append(frame)
        return frame, True

    def lookup_variant(self, call: Term) -> Optional[SubgoalFrame]:
        try:
            path = self._path(call)
        except ArityError:
            return None
        node = self.root
        for sym in path:
            node = self._child(node, sym, create=False)
            if node is None:
                return None
        return node.frame

    @staticmethod
    def _symbols_to(node: TrieNode) -> list[TrieSymbol]:
        out = []
        while not node.status & ROOT:
            out.append(node.symbol)
            node = node.parent
        out.reverse()
        return out

    def _child(self, parent: TrieNode, sym: TrieSymbol, create: bool) -> Optional[TrieNode]:
        first = parent.child
        if isinstance(first, SiblingHash):
            node = first.bucket(sym)
            while node is not None:
                if node.symbol == sym:
                    return node
                node = node.sibling
            if not create:
                return None
            node = TrieNode(sym, parent, HASHED)
            first.insert(node)
            self.node_count += 1
            self.version += 1
            return node

        last = None
        length = 0
        node = first
        while node is not None:
            if node.symbol == sym:
                return node
            last = node
            length += 1
            node = node.sibling
        if not create:
            return None
        node = TrieNode(sym, parent)
        if last is None:
            parent.child = node
        else:
            last.sibling = node
        self.node_count += 1
        self.version += 1
        if length + 1 > HASH_THRESHOLD:
            self._migrate(parent)
        return node

    def _migrate(self, parent: TrieNode) -> None:
        """Move ``parent``'s sibling chain into a fresh hash table."""
        table = SiblingHash(parent)
        chain = list(parent.children())
        for node in chain:
            count = node.in_eval
            node.status |= HASHED
            node.in_eval = 0
            table.insert(node)
            if count > 0:
                inode = table.add_index_node(node)
                inode.in_eval = count
                node.in_eval = inode
        parent.child = table

    # -- evaluation lifecycle ------------------------------------------------

    def mark_evaluating(self, frame: SubgoalFrame) -> None:
        if frame.state is FrameState.EVALUATING:
            raise LifecycleError(f"{format_term(frame.call)} is already being evaluated")
        self.version += 1
        frame.state = FrameState.EVALUATING
        if not self.track_in_eval:
            return
        root = self.root
        node = frame.leaf
        while node is not root:
            if node.status & HASHED:
                inode = node.in_eval
                if inode:
                    inode.in_eval += 1
                else:
                    node.in_eval = node.parent.child.add_index_node(node)
            else:
                node.in_eval += 1
            node = node.parent
        root.in_eval += 1

    def mark_completed(self, frame: SubgoalFrame) -> None:
        if frame.state is not FrameState.EVALUATING:
            raise LifecycleError(f"{format_term(frame.call)} is not being evaluated")
        self.version += 1
        frame.state = FrameState.COMPLETED
        if not self.track_in_eval:
            return
        root = self.root
        node = frame.leaf
        while node is not root:
            if node.status & HASHED:
                inode = node.in_eval
                if inode.in_eval == 1:
                    node.parent.child.remove_index_node(inode)
                    node.in_eval = 0
                else:
                    inode.in_eval -= 1
            else:
                node.in_eval -= 1
            node = node.parent
        root.in_eval -= 1

    # -- inspection ----------------------------------------------------------

    def iter_nodes(self) -> Iterator[TrieNode]:
        """All non-root nodes, depth first."""
        stack = list(reversed(list(self.root.children())))
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(list(node.children())))

    def dump(self) -> list[str]:
        """Indented listing of the trie with each node's evaluating count."""
        lines = [f"{self.functor}/{self.arity} [{effective_in_eval(self.root)}]"]

        def walk(node: TrieNode, depth: int):
            child = node.child
            pad = "  " * depth
            if isinstance(child, SiblingHash):
                lines.append(f"{pad}<hash buckets={child.bucket_count} entries={child.entry_count} "
                             f"indexed={sum(1 for _ in child.index_nodes())}>")
            for c in node.children():
                line = f"{pad}{c.symbol} [{effective_in_eval(c)}]"
                if c.frame is not None:
                    line += f" -> {format_term(c.frame.call)} {c.frame.state.value}"
                lines.append(line)
                walk(c, depth + 1)

        walk(self.root, 1)
        return lines
