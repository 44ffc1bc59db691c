"""Retrieval of the evaluating subgoals that are instances of a call.

The trie is walked top-down with backtracking.  The call's arguments sit on a
term stack; each popped term is matched against a child of the current node,
choosing only children with evaluating subgoals below.  Variables of the call
can match any trie symbol and are the only source of choice points.

Runtime representation of call terms during a retrieval:

* constants are their :class:`~subgoal_index.terms.TrieSymbol`;
* variables are :class:`Cell` objects, bound by setting ``ref`` to a constant
  symbol, a :class:`Compound`, or an :class:`EnumSlot` (the cell was matched
  against the trie variable with that index);
* structures are :class:`Compound` objects.  Structures built while matching a
  variable against a functor symbol live in the state's arena.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .terms import (
    NIL,
    Atom,
    AtomSym,
    EmptyListSym,
    Int,
    IntSym,
    List,
    Struct,
    Term,
    TrieSymbol,
    TrieVar,
    Var,
    LIST_SYM,
    FunctorSym,
    constant_symbol,
    call_args,
    symbol_arity,
    STRUCTURED_SYMBOLS,
)
from .trie import (
    HASHED,
    ArityError,
    SiblingHash,
    SubgoalFrame,
    SubgoalTrie,
    TrieNode,
    effective_in_eval,
)


class TrieModifiedError(RuntimeError):
    """The trie changed while a retrieval was running over it."""


class Cell:
    __slots__ = ("ref",)

    def __init__(self):
        self.ref = None

    def __repr__(self):
        return f"<Cell {id(self):x} -> {self.ref!r}>"


class EnumSlot:
    """Entry of the variable enumerator vector."""

    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index

    def __repr__(self):
        return f"<EnumSlot {self.index}>"


class Compound:
    __slots__ = ("symbol", "args")

    def __init__(self, symbol: TrieSymbol, args: tuple):
        self.symbol = symbol
        self.args = args

    def __repr__(self):
        return f"<Compound {self.symbol} {self.args!r}>"


def deref(t):
    if type(t) is Cell:
        ref = t.ref
        if ref is not None and type(ref) is not EnumSlot:
            return ref
    return t


def load_term(term: Term, cells: dict, arena: list):
    """Convert ``term`` to runtime form; variables are shared through ``cells``."""
    if isinstance(term, Var):
        cell = cells.get(term.id)
        if cell is None:
            cell = cells[term.id] = Cell()
            arena.append(cell)
        return cell
    if isinstance(term, Struct):
        args = tuple(load_term(a, cells, arena) for a in term.args)
        comp = Compound(FunctorSym(term.functor, len(args)), args)
    elif isinstance(term, List):
        comp = Compound(LIST_SYM, (load_term(term.head, cells, arena), load_term(term.tail, cells, arena)))
    else:
        return constant_symbol(term)
    arena.append(comp)
    return comp


@dataclass
class ChoicePointFrame:
    alt_node: TrieNode
    term_stack_top: int
    term_log_stack_top: int
    trail_top: int
    arena_mark: int


class MatcherState:
    """Working storage of a retrieval.

    A state may be reused across retrievals; each retrieval leaves it exactly
    as it found it.
    """

    def __init__(self):
        self.term_stack: list = []
        # (raw term, number of terms its match pushed) per matched term
        self.term_log_stack: list = []
        self.var_enum: list[EnumSlot] = []
        self.trail: list[Cell] = []
        self.arena: list = []
        self.cp_stack: list[ChoicePointFrame] = []

    def marks(self) -> tuple[int, int, int, int, int]:
        return (len(self.term_stack), len(self.term_log_stack), len(self.trail),
                len(self.arena), len(self.cp_stack))

    def slot(self, index: int) -> EnumSlot:
        enum = self.var_enum
        while len(enum) <= index:
            enum.append(EnumSlot(len(enum)))
        return enum[index]

    def unwind_trail(self, top: int) -> None:
        trail = self.trail
        while len(trail) > top:
            trail.pop().ref = None


class SubsumedSubgoalCollector:
    """One retrieval over one trie.

    ``trace``, when given, receives every trie node the traversal descends
    into, in order.
    """

    def __init__(self, trie: SubgoalTrie, state: Optional[MatcherState] = None,
                 trace: Optional[list] = None):
        self.trie = trie
        self.state = state if state is not None else MatcherState()
        self.trace = trace

    def accept(self, leaf: TrieNode) -> bool:
        return True

    def run(self, call: Term) -> list[SubgoalFrame]:
        trie = self.trie
        args = call_args(call)
        if len(args) != trie.arity or call.functor != trie.functor:
            raise ArityError(f"call does not belong to table {trie.functor}/{trie.arity}")
        st = self.state
        version = trie.version
        base = st.marks()
        stack = st.term_stack
        log = st.term_log_stack
        cps = st.cp_stack
        trace = self.trace

        cells: dict = {}
        loaded = [load_term(a, cells, st.arena) for a in args]
        stack.extend(reversed(loaded))

        subgoals: list[SubgoalFrame] = []
        parent = trie.root
        node = parent.child
        while True:
            raw = stack.pop()
            depth = len(stack)
            term = deref(raw)
            kind = type(term)
            if kind is Cell:
                try_node = self.try_variable_term(term, node)
            elif kind is Compound:
                try_node = self.try_structured_term(term, node)
            else:
                try_node = self.try_constant_term(term, node)
            if try_node is not None:
                # the raw term is logged: a binding made after a choice point
                # is undone on backtracking, the variable itself must return
                log.append((raw, len(stack) - depth))
                if trace is not None:
                    trace.append(try_node)
                parent = try_node
                node = parent.child
                if len(stack) > base[0]:
                    continue
                if self.accept(parent):
                    subgoals.append(parent.frame)
            else:
                stack.append(raw)
            if len(cps) == base[4]:
                break
            if trie.version != version:
                self._reset(base)
                raise TrieModifiedError("subgoal trie modified during retrieval")
            frame = cps.pop()
            self.restore_computation(frame)
            node = frame.alt_node
            parent = node.parent

        self._reset(base)
        if trie.version != version:
            raise TrieModifiedError("subgoal trie modified during retrieval")
        return subgoals

    def _reset(self, base) -> None:
        st = self.state
        st.unwind_trail(base[2])
        del st.term_stack[base[0]:]
        del st.term_log_stack[base[1]:]
        del st.arena[base[3]:]
        del st.cp_stack[base[4]:]

    # -- backtracking ----------------------------------------------------------

    def push_choice_point(self, alt_node: TrieNode) -> None:
        st = self.state
        # the variable being matched was already popped; count it back in
        st.cp_stack.append(ChoicePointFrame(alt_node, len(st.term_stack) + 1,
                                            len(st.term_log_stack), len(st.trail), len(st.arena)))

    def restore_computation(self, frame: ChoicePointFrame) -> None:
        """Rebuild the term stack from the log and undo later bindings."""
        st = self.state
        stack = st.term_stack
        log = st.term_log_stack
        # topmost logged terms go back first, each replacing what its match pushed
        while len(log) > frame.term_log_stack_top:
            raw, pushed = log.pop()
            if pushed:
                del stack[len(stack) - pushed:]
            stack.append(raw)
        assert len(stack) == frame.term_stack_top, "term stack out of step with choice point"
        st.unwind_trail(frame.trail_top)
        del st.arena[frame.arena_mark:]

    # -- matching --------------------------------------------------------------

    def try_constant_term(self, sym: TrieSymbol, node) -> Optional[TrieNode]:
        if node is None:
            return None
        if type(node) is SiblingHash:
            node = node.bucket(sym)
        while node is not None:
            if node.symbol == sym:
                return node if effective_in_eval(node) > 0 else None
            node = node.sibling
        return None

    def try_structured_term(self, term: Compound, node) -> Optional[TrieNode]:
        if node is None:
            return None
        sym = term.symbol
        if type(node) is SiblingHash:
            node = node.bucket(sym)
        while node is not None:
            if node.symbol == sym:
                if effective_in_eval(node) > 0:
                    self.state.term_stack.extend(reversed(term.args))
                    return node
                return None
            node = node.sibling
        return None

    def try_variable_term(self, variable: Cell, node) -> Optional[TrieNode]:
        if node is None:
            return None
        if type(node) is SiblingHash:
            inode = node.index
            if inode is None:
                return None
            current = inode.node
            nxt = inode.next
            alt = nxt.node if nxt is not None else None
        elif node.status & HASHED:
            current = node
            nxt = node.in_eval.next
            alt = nxt.node if nxt is not None else None
        else:
            current = next_valid_node(node)
            if current is None:
                return None
            alt = next_valid_node(current.sibling)
        if alt is not None:
            self.push_choice_point(alt)
        if self.try_variable_matching(variable, current.symbol):
            return current
        return None

    def try_variable_matching(self, variable: Cell, symbol: TrieSymbol) -> bool:
        return try_variable_matching(self.state, variable, symbol)


def try_variable_matching(st: MatcherState, variable: Cell, symbol: TrieSymbol) -> bool:
    """Match an unbound or enumerated call variable against a trie symbol."""
    ref = variable.ref
    if type(symbol) is TrieVar:
        if ref is not None:
            return ref.index == symbol.index
        variable.ref = st.slot(symbol.index)
        st.trail.append(variable)
        return True
    if ref is not None:
        # enumerated variables only ever match their own trie variable
        return False
    if isinstance(symbol, STRUCTURED_SYMBOLS):
        args = tuple(Cell() for _ in range(symbol_arity(symbol)))
        comp = Compound(symbol, args)
        st.arena.extend(args)
        st.arena.append(comp)
        variable.ref = comp
        st.trail.append(variable)
        st.term_stack.extend(reversed(args))
    else:
        variable.ref = symbol
        st.trail.append(variable)
    return True


def next_valid_node(node: Optional[TrieNode]) -> Optional[TrieNode]:
    """First node from ``node`` along its sibling chain with evaluating subgoals."""
    while node is not None:
        if node.in_eval > 0:
            return node
        node = node.sibling
    return None


def collect_subsumed_subgoals(trie: SubgoalTrie, call: Term, *,
                              state: Optional[MatcherState] = None,
                              trace: Optional[list] = None) -> list[SubgoalFrame]:
    """Evaluating subgoals of ``trie`` that are instances of ``call``.

    Frames come back in the order the traversal reaches their leaves.
    """
    return SubsumedSubgoalCollector(trie, state, trace).run(call)


def runtime_to_term(t, names: Optional[dict] = None) -> Term:
    """Read a runtime term back as a :mod:`terms` value (for debugging and tests)."""
    if names is None:
        names = {}
    t = deref(t)
    if type(t) is Cell:
        key = ("slot", t.ref.index) if t.ref is not None else ("cell", id(t))
        if key not in names:
            names[key] = len(names)
        return Var(names[key])
    if type(t) is Compound:
        args = tuple(runtime_to_term(a, names) for a in t.args)
        if t.symbol == LIST_SYM:
            return List(*args)
        return Struct(t.symbol.name, args)
    if isinstance(t, AtomSym):
        return Atom(t.name)
    if isinstance(t, IntSym):
        return Int(t.value)
    if isinstance(t, EmptyListSym):
        return NIL
    raise TypeError(f"unexpected runtime term {t!r}")
