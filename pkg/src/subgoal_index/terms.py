"""First-order terms, their trie-symbol flattening, text I/O and a subsumption oracle.

Terms are immutable values.  A subgoal call such as ``p(f(X),2,f(X))`` is
stored in a subgoal trie as the preorder sequence of symbols of its
arguments, with variables renamed ``TrieVar(0), TrieVar(1), ...`` in order of
first occurrence so that variant calls share a single path.
"""

from __future__ import annotations

import string
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class Var:
    id: int


@dataclass(frozen=True)
class Struct:
    functor: str
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError(f"structure {self.functor!r} needs at least one argument")
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class List:
    """A list cell ``[head|tail]``."""

    head: "Term"
    tail: "Term"


@dataclass(frozen=True)
class EmptyList:
    pass


NIL = EmptyList()

Term = Union[Atom, Int, Var, Struct, List, EmptyList]


def make_list(items: Iterable[Term], tail: Term = NIL) -> Term:
    items = list(items)
    for item in reversed(items):
        tail = List(item, tail)
    return tail


def term_vars(term: Term) -> Iterator[Var]:
    """Yield variable occurrences in preorder (repeats included)."""
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            yield t
        elif isinstance(t, Struct):
            stack.extend(reversed(t.args))
        elif isinstance(t, List):
            stack.append(t.tail)
            stack.append(t.head)


def is_ground(term: Term) -> bool:
    return next(term_vars(term), None) is None


def call_args(call: Term) -> tuple:
    """Arguments of a subgoal call; atoms are zero-arity calls."""
    if isinstance(call, Struct):
        return call.args
    if isinstance(call, Atom):
        return ()
    raise TypeError(f"not a callable term: {format_term(call)}")


def call_indicator(call: Term) -> tuple[str, int]:
    if isinstance(call, Struct):
        return call.functor, call.arity
    if isinstance(call, Atom):
        return call.name, 0
    raise TypeError(f"not a callable term: {format_term(call)}")


# ---------------------------------------------------------------------------
# trie symbols


def _crc(text: str) -> int:
    return zlib.crc32(text.encode("utf-8"))


@dataclass(frozen=True)
class TrieSymbol:
    # process-independent hash used for bucket selection
    hkey: int = field(init=False, compare=False, repr=False)

    def _key(self) -> int:
        raise NotImplementedError

    def __post_init__(self):
        object.__setattr__(self, "hkey", self._key())


@dataclass(frozen=True)
class AtomSym(TrieSymbol):
    name: str

    def _key(self):
        return _crc("a:" + self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class IntSym(TrieSymbol):
    value: int

    def _key(self):
        return (self.value * 2654435761) & 0xFFFFFFFF

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class FunctorSym(TrieSymbol):
    name: str
    arity: int

    def _key(self):
        return _crc(f"f:{self.name}/{self.arity}")

    def __str__(self):
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True)
class ListSym(TrieSymbol):
    arity = 2

    def _key(self):
        return _crc("list")

    def __str__(self):
        return "[|]"


@dataclass(frozen=True)
class EmptyListSym(TrieSymbol):
    def _key(self):
        return _crc("[]")

    def __str__(self):
        return "[]"


@dataclass(frozen=True)
class TrieVar(TrieSymbol):
    index: int

    def _key(self):
        return _crc(f"v:{self.index}")

    def __str__(self):
        return f"VAR{self.index}"


LIST_SYM = ListSym()
NIL_SYM = EmptyListSym()

CONSTANT_SYMBOLS = (AtomSym, IntSym, EmptyListSym)
STRUCTURED_SYMBOLS = (FunctorSym, ListSym)


def symbol_arity(sym: TrieSymbol) -> int:
    if isinstance(sym, FunctorSym):
        return sym.arity
    if isinstance(sym, ListSym):
        return 2
    return 0


def constant_symbol(term: Term) -> TrieSymbol:
    if isinstance(term, Atom):
        return AtomSym(term.name)
    if isinstance(term, Int):
        return IntSym(term.value)
    if isinstance(term, EmptyList):
        return NIL_SYM
    raise TypeError(f"not a constant: {term!r}")


def flatten(term: Term) -> list[TrieSymbol]:
    """Preorder symbol sequence of ``term`` with standardized variables."""
    return flatten_args((term,))


def flatten_args(args: Sequence[Term]) -> list[TrieSymbol]:
    """Flatten a sequence of terms as one path, sharing variable numbering."""
    out: list[TrieSymbol] = []
    numbering: dict[int, int] = {}
    stack = list(reversed(args))
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            k = numbering.get(t.id)
            if k is None:
                k = numbering[t.id] = len(numbering)
            out.append(TrieVar(k))
        elif isinstance(t, Struct):
            out.append(FunctorSym(t.functor, len(t.args)))
            stack.extend(reversed(t.args))
        elif isinstance(t, List):
            out.append(LIST_SYM)
            stack.append(t.tail)
            stack.append(t.head)
        else:
            out.append(constant_symbol(t))
    return out


def unflatten_args(symbols: Sequence[TrieSymbol], count: int) -> tuple:
    """Rebuild ``count`` terms from a preorder symbol sequence.

    ``TrieVar(k)`` becomes ``Var(k)``.
    """
    pos = 0

    def build() -> Term:
        nonlocal pos
        if pos >= len(symbols):
            raise ValueError("symbol sequence ends inside a term")
        sym = symbols[pos]
        pos += 1
        if isinstance(sym, TrieVar):
            return Var(sym.index)
        if isinstance(sym, AtomSym):
            return Atom(sym.name)
        if isinstance(sym, IntSym):
            return Int(sym.value)
        if isinstance(sym, EmptyListSym):
            return NIL
        if isinstance(sym, ListSym):
            head = build()
            return List(head, build())
        return Struct(sym.name, tuple(build() for _ in range(sym.arity)))

    terms = tuple(build() for _ in range(count))
    if pos != len(symbols):
        raise ValueError("trailing symbols after the last term")
    return terms


def unflatten(symbols: Sequence[TrieSymbol]) -> Term:
    (term,) = unflatten_args(symbols, 1)
    return term


def variant(a: Term, b: Term) -> bool:
    return flatten(a) == flatten(b)


# ---------------------------------------------------------------------------
# text syntax


class TermSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at column {pos + 1}: {text!r}")
        self.text = text
        self.pos = pos


_NAME_CHARS = set(string.ascii_letters + string.digits + "_")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.names: dict[str, int] = {}
        self.next_id = 0

    def fail(self, message):
        raise TermSyntaxError(message, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.fail(f"expected {ch!r}")
        self.pos += 1

    def name(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in _NAME_CHARS:
            self.pos += 1
        return self.text[start:self.pos]

    def fresh_var(self) -> Var:
        v = Var(self.next_id)
        self.next_id += 1
        return v

    def term(self) -> Term:
        ch = self.peek()
        if not ch:
            self.fail("unexpected end of input")
        if ch.isdigit() or (ch == "-" and self.text[self.pos + 1:self.pos + 2].isdigit()):
            start = self.pos
            self.pos += 1
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return Int(int(self.text[start:self.pos]))
        if ch == "[":
            return self.list_tail()
        if ch == "_" or ch.isupper():
            name = self.name()
            if name == "_":
                return self.fresh_var()
            if name not in self.names:
                self.names[name] = self.fresh_var().id
            return Var(self.names[name])
        if ch.islower():
            name = self.name()
            if self.pos < len(self.text) and self.text[self.pos] == "(":
                self.pos += 1
                args = [self.term()]
                while self.peek() == ",":
                    self.pos += 1
                    args.append(self.term())
                self.expect(")")
                return Struct(name, tuple(args))
            return Atom(name)
        self.fail(f"unexpected character {ch!r}")

    def list_tail(self) -> Term:
        self.expect("[")
        if self.peek() == "]":
            self.pos += 1
            return NIL
        items = [self.term()]
        while self.peek() == ",":
            self.pos += 1
            items.append(self.term())
        tail: Term = NIL
        if self.peek() == "|":
            self.pos += 1
            tail = self.term()
        self.expect("]")
        return make_list(items, tail)


def parse_term(text: str) -> Term:
    """Parse Prolog-like term syntax.

    Variables get ids ``0, 1, ...`` in order of first textual occurrence;
    each ``_`` is a distinct anonymous variable.
    """
    parser = _Parser(text)
    term = parser.term()
    if parser.peek():
        parser.fail("trailing input")
    return term


def _var_name(k: int) -> str:
    letter = string.ascii_uppercase[k % 26]
    return letter if k < 26 else f"{letter}{k // 26}"


def format_term(term: Term) -> str:
    """Render ``term``; variables are named A, B, ... by first occurrence."""
    names: dict[int, str] = {}

    def fmt(t: Term) -> str:
        if isinstance(t, Var):
            if t.id not in names:
                names[t.id] = _var_name(len(names))
            return names[t.id]
        if isinstance(t, Atom):
            return t.name
        if isinstance(t, Int):
            return str(t.value)
        if isinstance(t, EmptyList):
            return "[]"
        if isinstance(t, Struct):
            return f"{t.functor}({','.join(fmt(a) for a in t.args)})"
        items = []
        while isinstance(t, List):
            items.append(fmt(t.head))
            t = t.tail
        if isinstance(t, EmptyList):
            return f"[{','.join(items)}]"
        return f"[{','.join(items)}|{fmt(t)}]"

    return fmt(term)


# ---------------------------------------------------------------------------
# oracle


def subsumes(general: Term, specific: Term) -> bool:
    """True iff some substitution over ``general``'s variables yields ``specific``.

    Variables of ``specific`` are treated as constants, so the two terms'
    variable ids never interact.
    """
    bindings: dict[int, Term] = {}
    stack = [(general, specific)]
    while stack:
        g, s = stack.pop()
        if isinstance(g, Var):
            bound = bindings.get(g.id)
            if bound is None:
                bindings[g.id] = s
            elif bound != s:
                return False
        elif isinstance(g, Struct):
            if not (isinstance(s, Struct) and s.functor == g.functor
                    and len(s.args) == len(g.args)):
                return False
            stack.extend(zip(g.args, s.args))
        elif isinstance(g, List):
            if not isinstance(s, List):
                return False
            stack.append((g.head, s.head))
            stack.append((g.tail, s.tail))
        elif g != s:
            return False
    return True
