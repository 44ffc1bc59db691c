"""Instance retrieval of evaluating subgoals from subgoal tries."""

from .baselines import LeafRegistry, collect_nirs, collect_sirs
from .matcher import MatcherState, TrieModifiedError, collect_subsumed_subgoals
from .terms import (
    Atom,
    EmptyList,
    Int,
    List,
    NIL,
    Struct,
    Var,
    flatten,
    format_term,
    parse_term,
    subsumes,
)
from .trie import (
    ArityError,
    FrameState,
    LifecycleError,
    SubgoalFrame,
    SubgoalTrie,
    effective_in_eval,
)

__all__ = [
    "Atom", "EmptyList", "Int", "List", "NIL", "Struct", "Var",
    "flatten", "format_term", "parse_term", "subsumes",
    "ArityError", "FrameState", "LifecycleError", "SubgoalFrame", "SubgoalTrie",
    "effective_in_eval",
    "MatcherState", "TrieModifiedError", "collect_subsumed_subgoals",
    "LeafRegistry", "collect_nirs", "collect_sirs",
]
