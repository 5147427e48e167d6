# backend/satlab/core/formula.py

"""
Boolean formulas over n variables and their truth-table output strings.

Bit convention: variable x_j reads bit j of the assignment integer. Written as
an n-character string, the leftmost character is x_{n-1}.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Callable, Iterable, Iterator, TypeVar, Union

import numpy as np
import pyparsing as pp

from satlab.config import MAX_TRUTH_TABLE_VARS
from satlab.errors import FormulaSyntaxError, PreconditionError

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Not:
    child: "Node"


@dataclass(frozen=True)
class And:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Or:
    left: "Node"
    right: "Node"


Node = Union[Var, Not, And, Or]


def _walk(node: Node) -> Iterator[Node]:
    # Iterative so that long chains never hit the recursion limit.
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        if isinstance(current, Not):
            stack.append(current.child)
        elif isinstance(current, (And, Or)):
            stack.append(current.right)
            stack.append(current.left)


def _fold(
    node: Node,
    on_var: Callable[[Var], T],
    on_not: Callable[[Not, T], T],
    on_binary: Callable[[And | Or, T, T], T],
) -> T:
    # Post-order with an explicit stack: left-associated chains from the
    # parser are as deep as they are long.
    stack: list[tuple[Node, bool]] = [(node, False)]
    values: list[T] = []
    while stack:
        current, expanded = stack.pop()
        if isinstance(current, Var):
            values.append(on_var(current))
        elif not expanded:
            stack.append((current, True))
            if isinstance(current, Not):
                stack.append((current.child, False))
            else:
                stack.append((current.right, False))
                stack.append((current.left, False))
        elif isinstance(current, Not):
            values.append(on_not(current, values.pop()))
        else:
            right = values.pop()
            values.append(on_binary(current, values.pop(), right))
    return values[0]


@dataclass(frozen=True)
class Formula:
    root: Node
    num_vars: int

    def __post_init__(self) -> None:
        if self.num_vars < 1:
            raise PreconditionError(f"num_vars must be positive, got {self.num_vars}")
        top = self.max_var_index
        if top >= self.num_vars:
            raise PreconditionError(
                f"variable x{top} out of range for n={self.num_vars}"
            )

    @cached_property
    def size(self) -> int:
        return sum(1 for _ in _walk(self.root))

    @cached_property
    def max_var_index(self) -> int:
        return max(n.index for n in _walk(self.root) if isinstance(n, Var))

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Assignment:
    value: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise PreconditionError(f"n must be positive, got {self.n}")
        if not 0 <= self.value < (1 << self.n):
            raise PreconditionError(
                f"assignment {self.value} out of range for n={self.n}"
            )

    @classmethod
    def from_string(cls, text: str) -> "Assignment":
        """'110' -> value 6: the leftmost character is x_{n-1}."""
        if not text or set(text) - {"0", "1"}:
            raise PreconditionError(f"not a bitstring: {text!r}")
        return cls(int(text, 2), len(text))

    def bit(self, j: int) -> int:
        return (self.value >> j) & 1

    def to_string(self) -> str:
        return format(self.value, f"0{self.n}b")


@dataclass(frozen=True)
class TruthTable:
    bits: str
    n: int
    ones_count: int = field(init=False)

    def __post_init__(self) -> None:
        if len(self.bits) != 1 << self.n:
            raise PreconditionError(
                f"truth table length {len(self.bits)} != 2**{self.n}"
            )
        ones = self.bits.count("1")
        if ones + self.bits.count("0") != len(self.bits):
            raise PreconditionError("truth table must contain only '0' and '1'")
        object.__setattr__(self, "ones_count", ones)

    @property
    def gamma(self) -> float:
        return self.ones_count / len(self.bits)

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.bits.encode("ascii"), dtype=np.uint8) == ord("1")

    def ones_positions(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.as_array())]

    def __str__(self) -> str:
        return self.bits


# --------------------------------------------------------------------------- #
# Concrete syntax
# --------------------------------------------------------------------------- #


def _build_grammar() -> pp.ParserElement:
    expr = pp.Forward()
    factor = pp.Forward()

    var = pp.Regex(r"x\d+").set_name("variable")
    var.set_parse_action(lambda t: Var(int(t[0][1:])))

    negation = pp.Suppress("!") - factor
    negation.set_parse_action(lambda t: Not(t[0]))

    group = pp.Suppress("(") - expr - pp.Suppress(")")

    factor <<= negation | group | var

    # '-' stops backtracking: "x0 &" reports the missing operand, not the '&'.
    term = factor + pp.ZeroOrMore(pp.Suppress("&") - factor)
    term.set_parse_action(lambda t: reduce(And, list(t)))

    expr <<= term + pp.ZeroOrMore(pp.Suppress("|") - term)
    expr.set_parse_action(lambda t: reduce(Or, list(t)))
    return expr


_GRAMMAR = _build_grammar()


def parse_formula(text: str, num_vars: int | None = None) -> Formula:
    """
    Parse infix text: `!` binds tighter than `&`, which binds tighter than `|`.
    Both binary operators are left-associative.

    When `num_vars` is omitted it is one more than the largest variable index.
    """
    try:
        parsed = _GRAMMAR.parse_string(text, parse_all=True)
    except pp.ParseBaseException as exc:
        raise FormulaSyntaxError("syntax error", text, exc.loc) from exc

    root = parsed[0]
    top = max(n.index for n in _walk(root) if isinstance(n, Var))
    if num_vars is None:
        num_vars = top + 1
    if top >= num_vars:
        raise PreconditionError(f"variable x{top} out of range for n={num_vars}")
    return Formula(root, num_vars)


_PRECEDENCE = {Or: 1, And: 2, Not: 3, Var: 4}


def _wrap(part: tuple[str, int], limit: int) -> str:
    text, level = part
    return f"({text})" if level < limit else text


def _render_binary(node: And | Or, left: tuple[str, int], right: tuple[str, int]) -> tuple[str, int]:
    symbol = " & " if isinstance(node, And) else " | "
    level = _PRECEDENCE[type(node)]
    # Left-associative: a right operand of the same level needs parentheses.
    return _wrap(left, level) + symbol + _wrap(right, level + 1), level


def _render(node: Node) -> str:
    text, _ = _fold(
        node,
        lambda v: (f"x{v.index}", _PRECEDENCE[Var]),
        lambda _, child: ("!" + _wrap(child, 3), _PRECEDENCE[Not]),
        _render_binary,
    )
    return text


def render(f: Formula | Node) -> str:
    return _render(f.root if isinstance(f, Formula) else f)


def formula_description_bits(f: Formula) -> int:
    """Direct length of the rendered text, 8 bits per character."""
    return 8 * len(render(f))


# --------------------------------------------------------------------------- #
# Evaluation
# --------------------------------------------------------------------------- #


def _eval_node(node: Node, value: int) -> bool:
    return _fold(
        node,
        lambda v: bool((value >> v.index) & 1),
        lambda _, child: not child,
        lambda op, left, right: (left and right) if isinstance(op, And) else (left or right),
    )


def evaluate(f: Formula, a: Assignment | int) -> int:
    if isinstance(a, int):
        a = Assignment(a, f.num_vars)
    if a.n != f.num_vars:
        raise PreconditionError(
            f"assignment has n={a.n}, formula has n={f.num_vars}"
        )
    return int(_eval_node(f.root, a.value))


def _eval_columns(node: Node, columns: dict[int, np.ndarray], index: np.ndarray) -> np.ndarray:
    def column(v: Var) -> np.ndarray:
        col = columns.get(v.index)
        if col is None:
            col = ((index >> v.index) & 1).astype(bool)
            columns[v.index] = col
        return col

    return _fold(
        node,
        column,
        lambda _, child: ~child,
        lambda op, left, right: (left & right) if isinstance(op, And) else (left | right),
    )


def truth_table(f: Formula) -> TruthTable:
    """Program 1: evaluate f on every assignment 0 .. 2**n - 1, in order."""
    if f.num_vars > MAX_TRUTH_TABLE_VARS:
        raise PreconditionError(
            f"n={f.num_vars} exceeds exhaustive cap of {MAX_TRUTH_TABLE_VARS}"
        )
    index = np.arange(1 << f.num_vars, dtype=np.uint32)
    out = _eval_columns(f.root, {}, index)
    bits = (out.astype(np.uint8) + ord("0")).tobytes().decode("ascii")
    table = TruthTable(bits, f.num_vars)
    logger.debug("truth table n=%d size=%d k=%d", f.num_vars, f.size, table.ones_count)
    return table


def classify_table(t: TruthTable) -> str:
    """'type1' for few ones (k < 2**(n-1)), 'type2' otherwise."""
    return "type1" if t.ones_count < len(t.bits) // 2 else "type2"


# --------------------------------------------------------------------------- #
# Constructions
# --------------------------------------------------------------------------- #


def _balanced(nodes: list[Node], op: type) -> Node:
    # Pairwise folding keeps depth logarithmic for large k.
    while len(nodes) > 1:
        nodes = [
            op(nodes[i], nodes[i + 1]) if i + 1 < len(nodes) else nodes[i]
            for i in range(0, len(nodes), 2)
        ]
    return nodes[0]


def minterm(a: Assignment) -> Formula:
    """Conjunction x_{n-1} .. x_0, each literal negated where a has a 0 bit."""
    literals: list[Node] = []
    for j in range(a.n - 1, -1, -1):
        literals.append(Var(j) if a.bit(j) else Not(Var(j)))
    return Formula(reduce(And, literals), a.n)


def plant_dnf(targets: Iterable[Assignment | int], n: int) -> Formula:
    """OR of one minterm per target; true exactly on the targets."""
    values = sorted({t.value if isinstance(t, Assignment) else int(t) for t in targets})
    if not values:
        raise PreconditionError(
            "plant_dnf needs at least one target; use constant_false() for k=0"
        )
    terms = [minterm(Assignment(v, n)).root for v in values]
    return Formula(_balanced(terms, Or), n)


def constant_false(n: int) -> Formula:
    return Formula(And(Var(0), Not(Var(0))), n)


def tautology(n: int) -> Formula:
    clauses: list[Node] = [Or(Var(j), Not(Var(j))) for j in range(n)]
    return Formula(_balanced(clauses, And), n)


def obfuscate_and_true(f: Formula) -> Formula:
    """AND f with a tautology over the same variables: same table, larger formula."""
    return Formula(And(f.root, tautology(f.num_vars).root), f.num_vars)


_NOT_PROB = 0.2
_AND_PROB = 0.4


def random_formula(n: int, size_budget: int, seed: int | np.random.SeedSequence) -> Formula:
    """
    Grow a random tree of exactly `size_budget` nodes.

    At budget 1 the node is a variable; at budget 2 only a negation fits.
    Otherwise Not/And/Or are drawn with probabilities 0.2/0.4/0.4 and the
    remaining budget is split uniformly between the two children.
    """
    if size_budget < 1:
        raise PreconditionError(f"size_budget must be >= 1, got {size_budget}")
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)

    def grow(budget: int) -> Node:
        if budget == 1:
            return Var(int(rng.integers(n)))
        if budget == 2:
            return Not(grow(1))
        u = rng.random()
        if u < _NOT_PROB:
            return Not(grow(budget - 1))
        left_budget = int(rng.integers(1, budget - 1))
        left = grow(left_budget)
        right = grow(budget - 1 - left_budget)
        return And(left, right) if u < _NOT_PROB + _AND_PROB else Or(left, right)

    return Formula(grow(size_budget), n)
