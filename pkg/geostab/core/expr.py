"""
Expression DSL for geostab.

Flows, metrics, Lagrangians and potentials are written as infix text, parsed
against a SymbolTable and compiled once into closures. Evaluation is generic
over number-likes, so the same expression runs on floats and on dual numbers.
"""
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from . import dual
from ..errors import DomainError, ExpressionSyntaxError, UnknownSymbol, ConfigurationError

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs", "step")

_FUNCTION_IMPL = {
    "sin": dual.sin,
    "cos": dual.cos,
    "exp": dual.exp,
    "log": dual.log,
    "sqrt": dual.sqrt,
    "abs": dual.fabs,
    "step": dual.step,
}


@dataclass(frozen=True)
class SymbolTable:
    """Ordered state symbols plus named parameters bound to constants."""

    names: Tuple[str, ...] = ()
    parameters: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ConfigurationError(f"Duplicate symbol names: {self.names}")
        for name, value in self.parameters:
            if name in self.names:
                raise ConfigurationError(f"Parameter {name!r} shadows a state symbol")
            if not math.isfinite(value):
                raise ConfigurationError(f"Parameter {name!r} must be finite, got {value}")

    @classmethod
    def state(cls, dimension: int, parameters: Optional[Mapping[str, float]] = None) -> "SymbolTable":
        """x1..xN."""
        names = tuple(f"x{i + 1}" for i in range(dimension))
        return cls(names, _param_tuple(parameters))

    @classmethod
    def phase(cls, n: int, parameters: Optional[Mapping[str, float]] = None) -> "SymbolTable":
        """x1..xn followed by u1..un."""
        names = tuple(f"x{i + 1}" for i in range(n)) + tuple(f"u{i + 1}" for i in range(n))
        return cls(names, _param_tuple(parameters))

    @classmethod
    def of(cls, names: Sequence[str], parameters: Optional[Mapping[str, float]] = None) -> "SymbolTable":
        return cls(tuple(names), _param_tuple(parameters))

    @property
    def parameter_map(self) -> Dict[str, float]:
        return dict(self.parameters)

    def __contains__(self, name: str) -> bool:
        return name in self.names or name in self.parameter_map

    def index(self, name: str) -> int:
        return self.names.index(name)

    def merge(self, other: "SymbolTable") -> "SymbolTable":
        if self == other:
            return self
        names = list(self.names) + [n for n in other.names if n not in self.names]
        params = self.parameter_map
        for name, value in other.parameters:
            if name in params and params[name] != value:
                raise ConfigurationError(f"Conflicting values for parameter {name!r}")
            params[name] = value
        return SymbolTable(tuple(names), _param_tuple(params))


def _param_tuple(parameters: Optional[Mapping[str, float]]) -> Tuple[Tuple[str, float], ...]:
    if not parameters:
        return ()
    return tuple(sorted((str(k), float(v)) for k, v in parameters.items()))


# expression tree

@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Symbol:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    operand: Any


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    left: Any
    right: Any


Node = Union[Constant, Symbol, Unary, Binary]


def serialize_node(node: Node) -> str:
    if isinstance(node, Constant):
        text = repr(float(node.value))
        return f"({text})" if node.value < 0 else text
    if isinstance(node, Symbol):
        return node.name
    if isinstance(node, Unary):
        inner = serialize_node(node.operand)
        if node.op == "neg":
            return f"(-{inner})"
        return f"{node.op}({inner})"
    return f"({serialize_node(node.left)} {node.op} {serialize_node(node.right)})"


def negate(node: Node) -> Node:
    if isinstance(node, Constant):
        return Constant(-node.value)
    return Unary("neg", node)


def free_symbols(node: Node) -> frozenset:
    if isinstance(node, Symbol):
        return frozenset((node.name,))
    if isinstance(node, Unary):
        return free_symbols(node.operand)
    if isinstance(node, Binary):
        return free_symbols(node.left) | free_symbols(node.right)
    return frozenset()


class Expression:
    """
    An immutable parsed expression bound to its SymbolTable.

    Calling an Expression with positional values (symbol-table order) evaluates it.
    """

    __slots__ = ("root", "symbols", "_compiled", "_free")

    def __init__(self, root: Node, symbols: SymbolTable):
        missing = [s for s in free_symbols(root) if s not in symbols]
        if missing:
            raise UnknownSymbol(sorted(missing)[0])
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_free", free_symbols(root) - set(symbols.parameter_map))
        object.__setattr__(self, "_compiled", _compile(root, symbols))

    def __setattr__(self, key, value):
        raise AttributeError("Expression is immutable")

    def __call__(self, values: Sequence[Any]):
        return self._compiled(values)

    def __repr__(self) -> str:
        return f"Expression({serialize_node(self.root)!r})"

    def __str__(self) -> str:
        return serialize_node(self.root)

    def __eq__(self, other) -> bool:
        return isinstance(other, Expression) and self.root == other.root

    def __hash__(self) -> int:
        return hash(self.root)

    @property
    def free_symbols(self) -> frozenset:
        return self._free

    def depends_on(self, name: str) -> bool:
        return name in self._free

    @property
    def is_constant(self) -> bool:
        return not self._free

    # composition

    @classmethod
    def constant(cls, value: float, symbols: SymbolTable) -> "Expression":
        return cls(Constant(float(value)), symbols)

    def _lift(self, other) -> Tuple[Node, SymbolTable]:
        if isinstance(other, Expression):
            return other.root, self.symbols.merge(other.symbols)
        return Constant(float(other)), self.symbols

    def _binary(self, op: str, other, reflected: bool = False) -> "Expression":
        node, table = self._lift(other)
        left, right = (node, self.root) if reflected else (self.root, node)
        return Expression(Binary(op, left, right), table)

    def __add__(self, other):
        return self._binary("+", other)

    def __radd__(self, other):
        return self._binary("+", other, reflected=True)

    def __sub__(self, other):
        return self._binary("-", other)

    def __rsub__(self, other):
        return self._binary("-", other, reflected=True)

    def __mul__(self, other):
        return self._binary("*", other)

    def __rmul__(self, other):
        return self._binary("*", other, reflected=True)

    def __truediv__(self, other):
        return self._binary("/", other)

    def __rtruediv__(self, other):
        return self._binary("/", other, reflected=True)

    def __pow__(self, other):
        return self._binary("^", other)

    def __neg__(self):
        return Expression(negate(self.root), self.symbols)

    def apply(self, function: str) -> "Expression":
        if function not in FUNCTIONS:
            raise ConfigurationError(f"Unknown function: {function}")
        return Expression(Unary(function, self.root), self.symbols)

    def rebind(self, symbols: SymbolTable) -> "Expression":
        """Same tree evaluated against another table (e.g. x-only potential over phase symbols)."""
        return Expression(self.root, symbols)


# compilation

def _compile(node: Node, symbols: SymbolTable) -> Callable:
    params = symbols.parameter_map
    if isinstance(node, Constant):
        value = node.value
        return lambda v: value
    if isinstance(node, Symbol):
        if node.name in params:
            value = params[node.name]
            return lambda v: value
        idx = symbols.index(node.name)
        return lambda v: v[idx]
    if isinstance(node, Unary):
        inner = _compile(node.operand, symbols)
        if node.op == "neg":
            return lambda v: -inner(v)
        impl = _FUNCTION_IMPL[node.op]

        def call(v, impl=impl, inner=inner, node=node):
            try:
                return impl(inner(v))
            except (ValueError, ZeroDivisionError, OverflowError) as e:
                raise DomainError(f"{e} in {serialize_node(node)}", node=serialize_node(node)) from None

        return call
    left = _compile(node.left, symbols)
    right = _compile(node.right, symbols)
    if node.op == "+":
        return lambda v: left(v) + right(v)
    if node.op == "-":
        return lambda v: left(v) - right(v)
    if node.op == "*":
        return lambda v: left(v) * right(v)
    if node.op == "/":
        def div(v, node=node):
            den = right(v)
            if dual.primal(den) == 0.0:
                raise DomainError(f"division by zero in {serialize_node(node)}", node=serialize_node(node))
            return left(v) / den

        return div
    if node.op == "^":
        def pw(v, node=node):
            try:
                return dual.power(left(v), right(v))
            except (ValueError, ZeroDivisionError, OverflowError) as e:
                raise DomainError(f"{e} in {serialize_node(node)}", node=serialize_node(node)) from None

        return pw
    raise ConfigurationError(f"Unknown operator {node.op!r}")


# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)


@dataclass
class _Token:
    kind: str
    text: str
    offset: int  # character offset


class _Parser:
    """Recursive descent over: additive > multiplicative > unary > power > primary."""

    def __init__(self, text: str, symbols: SymbolTable):
        self.text = text
        self.symbols = symbols
        self.tokens = self._tokenize(text)
        self.pos = 0

    def _byte_offset(self, char_offset: int) -> int:
        return len(self.text[:char_offset].encode("utf-8"))

    def _error(self, message: str, char_offset: int):
        return ExpressionSyntaxError(message, self._byte_offset(char_offset), self.text)

    def _tokenize(self, text: str) -> List[_Token]:
        tokens = []
        i = 0
        while i < len(text):
            if text[i:].strip() == "":
                break
            m = _TOKEN.match(text, i)
            if not m or m.end() == i:
                j = i
                while j < len(text) and text[j].isspace():
                    j += 1
                raise self._error(f"Unexpected character {text[j]!r}", j)
            kind = m.lastgroup
            tokens.append(_Token(kind, m.group(kind), m.start(kind)))
            i = m.end()
        tokens.append(_Token("end", "", len(text)))
        return tokens

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text:
            found = repr(tok.text) if tok.kind != "end" else "end of input"
            raise self._error(f"Expected {text!r}, found {found}", tok.offset)
        return self.advance()

    def parse(self) -> Node:
        if self.peek().kind == "end":
            raise self._error("Empty expression", 0)
        node = self.additive()
        tok = self.peek()
        if tok.kind != "end":
            raise self._error(f"Unexpected token {tok.text!r}", tok.offset)
        return node

    def additive(self) -> Node:
        node = self.multiplicative()
        while self.peek().text in ("+", "-"):
            op = self.advance().text
            node = Binary(op, node, self.multiplicative())
        return node

    def multiplicative(self) -> Node:
        node = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return negate(self.unary())
        if tok.kind == "op" and tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.peek().text in ("^", "**"):
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def primary(self) -> Node:
        tok = self.advance()
        if tok.kind == "number":
            return Constant(float(tok.text))
        if tok.kind == "name":
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.additive()
                self.expect(")")
                return Unary(tok.text, arg)
            if self.peek().text == "(":
                raise self._error(f"Unknown function {tok.text!r}", tok.offset)
            if tok.text not in self.symbols:
                raise UnknownSymbol(tok.text, self._byte_offset(tok.offset))
            return Symbol(tok.text)
        if tok.text == "(":
            node = self.additive()
            self.expect(")")
            return node
        found = repr(tok.text) if tok.kind != "end" else "end of input"
        raise self._error(f"Unexpected {found}", tok.offset)


def parse(text: str, symbols: SymbolTable) -> Expression:
    """
    Parse infix text against a symbol table.

    Args:
        text: Expression source, e.g. "2*x1^2 - x1^4"
        symbols: Declared state symbols and parameters

    Returns:
        Compiled Expression

    Raises:
        ExpressionSyntaxError: malformed text (carries a byte offset)
        UnknownSymbol: undeclared name
    """
    if not isinstance(text, str) or not text.strip():
        raise ExpressionSyntaxError("Empty expression", 0, text if isinstance(text, str) else "")
    return Expression(_Parser(text, symbols).parse(), symbols)


def evaluate(expr: Expression, bindings: Mapping[str, Any]):
    """
    Evaluate with named bindings; every free state symbol must be bound.

    Raises:
        UnknownSymbol: a free symbol has no binding
        DomainError: log/sqrt of a negative, division by zero
    """
    values = []
    for name in expr.symbols.names:
        if name in bindings:
            values.append(bindings[name])
        elif expr.depends_on(name):
            raise UnknownSymbol(name)
        else:
            values.append(0.0)
    return expr(values)


def serialize(expr: Expression) -> str:
    return serialize_node(expr.root)


def as_expression(value: Union[str, float, int, Expression], symbols: SymbolTable) -> Expression:
    """Accept text, a number or an existing Expression; rebinding to `symbols` if needed."""
    if isinstance(value, Expression):
        return value if value.symbols == symbols else value.rebind(symbols)
    if isinstance(value, (int, float)):
        return Expression.constant(value, symbols)
    return parse(value, symbols)
