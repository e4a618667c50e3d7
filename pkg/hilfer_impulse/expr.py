"""
The small scalar expression language used to write g(t, x), the impulse
maps, Lyapunov candidates and comparison functions inside configs.

Grammar: decimal/scientific literals, the variables t, x and y, the
operators + - * / ^ (^ is right-associative, unary minus binds looser
than ^), parentheses, and the functions pow, abs, exp, ln, sin, cos, sqrt,
min and max. Parsing is a Pratt parser over a regex tokenizer.
"""

import math
import re
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import ClassVar

from hilfer_impulse.exceptions import (
    DomainError,
    MissingBinding,
    ParseError,
    UnknownIdentifier,
)

VARIABLES = frozenset({"t", "x", "y"})

# Binding powers
ADDITIVE = 10
MULTIPLICATIVE = 20
UNARY = 25
POWER = 30
ATOM = 100


def _div(left: float, right: float) -> float:
    if right == 0:
        raise DomainError("Division by zero")
    return left / right


def _pow(base: float, exponent: float) -> float:
    if base == 0 and exponent < 0:
        raise DomainError("0 raised to a negative power")
    if base < 0 and not float(exponent).is_integer():
        raise DomainError(f"Negative base {base:g} raised to non-integer power {exponent:g}")
    try:
        return math.pow(base, exponent)
    except OverflowError:
        raise DomainError(f"Overflow computing {base:g}^{exponent:g}")


def _ln(value: float) -> float:
    if value <= 0:
        raise DomainError(f"ln of non-positive value {value:g}")
    return math.log(value)


def _sqrt(value: float) -> float:
    if value < 0:
        raise DomainError(f"sqrt of negative value {value:g}")
    return math.sqrt(value)


def _exp(value: float) -> float:
    try:
        return math.exp(value)
    except OverflowError:
        raise DomainError(f"Overflow computing exp({value:g})")


BINARY_OPERATORS: dict[str, Callable[[float, float], float]] = {
    "+": lambda left, right: left + right,
    "-": lambda left, right: left - right,
    "*": lambda left, right: left * right,
    "/": _div,
    "^": _pow,
}

# name -> (minimum arity, maximum arity or None for variadic, implementation)
FUNCTIONS: dict[str, tuple[int, int | None, Callable[..., float]]] = {
    "pow": (2, 2, _pow),
    "abs": (1, 1, abs),
    "exp": (1, 1, _exp),
    "ln": (1, 1, _ln),
    "sin": (1, 1, math.sin),
    "cos": (1, 1, math.cos),
    "sqrt": (1, 1, _sqrt),
    "min": (2, None, min),
    "max": (2, None, max),
}


class Node:
    """
    Base class for expression tree nodes. Nodes are immutable.
    """

    precedence: ClassVar[int] = ATOM

    def evaluate(self, bindings: Mapping[str, float]) -> float:
        raise NotImplementedError()

    def variables(self) -> frozenset[str]:
        raise NotImplementedError()

    def pretty(self) -> str:
        raise NotImplementedError()


@dataclass(frozen=True)
class Number(Node):
    value: float

    def evaluate(self, bindings):
        return self.value

    def variables(self):
        return frozenset()

    def pretty(self):
        return repr(self.value)


@dataclass(frozen=True)
class Variable(Node):
    name: str

    def evaluate(self, bindings):
        try:
            return float(bindings[self.name])
        except KeyError:
            raise MissingBinding(self.name)

    def variables(self):
        return frozenset({self.name})

    def pretty(self):
        return self.name


@dataclass(frozen=True)
class Negate(Node):
    operand: Node
    precedence: ClassVar[int] = UNARY

    def evaluate(self, bindings):
        return -self.operand.evaluate(bindings)

    def variables(self):
        return self.operand.variables()

    def pretty(self):
        return "-" + _wrap(self.operand, UNARY)


@dataclass(frozen=True)
class BinaryOp(Node):
    operator: str
    left: Node
    right: Node

    @property
    def precedence(self) -> int:  # type: ignore[override]
        return {"+": ADDITIVE, "-": ADDITIVE, "*": MULTIPLICATIVE, "/": MULTIPLICATIVE}.get(
            self.operator, POWER
        )

    def evaluate(self, bindings):
        return BINARY_OPERATORS[self.operator](
            self.left.evaluate(bindings), self.right.evaluate(bindings)
        )

    def variables(self):
        return self.left.variables() | self.right.variables()

    def pretty(self):
        if self.operator == "^":
            # Right-associative: only the left side needs the tighter bound
            left = _wrap(self.left, POWER + 1)
            right = _wrap(self.right, POWER)
        else:
            left = _wrap(self.left, self.precedence)
            right = _wrap(self.right, self.precedence + 1)
        return f"{left} {self.operator} {right}"


@dataclass(frozen=True)
class Call(Node):
    name: str
    arguments: tuple[Node, ...]

    def evaluate(self, bindings):
        implementation = FUNCTIONS[self.name][2]
        return implementation(*(argument.evaluate(bindings) for argument in self.arguments))

    def variables(self):
        result: frozenset[str] = frozenset()
        for argument in self.arguments:
            result |= argument.variables()
        return result

    def pretty(self):
        return f"{self.name}({', '.join(argument.pretty() for argument in self.arguments)})"


def _wrap(node: Node, minimum: int) -> str:
    text = node.pretty()
    if node.precedence < minimum:
        return f"({text})"
    return text


@dataclass(frozen=True)
class Expr:
    """
    A parsed expression plus the text it came from.
    """

    root: Node
    source: str = field(compare=False)

    @property
    def variables(self) -> frozenset[str]:
        return self.root.variables()

    def require(self, allowed: set[str] | frozenset[str], role: str) -> "Expr":
        """
        Raises UnknownIdentifier if the expression uses a variable that the
        given role does not provide.
        """
        extra = sorted(self.variables - set(allowed))
        if extra:
            raise UnknownIdentifier(
                f"{extra[0]} (not available in {role})",
                _byte_offset(self.source, self.source.find(extra[0])),
                frozenset(allowed),
            )
        return self

    def __call__(self, **bindings: float) -> float:
        return evaluate(self, bindings)

    def __str__(self) -> str:
        return self.source


@dataclass(frozen=True)
class Token:
    kind: str  # "number", "name", "op", "end"
    text: str
    position: int


TOKEN_PATTERN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _byte_offset(source: str, position: int) -> int:
    return len(source[: max(position, 0)].encode("utf-8"))


def tokenize(source: str) -> list[Token]:
    tokens = []
    position = 0
    while True:
        # Skip trailing whitespace before checking for the end
        while position < len(source) and source[position].isspace():
            position += 1
        if position >= len(source):
            break
        match = TOKEN_PATTERN.match(source, position)
        if match is None or match.lastgroup is None:
            raise ParseError(
                f"Unexpected character {source[position]!r}",
                _byte_offset(source, position),
                frozenset({"number", "variable", "function", "operator", "("}),
            )
        tokens.append(Token(match.lastgroup, match.group(match.lastgroup), match.start(match.lastgroup)))
        position = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


LEFT_BINDING = {"+": ADDITIVE, "-": ADDITIVE, "*": MULTIPLICATIVE, "/": MULTIPLICATIVE, "^": POWER}
PREFIX_EXPECTED = frozenset({"number", "variable", "function", "(", "-", "+"})


class Parser:
    """
    Pratt parser: each token has a left binding power, and the loop in
    expression() keeps folding infix operators while they bind tighter than
    the caller asked for.
    """

    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.index = 0

    @property
    def token(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def error(self, message: str, token: Token, expected: frozenset[str]) -> ParseError:
        return ParseError(message, _byte_offset(self.source, token.position), expected)

    def expect(self, text: str) -> Token:
        if self.token.text != text or self.token.kind == "end":
            raise self.error(
                f"Unexpected {self._describe(self.token)}", self.token, frozenset({text})
            )
        return self.advance()

    def _describe(self, token: Token) -> str:
        if token.kind == "end":
            return "end of input"
        return f"token {token.text!r}"

    def parse(self) -> Node:
        node = self.expression(0)
        if self.token.kind != "end":
            raise self.error(
                f"Unexpected {self._describe(self.token)}",
                self.token,
                frozenset(LEFT_BINDING) | {"end of input"},
            )
        return node

    def expression(self, right_binding: int) -> Node:
        left = self.prefix(self.advance())
        while self.token.kind == "op" and LEFT_BINDING.get(self.token.text, 0) > right_binding:
            operator = self.advance().text
            if operator == "^":
                # -1 so a following ^ binds first (right associativity)
                right = self.expression(POWER - 1)
            else:
                right = self.expression(LEFT_BINDING[operator])
            left = BinaryOp(operator, left, right)
        return left

    def prefix(self, token: Token) -> Node:
        if token.kind == "number":
            return Number(float(token.text))
        if token.kind == "name":
            if token.text in VARIABLES:
                return Variable(token.text)
            if token.text in FUNCTIONS:
                return self.call(token)
            raise UnknownIdentifier(
                token.text,
                _byte_offset(self.source, token.position),
                VARIABLES | frozenset(FUNCTIONS),
            )
        if token.text == "-":
            return Negate(self.expression(UNARY))
        if token.text == "+":
            return self.expression(UNARY)
        if token.text == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        raise self.error(f"Unexpected {self._describe(token)}", token, PREFIX_EXPECTED)

    def call(self, token: Token) -> Node:
        minimum, maximum, _ = FUNCTIONS[token.text]
        self.expect("(")
        arguments = [self.expression(0)]
        while self.token.text == ",":
            self.advance()
            arguments.append(self.expression(0))
        self.expect(")")
        if len(arguments) < minimum or (maximum is not None and len(arguments) > maximum):
            wanted = str(minimum) if maximum == minimum else f"at least {minimum}"
            raise ParseError(
                f"{token.text}() takes {wanted} arguments, got {len(arguments)}",
                _byte_offset(self.source, token.position),
            )
        return Call(token.text, tuple(arguments))


def parse(source: str) -> Expr:
    """
    Parses expression text into an Expr.
    """
    return Expr(Parser(source).parse(), source)


def evaluate(expression: Expr, bindings: Mapping[str, float]) -> float:
    """
    Evaluates in IEEE double precision. Raises MissingBinding when a free
    variable has no value and DomainError when a function leaves its domain
    or the result is not finite.
    """
    try:
        result = expression.root.evaluate(bindings)
    except ZeroDivisionError:
        raise DomainError(f"Division by zero in {expression.source!r}")
    except OverflowError:
        raise DomainError(f"Overflow in {expression.source!r}")
    if not math.isfinite(result):
        raise DomainError(f"Non-finite result {result} from {expression.source!r}")
    return result


def pretty(expression: Expr) -> str:
    """
    Prints the expression with the minimum parentheses needed to parse back
    to the same tree.
    """
    return expression.root.pretty()
