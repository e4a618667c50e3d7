import math

import numpy as np
import pytest

from hilfer_impulse.exceptions import DomainError, MissingBinding, ParseError, UnknownIdentifier
from hilfer_impulse.expr import evaluate, parse, pretty


@pytest.mark.parametrize(
    "source,bindings,expected",
    [
        ("2^3^2", {}, 512),
        ("-2^2", {}, -4),
        ("(-2)^2", {}, 4),
        ("1 - 2 - 3", {}, -4),
        ("8 / 4 / 2", {}, 1),
        ("t - 1*x + y", {"t": 0.5, "x": 1.0, "y": 0.3}, -0.2),
        ("max(x, 2, t)", {"x": 1, "t": 3}, 3),
        ("pow(2, 10)", {}, 1024),
        ("1.5e2 + .5", {}, 150.5),
    ],
)
def test_evaluate(source, bindings, expected):
    assert evaluate(parse(source), bindings) == pytest.approx(expected, abs=1e-12)


def test_call_syntax():
    expression = parse("sin(t) * x")
    assert expression(t=math.pi / 2, x=3) == pytest.approx(3)
    assert expression.variables == {"t", "x"}
    assert str(expression) == "sin(t) * x"


@pytest.mark.parametrize(
    "source",
    [
        "2^3^2",
        "(2^3)^2",
        "-x^2",
        "(-x)^2",
        "t - (x - y)",
        "(t - x) - y",
        "t / (x * y)",
        "-(t + x)",
        "max(t, -x, y^2) * exp(-t)",
    ],
)
def test_pretty_round_trip(source):
    """
    Printing then parsing gives back the same tree, and printing is stable
    """
    expression = parse(source)
    again = parse(pretty(expression))
    assert again == expression
    assert pretty(again) == pretty(expression)


BINDINGS = {"t": 0.5, "x": 1.5, "y": 2.0}


def random_source(rng, depth: int) -> tuple[str, float]:
    """
    Returns a fully parenthesized random expression and its value under
    BINDINGS. Powers and divisors only take positive operands.
    """

    def positive() -> tuple[str, float]:
        if rng.random() < 0.5:
            name = str(rng.choice(list(BINDINGS)))
            return name, BINDINGS[name]
        value = int(rng.integers(1, 4))
        return str(value), float(value)

    def power() -> tuple[str, float]:
        (base, base_value), (exponent, exponent_value) = positive(), positive()
        if rng.random() < 0.4:
            # A chain, to exercise right associativity
            inner, inner_value = positive()
            exponent, exponent_value = f"({exponent} ^ {inner})", exponent_value**inner_value
        return f"({base} ^ {exponent})", base_value**exponent_value

    if depth == 0:
        return positive()
    kind = int(rng.integers(0, 6))
    if kind == 0:
        operand, value = random_source(rng, depth - 1)
        return f"(-{operand})", -value
    if kind == 1:
        return power()
    left, left_value = random_source(rng, depth - 1)
    if kind == 2:
        right, right_value = positive() if rng.random() < 0.5 else power()
        return f"({left} / {right})", left_value / right_value
    right, right_value = random_source(rng, depth - 1)
    operator = "+-*"[kind - 3]
    value = {
        "+": left_value + right_value,
        "-": left_value - right_value,
        "*": left_value * right_value,
    }[operator]
    return f"({left} {operator} {right})", value


def test_precedence_against_full_parentheses():
    """
    Sources printed with minimal parentheses mean the same as their fully
    parenthesized originals
    """
    rng = np.random.default_rng(17)
    for _ in range(300):
        source, expected = random_source(rng, int(rng.integers(1, 5)))
        expression = parse(source)
        assert evaluate(expression, BINDINGS) == pytest.approx(expected, rel=1e-12, abs=1e-12)
        minimal = pretty(expression)
        assert parse(minimal) == expression, (source, minimal)
        assert evaluate(parse(minimal), BINDINGS) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_pretty_minimal_parentheses():
    assert pretty(parse("((t)) + ((x * y))")) == "t + x * y"
    assert pretty(parse("t - (x - y)")) == "t - (x - y)"
    assert pretty(parse("(2^3)^2")) == "(2.0 ^ 3.0) ^ 2.0"


def test_parse_errors():
    with pytest.raises(ParseError) as error:
        parse("t +")
    assert error.value.offset == 3
    assert "number" in error.value.expected
    with pytest.raises(ParseError) as error:
        parse("(t + x")
    assert error.value.expected == {")"}
    with pytest.raises(ParseError):
        parse("t $ x")
    with pytest.raises(ParseError):
        parse("pow(t)")


def test_unknown_identifier_offset():
    with pytest.raises(UnknownIdentifier) as error:
        parse("t + zeta")
    assert error.value.name == "zeta"
    assert error.value.offset == 4
    # Offsets count UTF-8 bytes
    with pytest.raises(ParseError) as error:
        parse("é")
    assert error.value.offset == 0


def test_require():
    parse("t * x").require({"t", "x"}, "g")
    with pytest.raises(UnknownIdentifier):
        parse("t * y").require({"t", "x"}, "g")


def test_evaluation_errors():
    with pytest.raises(MissingBinding) as error:
        evaluate(parse("t + x"), {"t": 1})
    assert error.value.name == "x"
    for source in ("1 / (x - x)", "ln(0)", "sqrt(-1)", "(-8)^(1/3)", "exp(1000)", "0^(-1)"):
        with pytest.raises(DomainError):
            evaluate(parse(source), {"x": 2})
