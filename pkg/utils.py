import math
import time
from contextlib import contextmanager
from decimal import Decimal, localcontext
from fractions import Fraction

from errors import InputError


# Rational helpers
def parse_rational(text):
    """Parses 'p/q', a decimal literal or an integer into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(f"not a rational number: {text!r}") from e


def fmt_fraction(q):
    """Exact 'p/q' rendering used in every file format and report."""
    if q is None:
        return ""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def fmt_ratio(q, digits=4):
    if q is None:
        return "N/A"
    return f"{float(q):.{digits}f}"


def fmt_weight(q):
    """Short display form: integers stay integers, other rationals get 'p/q (≈x)'."""
    if q is None:
        return "-"
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator} (≈{float(q):.4g})"


# Logarithmic caps
def log_value(n, base=2):
    if n <= 0:
        raise InputError(f"log of non-positive value {n}")
    if base == 2:
        return math.log2(n)
    value = math.log(n, base)
    nearest = round(value)
    if abs(value - nearest) < 1e-9:
        return float(nearest)
    return value


def log_cap(factor, n, base=2):
    """floor(factor * log_base(n)), computed so exact powers land on integers."""
    if n <= 1:
        return 0
    value = float(factor) * log_value(n, base)
    nearest = round(value)
    if abs(value - nearest) < 1e-9:
        return int(nearest)
    return math.floor(value)


# Powers
DECIMAL_DIGITS = 60
RELATIVE_TOLERANCE = Decimal(2) ** -40


def is_integral(q):
    return Fraction(q).denominator == 1


def power(w, alpha):
    """w**alpha: an exact Fraction for integer alpha, a high-precision Decimal otherwise."""
    alpha = Fraction(alpha)
    if alpha == 0:
        raise InputError("alpha = 0 is not supported")
    w = Fraction(w)
    if alpha.denominator == 1:
        return w ** alpha.numerator
    with localcontext() as ctx:
        ctx.prec = DECIMAL_DIGITS
        base = Decimal(w.numerator) / Decimal(w.denominator)
        exponent = Decimal(alpha.numerator) / Decimal(alpha.denominator)
        return base ** exponent


def power_sum(weights, alpha):
    total = Fraction(0) if is_integral(alpha) else Decimal(0)
    if isinstance(total, Decimal):
        with localcontext() as ctx:
            ctx.prec = DECIMAL_DIGITS
            for w in weights:
                total += power(w, alpha)
        return total
    for w in weights:
        total += power(w, alpha)
    return total


def strictly_greater(lhs, rhs):
    """lhs > rhs; Decimal sides must win by the relative tolerance, ties are not improvements."""
    if isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
        return lhs > rhs
    with localcontext() as ctx:
        ctx.prec = DECIMAL_DIGITS
        lhs = _as_decimal(lhs)
        rhs = _as_decimal(rhs)
        return lhs - rhs > RELATIVE_TOLERANCE * max(abs(lhs), abs(rhs))


def _as_decimal(x):
    if isinstance(x, Fraction):
        return Decimal(x.numerator) / Decimal(x.denominator)
    return Decimal(x)


@contextmanager
def stopwatch():
    """Yields a dict whose 'ms' entry is filled in when the block exits."""
    box = {"ms": 0.0}
    start = time.perf_counter()
    try:
        yield box
    finally:
        box["ms"] = (time.perf_counter() - start) * 1000.0
