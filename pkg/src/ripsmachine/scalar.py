"""Exact arithmetic in Q or a real quadratic field Q(sqrt(d)).

Every length, offset and diameter in the engine is a :class:`Scalar`.  A
scalar is ``p + q*sqrt(d)`` with ``p, q`` arbitrary precision rationals
(``gmpy2.mpq``) and ``d`` a square-free non-negative integer shared by all
scalars of one computation.  No floating point is used in any predicate.
"""

from __future__ import annotations

import ast
import math
import re
from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

from .errors import FieldMismatchError, ScalarParseError

__all__ = ["Scalar", "Field", "parse_scalar", "render_rational", "squarefree_part"]

_NUMERIC = (int, Fraction, type(mpq(0)))
_new = object.__new__


def squarefree_part(n: int) -> tuple[int, int]:
    """Return ``(k, m)`` with ``n == k*k*m`` and ``m`` square-free."""
    if n < 0:
        raise ValueError("negative radicand")
    if n == 0:
        return 0, 0
    k, m = 1, 1
    rest = n
    f = 2
    while f * f <= rest:
        e = 0
        while rest % f == 0:
            rest //= f
            e += 1
        k *= f ** (e // 2)
        if e % 2:
            m *= f
        f += 1
    m *= rest
    return k, m


def _check_d(d: int) -> int:
    d = int(d)
    if d < 0:
        raise ValueError(f"field parameter must be non-negative, got {d}")
    k, m = squarefree_part(d)
    if d > 1 and k != 1:
        raise ValueError(f"field parameter must be square-free, got {d}")
    return d


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _qsign(p, q, d) -> int:
    if not q:
        return (p > 0) - (p < 0)
    if not p:
        return 1 if q > 0 else -1
    if p > 0:
        if q > 0:
            return 1
        t = p * p - q * q * d
        return (t > 0) - (t < 0)
    if q < 0:
        return -1
    t = q * q * d - p * p
    return (t > 0) - (t < 0)


class Scalar:
    """An element ``p + q*sqrt(d)``.

    Treated as immutable (and hashable); the attributes are never rebound
    after construction.
    """

    __slots__ = ("p", "q", "d")

    def __init__(self, p=0, q=0, d: int = 0):
        p = mpq(p)
        q = mpq(q)
        if d in (0, 1):
            p = p + q if d == 1 else p
            q = mpq(0)
        self.p = p
        self.q = q
        self.d = d

    @staticmethod
    def _raw(p, q, d):
        s = _new(Scalar)
        s.p = p
        s.q = q
        s.d = d
        return s

    def __reduce__(self):
        return (Scalar, (Fraction(int(self.p.numerator), int(self.p.denominator)),
                         Fraction(int(self.q.numerator), int(self.q.denominator)), self.d))

    # -- coercion ---------------------------------------------------------
    def _coerce(self, other) -> Scalar:
        if type(other) is Scalar and other.d == self.d:
            return other
        if isinstance(other, Scalar):
            if other.d != self.d:
                raise FieldMismatchError(
                    f"cannot mix Q(sqrt({self.d})) with Q(sqrt({other.d}))")
            return other
        if isinstance(other, _NUMERIC) or isinstance(other, Rational):
            return Scalar._raw(mpq(other), mpq(0), self.d)
        return NotImplemented

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Scalar._raw(self.p + o.p, self.q + o.q, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Scalar._raw(self.p - o.p, self.q - o.q, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return Scalar._raw(-self.p, -self.q, self.d)

    def __pos__(self):
        return self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self.q and not o.q:
            return Scalar._raw(self.p * o.p, self.q, self.d)
        return Scalar._raw(self.p * o.p + self.q * o.q * self.d,
                           self.p * o.q + self.q * o.p, self.d)

    __rmul__ = __mul__

    def norm(self):
        """Field norm ``p^2 - d q^2`` (a rational)."""
        return self.p * self.p - self.q * self.q * self.d

    def conjugate(self) -> Scalar:
        return Scalar._raw(self.p, -self.q, self.d)

    def inverse(self) -> Scalar:
        if not self:
            raise ZeroDivisionError("division by zero scalar")
        if not self.q:
            return Scalar._raw(1 / self.p, self.q, self.d)
        n = self.norm()
        return Scalar._raw(self.p / n, -self.q / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o.q:
            if not o.p:
                raise ZeroDivisionError("division by zero scalar")
            return Scalar._raw(self.p / o.p, self.q / o.p, self.d)
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- order ------------------------------------------------------------
    def sign(self) -> int:
        """Sign under the real embedding with ``sqrt(d) > 0``."""
        return _qsign(self.p, self.q, self.d)

    def compare(self, other) -> int:
        if type(other) is Scalar:
            if other.d != self.d:
                raise FieldMismatchError(
                    f"cannot compare Q(sqrt({self.d})) with Q(sqrt({other.d}))")
            o = other
        else:
            o = self._coerce(other)
            if o is NotImplemented:
                raise TypeError(f"cannot compare Scalar with {type(other).__name__}")
        return _qsign(self.p - o.p, self.q - o.q, self.d)

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def __eq__(self, other):
        if isinstance(other, Scalar):
            if other.d != self.d:
                raise FieldMismatchError(
                    f"cannot compare Q(sqrt({self.d})) with Q(sqrt({other.d}))")
            return self.p == other.p and self.q == other.q
        if isinstance(other, _NUMERIC) or isinstance(other, Rational):
            return not self.q and self.p == other
        return NotImplemented

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        if not self.q:
            return hash(self.p)
        return hash((self.p, self.q, self.d))

    def __bool__(self):
        return bool(self.p) or bool(self.q)

    # -- conversion -------------------------------------------------------
    def is_rational(self) -> bool:
        return not self.q

    def __float__(self):
        """Approximate value, for display only."""
        return float(self.p) + float(self.q) * math.sqrt(self.d)

    def render(self) -> str:
        if not self.q:
            return render_rational(self.p)
        coef = abs(self.q)
        tail = f"sqrt({self.d})" if coef == 1 else f"{render_rational(coef)}*sqrt({self.d})"
        if not self.p:
            return tail if self.q > 0 else "-" + tail
        return f"{render_rational(self.p)}{'+' if self.q > 0 else '-'}{tail}"

    __str__ = render

    def __repr__(self):
        return f"Scalar({self.render()!r}, d={self.d})"


def render_rational(x) -> str:
    x = mpq(x)
    if x.denominator == 1:
        return str(int(x.numerator))
    return f"{int(x.numerator)}/{int(x.denominator)}"


class Field:
    """Field context ``Q(sqrt(d))``; ``d = 0`` means plain rationals."""

    __slots__ = ("d",)

    def __init__(self, d: int = 0):
        self.d = _check_d(d)

    def __call__(self, p=0, q=0) -> Scalar:
        return Scalar(p, q, self.d)

    def __eq__(self, other):
        return isinstance(other, Field) and other.d == self.d

    def __hash__(self):
        return hash(("Field", self.d))

    def __repr__(self):
        return f"Field(d={self.d})"

    @property
    def zero(self) -> Scalar:
        return Scalar(0, 0, self.d)

    @property
    def one(self) -> Scalar:
        return Scalar(1, 0, self.d)

    def sqrt_d(self) -> Scalar:
        if self.d < 2:
            raise ValueError("Q has no irrational square root generator")
        return Scalar(0, 1, self.d)

    def parse(self, text: str) -> Scalar:
        return parse_scalar(text, self.d)

    def coerce(self, value) -> Scalar:
        if isinstance(value, Scalar):
            if value.d != self.d:
                raise FieldMismatchError(f"scalar from Q(sqrt({value.d})) in {self!r}")
            return value
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, bool) or not (isinstance(value, _NUMERIC) or isinstance(value, Rational)):
            raise ScalarParseError(f"not an exact scalar: {value!r}")
        return Scalar(value, 0, self.d)


_BINOPS = {ast.Add: "__add__", ast.Sub: "__sub__", ast.Mult: "__mul__", ast.Div: "__truediv__"}


def parse_scalar(text: str, d: int = 0) -> Scalar:
    """Parse ``"p/q"``, ``"p/q+r/s*sqrt(d)"`` or any arithmetic expression
    built from integers, ``+ - * /``, parentheses and ``sqrt(n)``.

    ``sqrt(n)`` must reduce to a rational multiple of ``sqrt(d)``.
    """
    if not isinstance(text, str):
        raise ScalarParseError(f"expected a string, got {type(text).__name__}")
    src = re.sub(r"√\s*(\d+)", r"sqrt(\1)", text.strip().replace("−", "-")).replace("√", "sqrt")
    if not src:
        raise ScalarParseError("empty scalar string")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ScalarParseError(f"malformed scalar {text!r}") from exc

    def ev(node) -> Scalar:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Scalar._raw(mpq(node.value), mpq(0), d)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            left, right = ev(node.left), ev(node.right)
            try:
                return getattr(left, _BINOPS[type(node.op)])(right)
            except ZeroDivisionError as exc:
                raise ScalarParseError(f"division by zero in {text!r}") from exc
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id == "sqrt" and len(node.args) == 1 and not node.keywords):
            arg = node.args[0]
            if not (isinstance(arg, ast.Constant) and isinstance(arg.value, int)):
                raise ScalarParseError(f"sqrt() takes a non-negative integer literal in {text!r}")
            k, m = squarefree_part(arg.value)
            if m in (0, 1):
                return Scalar._raw(mpq(k), mpq(0), d)
            if m != d:
                raise FieldMismatchError(f"sqrt({arg.value}) does not lie in Q(sqrt({d}))")
            return Scalar._raw(mpq(0), mpq(k), d)
        raise ScalarParseError(f"unsupported syntax in scalar {text!r}")

    try:
        return ev(tree)
    except RecursionError as exc:
        raise ScalarParseError(f"scalar expression too deep: {text!r}") from exc
