"""Exact coefficient field for the symbolic engine.

Everything symbolic in this package is linear over Q(q), the field of
rational functions in the deformation parameter q with rational
coefficients.  Half- and quarter-integer powers of q occur naturally
(the pairing of K with the fundamental corepresentation produces
q^(1/2), half-integer twist powers produce q^(1/4)), so internally a
scalar is a ratio of Laurent polynomials in the variable

    u = q^(1/4).

Exponents are always printed and parsed in terms of q, with fractional
exponents such as ``q^(1/2)`` when the u-exponent is not a multiple of
four.  Canonical form: numerator and denominator coprime, denominator
with nonnegative minimal exponent and leading coefficient 1.

gmpy2 rationals are used when available; Fraction otherwise.
"""

from __future__ import annotations

import re
from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq

    def _rat(a=0, b=1):
        return _mpq(a, b)
except ImportError:  # pragma: no cover - gmpy2 is normally present
    def _rat(a=0, b=1):
        return Fraction(a, b)

_ZERO = _rat(0)
_ONE = _rat(1)


def _as_rat(x):
    if isinstance(x, (int, Fraction)):
        return _rat(x.numerator, x.denominator) if isinstance(x, Fraction) else _rat(x)
    return x


class LPoly:
    """Laurent polynomial in u with rational coefficients.

    Stored as an offset (lowest exponent) and a dense coefficient list
    in ascending exponent order with nonzero first and last entries.
    The zero polynomial is (0, []).
    """

    __slots__ = ("off", "co")

    def __init__(self, off=0, co=None):
        self.off = off
        self.co = co if co is not None else []

    # -- constructors -------------------------------------------------
    @staticmethod
    def const(c):
        c = _as_rat(c)
        return LPoly(0, [c]) if c else LPoly()

    @staticmethod
    def upow(e, c=1):
        """c * u^e"""
        c = _as_rat(c)
        return LPoly(e, [c]) if c else LPoly()

    # -- basic queries -------------------------------------------------
    def is_zero(self):
        return not self.co

    def degree(self):
        return self.off + len(self.co) - 1 if self.co else None

    def _trim(self):
        co = self.co
        lo = 0
        hi = len(co)
        while hi > lo and not co[hi - 1]:
            hi -= 1
        while lo < hi and not co[lo]:
            lo += 1
        if lo or hi != len(co):
            self.co = co[lo:hi]
            self.off += lo
        if not self.co:
            self.off = 0
        return self

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        off = min(self.off, other.off)
        top = max(self.off + len(self.co), other.off + len(other.co))
        co = [_ZERO] * (top - off)
        for i, c in enumerate(self.co):
            co[self.off - off + i] = c
        for i, c in enumerate(other.co):
            j = other.off - off + i
            co[j] = co[j] + c
        return LPoly(off, co)._trim()

    def __neg__(self):
        return LPoly(self.off, [-c for c in self.co])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if self.is_zero() or other.is_zero():
            return LPoly()
        n, m = len(self.co), len(other.co)
        co = [_ZERO] * (n + m - 1)
        if n > m:
            a, b, na = other.co, self.co, m
        else:
            a, b, na = self.co, other.co, n
        for i in range(na):
            ai = a[i]
            if not ai:
                continue
            for j, bj in enumerate(b):
                co[i + j] = co[i + j] + ai * bj
        return LPoly(self.off + other.off, co)._trim()

    def scale(self, c):
        c = _as_rat(c)
        if not c or self.is_zero():
            return LPoly()
        return LPoly(self.off, [c * x for x in self.co])

    def shift(self, e):
        """Multiply by u^e."""
        if self.is_zero():
            return self
        return LPoly(self.off + e, self.co)

    # -- division (plain polynomial part, offsets stripped) -------------
    def _divmod_poly(self, other):
        """divmod ignoring offsets; other must be nonzero."""
        r = list(self.co)
        d = other.co
        dn = len(d)
        lead = d[-1]
        if len(r) < dn:
            return [], r
        qco = [_ZERO] * (len(r) - dn + 1)
        for k in range(len(r) - dn, -1, -1):
            c = r[k + dn - 1]
            if c:
                c = c / lead
                qco[k] = c
                for j in range(dn):
                    r[k + j] = r[k + j] - c * d[j]
        while r and not r[-1]:
            r.pop()
        return qco, r

    def gcd(self, other):
        """Monic gcd of the polynomial parts (offsets ignored)."""
        a, b = list(self.co), list(other.co)
        while b:
            _, r = LPoly(0, a)._divmod_poly(LPoly(0, b))
            a, b = b, r
        if not a:
            return LPoly()
        lead = a[-1]
        return LPoly(0, [c / lead for c in a])._trim()

    def __eq__(self, other):
        return (
            isinstance(other, LPoly)
            and self.off == other.off
            and self.co == other.co
        )

    def __hash__(self):
        return hash((self.off, tuple(self.co)))

    def evaluate(self, uval):
        """Evaluate at a numeric value of u (float or complex)."""
        if self.is_zero():
            return 0.0
        acc = 0.0
        for c in reversed(self.co):
            acc = acc * uval + float(c)
        return acc * uval ** self.off

    def __repr__(self):
        return f"LPoly({self.off}, {self.co})"


def _fmt_q_power(e4):
    """Format u^e4 as a q-power string; exponent in units of 1/4."""
    if e4 == 0:
        return "1"
    ex = Fraction(e4, 4)
    if ex == 1:
        return "q"
    if ex.denominator == 1:
        return f"q^{ex.numerator}" if ex.numerator >= 0 else f"q^({ex.numerator})"
    return f"q^({ex.numerator}/{ex.denominator})"


def _fmt_coeff(c):
    c = Fraction(int(c.numerator), int(c.denominator))
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _poly_str(p: LPoly) -> str:
    if p.is_zero():
        return "0"
    terms = []
    for i, c in enumerate(p.co):
        if not c:
            continue
        e4 = p.off + i
        cs = _fmt_coeff(c)
        qs = _fmt_q_power(e4)
        if qs == "1":
            term = cs
        elif cs == "1":
            term = qs
        elif cs == "-1":
            term = "-" + qs
        else:
            term = f"{cs}*{qs}"
        terms.append(term)
    out = terms[0]
    for t in terms[1:]:
        out += " - " + t[1:] if t.startswith("-") else " + " + t
    return out


class QScalar:
    """Element of Q(q^(1/4)): a ratio num/den of Laurent polynomials in u.

    Arithmetic is cross-multiplied and lazily normalized; ``reduce()``
    brings the fraction to canonical form.  Zero testing never needs a
    gcd because the denominator is nonzero by construction.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LPoly, den: LPoly | None = None):
        if den is None:
            den = LPoly.const(1)
        if den.is_zero():
            raise ZeroDivisionError("QScalar with zero denominator")
        self.num = num
        self.den = den

    # -- constructors --------------------------------------------------
    @staticmethod
    def from_rational(c) -> "QScalar":
        return QScalar(LPoly.const(c))

    @staticmethod
    def qpow(e) -> "QScalar":
        """q^e for e an integer multiple of 1/4 (int or Fraction)."""
        e4 = Fraction(e) * 4
        if e4.denominator != 1:
            raise ValueError(f"exponent {e} is not a multiple of 1/4")
        return QScalar(LPoly.upow(int(e4)))

    # -- predicates -----------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return (self - QSCALAR_ONE).is_zero()

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if self.den == other.den:
            return QScalar(self.num + other.num, self.den)
        return QScalar(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return QScalar(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        return QScalar(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by zero QScalar")
        return QScalar(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def inv(self):
        if self.num.is_zero():
            raise ZeroDivisionError("inverting zero QScalar")
        return QScalar(self.den, self.num)

    def __eq__(self, other):
        if not isinstance(other, (QScalar, int, Fraction)):
            return NotImplemented
        other = _coerce(other)
        return (self.num * other.den - other.num * self.den).is_zero()

    def __hash__(self):
        r = self.reduce()
        return hash((r.num, r.den))

    # -- normalization ---------------------------------------------------
    def reduce(self) -> "QScalar":
        """Canonical form: coprime parts, den with offset 0, leading coeff 1."""
        if self.num.is_zero():
            return QScalar(LPoly(), LPoly.const(1))
        g = self.num.gcd(self.den)
        nq, nr = self.num._divmod_poly(g)
        dq, dr = self.den._divmod_poly(g)
        assert not nr and not dr
        num = LPoly(self.num.off, nq)._trim()
        den = LPoly(self.den.off, dq)._trim()
        # strip u-powers: make den offset 0
        num.off -= den.off
        den = LPoly(0, den.co)
        lead = den.co[-1]
        if lead != _ONE:
            num = num.scale(_ONE / lead)
            den = den.scale(_ONE / lead)
        return QScalar(num, den)

    # -- numerics ---------------------------------------------------------
    def evaluate(self, q):
        """Evaluate at numeric q > 0 (float) or complex; returns float/complex."""
        u = q ** 0.25 if not isinstance(q, complex) else q ** 0.25
        d = self.den.evaluate(u)
        if d == 0.0:
            r = self.reduce()
            d = r.den.evaluate(u)
            if d == 0.0:
                raise ZeroDivisionError(f"QScalar denominator vanishes at q={q}")
            return r.num.evaluate(u) / d
        return self.num.evaluate(u) / d

    def evaluate_fraction(self, q: Fraction) -> Fraction:
        """Exact evaluation at rational q; requires integer q-exponents."""
        r = self.reduce()
        q = Fraction(q)

        def ev(p: LPoly) -> Fraction:
            if p.is_zero():
                return Fraction(0)
            if p.off % 4 or (len(p.co) > 1 and any(
                    (p.off + i) % 4 for i, c in enumerate(p.co) if c)):
                raise ValueError("fractional q-exponent; exact evaluation undefined")
            acc = Fraction(0)
            for i, c in enumerate(p.co):
                if c:
                    acc += Fraction(int(c.numerator), int(c.denominator)) * q ** ((p.off + i) // 4)
            return acc

        den = ev(r.den)
        if den == 0:
            raise ZeroDivisionError(f"denominator vanishes at q={q}")
        return ev(r.num) / den

    # -- display -----------------------------------------------------------
    def __str__(self):
        r = self.reduce()
        ns = _poly_str(r.num)
        if r.den == LPoly.const(1):
            return ns
        return f"({ns})/({_poly_str(r.den)})"

    __repr__ = __str__


QSCALAR_ZERO = QScalar(LPoly())
QSCALAR_ONE = QScalar(LPoly.const(1))


def _coerce(x) -> QScalar:
    if isinstance(x, QScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return QScalar.from_rational(x)
    raise TypeError(f"cannot coerce {type(x)} to QScalar")


def qq(e=1) -> QScalar:
    """Shorthand for q^e (e int, Fraction, or string like '1/2')."""
    return QScalar.qpow(Fraction(e))


# ---------------------------------------------------------------------------
# Parsing.  Grammar (whitespace ignored):
#   scalar  := polyexpr | "(" polyexpr ")" "/" "(" polyexpr ")"
#   polyexpr:= term (("+"|"-") term)*
#   term    := rat ["*" qpow] | qpow
#   qpow    := "q" ["^" (int | "(" rat ")")]
#   rat     := int ["/" int]
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(q|\^|\*|\+|-|/|\(|\)|\d+)")


def _tokenize(s):
    out, pos = [], 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m:
            raise ValueError(f"bad scalar syntax near {s[pos:pos+10]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _P:
    def __init__(self, toks):
        self.t = toks
        self.i = 0

    def peek(self):
        return self.t[self.i] if self.i < len(self.t) else None

    def take(self, tok=None):
        got = self.peek()
        if tok is not None and got != tok:
            raise ValueError(f"expected {tok!r}, got {got!r}")
        self.i += 1
        return got

    def parse_int(self):
        sign = 1
        while self.peek() in ("+", "-"):
            if self.take() == "-":
                sign = -sign
        return sign * int(self.take())

    def parse_rat(self):
        n = self.parse_int()
        if self.peek() == "/" and self.i + 1 < len(self.t) and self.t[self.i + 1] != "(":
            self.take("/")
            return Fraction(n, self.parse_int())
        return Fraction(n)

    def parse_qpow(self):
        self.take("q")
        if self.peek() != "^":
            return 4
        self.take("^")
        if self.peek() == "(":
            self.take("(")
            ex = self.parse_rat()
            self.take(")")
        else:
            ex = Fraction(self.parse_int())
        e4 = ex * 4
        if e4.denominator != 1:
            raise ValueError(f"unsupported q-exponent {ex}")
        return int(e4)

    def parse_poly(self) -> LPoly:
        acc = LPoly()
        sign = 1
        while True:
            tok = self.peek()
            if tok == "+":
                self.take()
                continue
            if tok == "-":
                self.take()
                sign = -sign
                continue
            if tok == "q":
                e4 = self.parse_qpow()
                acc = acc + LPoly.upow(e4, sign)
            else:
                c = sign * self.parse_rat()
                if self.peek() == "*":
                    self.take("*")
                    e4 = self.parse_qpow()
                    acc = acc + LPoly.upow(e4, c)
                else:
                    acc = acc + LPoly.const(c)
            sign = 1
            if self.peek() in ("+", "-"):
                continue
            return acc


def parse_scalar(s: str) -> QScalar:
    """Parse the canonical QScalar string form (round-trips with str())."""
    s = s.strip()
    # split (num)/(den) at top level
    if s.startswith("("):
        depth = 0
        for i, ch in enumerate(s):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    rest = s[i + 1:].strip()
                    if rest.startswith("/"):
                        den = rest[1:].strip()
                        if not (den.startswith("(") and den.endswith(")")):
                            raise ValueError("denominator must be parenthesized")
                        pn = _P(_tokenize(s[1:i]))
                        num = pn.parse_poly()
                        if pn.peek() is not None:
                            raise ValueError("trailing tokens in numerator")
                        pd = _P(_tokenize(den[1:-1]))
                        d = pd.parse_poly()
                        if pd.peek() is not None:
                            raise ValueError("trailing tokens in denominator")
                        return QScalar(num, d)
                    break
    p = _P(_tokenize(s))
    num = p.parse_poly()
    if p.peek() is not None:
        raise ValueError(f"trailing tokens in scalar {s!r}")
    return QScalar(num)
