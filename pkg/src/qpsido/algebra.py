"""Exact crossed-product algebra of quantum SU(2) differential operators.

The algebra is generated by the coordinate algebra O(SU_q(2)) with
generators a, b, c, d and the quantized enveloping algebra U_q(su2)
with generators E, F, K, K^{-1}, subject to

    K E K^{-1} = q E,   K F K^{-1} = q^{-1} F,
    [E, F] = (K^2 - K^{-2}) / (q - q^{-1}),

    a b = q b a,  a c = q c a,  b c = c b,  b d = q d b,  c d = q d c,
    a d - q b c = 1,   d a - q^{-1} b c = 1,

and the smash-product exchange rule  h x = (h_(1) |> x) h_(2), where
|> is the left action dual to the fundamental corepresentation,

    K |> a = q^(1/2) a,  K |> b = q^(-1/2) b,
    K |> c = q^(1/2) c,  K |> d = q^(-1/2) d,
    E |> b = a,  E |> d = c,  F |> a = b,  F |> c = d  (others 0).

Normal form: every element is a combination of monomials  w F^f K^k E^e
with w in the PBW basis {a^x b^m c^n} u {d^x b^m c^n : x >= 1}.  All
products are computed structurally (closed-form q-exchange factors plus
the ad/da reduction), so normal_form is idempotent by construction.

Coefficients live in Q(q^(1/4)) (see scalars).  q stays formal here;
numbers only enter in the spectral representation.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, NamedTuple

from .mucalc import ZExpr, mu_binomial_exact
from .scalars import QSCALAR_ONE, QSCALAR_ZERO, QScalar, parse_scalar

__all__ = [
    "Monomial",
    "AlgebraElement",
    "TensorElement",
    "gen",
    "normal_form",
    "multiply",
    "coproduct",
    "counit",
    "act",
    "filtration_order",
    "twist_theta",
    "weight_decompose",
    "nabla",
    "nabla_mu",
    "casimir",
    "casimir_printed",
    "laplace_element",
    "centrality_defect",
    "expansion_terms",
    "parse_element",
]

NEG_INF = float("-inf")


class Monomial(NamedTuple):
    """PBW monomial  w F^f K^k E^e.

    side 0: w = a^x b^bm c^cm;  side 1: w = d^x b^bm c^cm (x >= 1).
    """

    side: int
    x: int
    bm: int
    cm: int
    f: int
    k: int
    e: int

    @property
    def word_degree(self) -> int:
        return self.x + self.bm + self.cm

    @property
    def u_order(self) -> int:
        return self.f + self.e

    def col_weight2(self) -> int:
        """Twice the |>-weight of the coordinate word (an integer)."""
        sx = self.x if self.side == 0 else -self.x
        return sx - self.bm + self.cm

    def word_str(self) -> str:
        parts = []
        letter = "a" if self.side == 0 else "d"
        for sym, expo in ((letter, self.x), ("b", self.bm), ("c", self.cm)):
            if expo == 1:
                parts.append(sym)
            elif expo:
                parts.append(f"{sym}^{expo}")
        return " ".join(parts) if parts else "1"


MONO_ONE = Monomial(0, 0, 0, 0, 0, 0, 0)

_Q = QScalar.qpow  # q^e with e int or Fraction


def _qm1(sign: int = 1) -> QScalar:
    """(q - q^{-1})^sign as a QScalar."""
    d = _Q(1) - _Q(-1)
    return d if sign == 1 else d.inv()


def _addt(d: dict, key, coeff: QScalar):
    cur = d.get(key)
    s = coeff if cur is None else cur + coeff
    if s.is_zero():
        d.pop(key, None)
    else:
        d[key] = s


# ---------------------------------------------------------------------------
# coordinate-word multiplication
# ---------------------------------------------------------------------------

_AD_CACHE: dict[tuple[int, int], dict] = {}
_DA_CACHE: dict[tuple[int, int], dict] = {}


def _reduce_ad(alpha: int, delta: int) -> dict:
    """Normal form of a^alpha d^delta as {(side, x, bm, cm): QScalar}."""
    if delta == 0:
        return {(0, alpha, 0, 0): QSCALAR_ONE}
    if alpha == 0:
        return {(1, delta, 0, 0): QSCALAR_ONE}
    key = (alpha, delta)
    hit = _AD_CACHE.get(key)
    if hit is not None:
        return hit
    # a^A d^D = a^(A-1) d^(D-1) (1 + q^(2D-1) b c)
    inner = _reduce_ad(alpha - 1, delta - 1)
    out: dict = {}
    fac = _Q(2 * delta - 1)
    for (s, x, bm, cm), co in inner.items():
        _addt(out, (s, x, bm, cm), co)
        _addt(out, (s, x, bm + 1, cm + 1), co * fac)
    _AD_CACHE[key] = out
    return out


def _reduce_da(delta: int, alpha: int) -> dict:
    """Normal form of d^delta a^alpha."""
    if delta == 0:
        return {(0, alpha, 0, 0): QSCALAR_ONE}
    if alpha == 0:
        return {(1, delta, 0, 0): QSCALAR_ONE}
    key = (delta, alpha)
    hit = _DA_CACHE.get(key)
    if hit is not None:
        return hit
    # d^D a^A = d^(D-1) a^(A-1) (1 + q^(1-2A) b c)
    inner = _reduce_da(delta - 1, alpha - 1)
    out: dict = {}
    fac = _Q(1 - 2 * alpha)
    for (s, x, bm, cm), co in inner.items():
        _addt(out, (s, x, bm, cm), co)
        _addt(out, (s, x, bm + 1, cm + 1), co * fac)
    _DA_CACHE[key] = out
    return out


def _mul_coord(w1: tuple, w2: tuple) -> dict:
    """Product of two PBW coordinate words -> {word: QScalar}.

    Words are (side, x, bm, cm) tuples.
    """
    s1, x1, b1, c1 = w1
    s2, x2, b2, c2 = w2
    # move b^b1 c^c1 rightward past the a/d block of w2
    shift = b1 + c1
    if s2 == 0:
        fac = _Q(-x2 * shift) if x2 else QSCALAR_ONE
    else:
        fac = _Q(x2 * shift) if x2 else QSCALAR_ONE
    bm, cm = b1 + b2, c1 + c2
    if x1 == 0 or x2 == 0 or s1 == s2:
        if x1 and x2:
            side, x = s1, x1 + x2
        elif x1:
            side, x = s1, x1
        else:
            side, x = s2, x2
        return {(side if x else 0, x, bm, cm): fac}
    # mixed prefixes: reduce a^x1 d^x2 or d^x1 a^x2
    red = _reduce_ad(x1, x2) if s1 == 0 else _reduce_da(x1, x2)
    out = {}
    for (s, x, eb, ec), co in red.items():
        # the extra (bc)^j from the reduction sits left of b^bm c^cm; all
        # of b, c commute among themselves
        _addt(out, (s if x else 0, x, eb + bm, ec + cm), co * fac)
    return out


# ---------------------------------------------------------------------------
# U_q(su2) multiplication
# ---------------------------------------------------------------------------


def _rmul_F(f: int, k: int, e: int) -> dict:
    """(F^f K^k E^e) * F  ->  {(f,k,e): QScalar}."""
    if e == 0:
        return {(f + 1, k, 0): _Q(-k) if k else QSCALAR_ONE}
    out: dict = {}
    # E^e F = (E^(e-1) F) E + [q^(-2(e-1)) K^2 - q^(2(e-1)) K^-2] E^(e-1)/(q-q^-1)
    for (f1, k1, e1), co in _rmul_F(f, k, e - 1).items():
        _addt(out, (f1, k1, e1 + 1), co)
    inv = _qm1(-1)
    _addt(out, (f, k + 2, e - 1), _Q(-2 * (e - 1)) * inv)
    _addt(out, (f, k - 2, e - 1), -(_Q(2 * (e - 1)) * inv))
    return out


def _mul_u(u1: tuple, u2: tuple) -> dict:
    """Product of U-monomials (f, k, e) -> {(f,k,e): QScalar}."""
    f2, k2, e2 = u2
    acc = {u1: QSCALAR_ONE}
    for _ in range(f2):
        nxt: dict = {}
        for (f, k, e), co in acc.items():
            for key, c2 in _rmul_F(f, k, e).items():
                _addt(nxt, key, co * c2)
        acc = nxt
    if k2:
        nxt = {}
        for (f, k, e), co in acc.items():
            # E^e K^k2 = q^(-e k2) K^k2 E^e
            _addt(nxt, (f, k + k2, e), co * (_Q(-e * k2) if e else QSCALAR_ONE))
        acc = nxt
    if e2:
        acc = {(f, k, e + e2): co for (f, k, e), co in acc.items()}
    return acc


# ---------------------------------------------------------------------------
# the left action |> of U on coordinate words
# ---------------------------------------------------------------------------

# per-letter action of E and F: letter -> (new letter or None)
_E_TABLE = {"b": "a", "d": "c", "a": None, "c": None}
_F_TABLE = {"a": "b", "c": "d", "b": None, "d": None}
# twice the column weight per letter
_W2 = {"a": 1, "b": -1, "c": 1, "d": -1}
_LETTER_WORD = {
    "a": (0, 1, 0, 0),
    "b": (0, 0, 1, 0),
    "c": (0, 0, 0, 1),
    "d": (1, 1, 0, 0),
}


def _word_letters(w: tuple) -> list[str]:
    side, x, bm, cm = w
    head = "a" if side == 0 else "d"
    return [head] * x + ["b"] * bm + ["c"] * cm


def _letters_to_coord(letters: list[str]) -> dict:
    acc = {(0, 0, 0, 0): QSCALAR_ONE}
    for ch in letters:
        lw = _LETTER_WORD[ch]
        nxt: dict = {}
        for w, co in acc.items():
            for w2, c2 in _mul_coord(w, lw).items():
                _addt(nxt, w2, co * c2)
        acc = nxt
    return acc


def _act_gen_word(g: str, w: tuple) -> dict:
    """g |> w for a generator g in {E, F, K, Kinv}; w a PBW word."""
    if g in ("K", "Kinv"):
        w2 = (w[1] if w[0] == 0 else -w[1]) - w[2] + w[3]
        sign = 1 if g == "K" else -1
        return {w: _Q(Fraction(sign * w2, 2))}
    table = _E_TABLE if g == "E" else _F_TABLE
    letters = _word_letters(w)
    total2 = sum(_W2[ch] for ch in letters)
    out: dict = {}
    pre2 = 0  # twice the weight of the prefix
    for i, ch in enumerate(letters):
        rep = table[ch]
        if rep is not None:
            suf2 = total2 - pre2 - _W2[ch]
            fac = _Q(Fraction(pre2 - suf2, 2))
            for w2, co in _letters_to_coord(
                    letters[:i] + [rep] + letters[i + 1:]).items():
                _addt(out, w2, co * fac)
        pre2 += _W2[ch]
    return out


def _act_gen_coord(g: str, coord: dict) -> dict:
    out: dict = {}
    for w, co in coord.items():
        for w2, c2 in _act_gen_word(g, w).items():
            _addt(out, w2, co * c2)
    return out


def _act_umono_coord(u: tuple, coord: dict) -> dict:
    """(F^f K^k E^e) |> coordinate element (as {word: QScalar})."""
    f, k, e = u
    for _ in range(e):
        coord = _act_gen_coord("E", coord)
        if not coord:
            return {}
    if k:
        g = "K" if k > 0 else "Kinv"
        for _ in range(abs(k)):
            coord = _act_gen_coord(g, coord)
    for _ in range(f):
        coord = _act_gen_coord("F", coord)
        if not coord:
            return {}
    return coord


# ---------------------------------------------------------------------------
# crossing U-letters past coordinate words
# ---------------------------------------------------------------------------

_CROSS_CACHE: dict[tuple, dict] = {}


def _cross_gen(g: str, w: tuple) -> dict:
    """g * w = sum (g_(1) |> w) g_(2)  ->  {(word, (f,k,e)): QScalar}."""
    key = (g, w)
    hit = _CROSS_CACHE.get(key)
    if hit is not None:
        return hit
    w2 = (w[1] if w[0] == 0 else -w[1]) - w[2] + w[3]
    half = Fraction(w2, 2)
    out: dict = {}
    if g == "K":
        out = {(w, (0, 1, 0)): _Q(half)}
    elif g == "Kinv":
        out = {(w, (0, -1, 0)): _Q(-half)}
    elif g == "E":
        # E w = (K|>w) E + (E|>w) K^-1
        _addt(out, (w, (0, 0, 1)), _Q(half))
        for ww, co in _act_gen_word("E", w).items():
            _addt(out, (ww, (0, -1, 0)), co)
    elif g == "F":
        _addt(out, (w, (1, 0, 0)), _Q(half))
        for ww, co in _act_gen_word("F", w).items():
            _addt(out, (ww, (0, -1, 0)), co)
    _CROSS_CACHE[key] = out
    return out


def _cross_umono(u: tuple, w: tuple) -> dict:
    """(F^f K^k E^e) * w  ->  {(word, (f,k,e)): QScalar}."""
    f, k, e = u
    acc: dict = {(w, (0, 0, 0)): QSCALAR_ONE}
    letters = ["F"] * f + (["K"] * k if k > 0 else ["Kinv"] * (-k)) + ["E"] * e
    for g in reversed(letters):
        nxt: dict = {}
        for (ww, uu), co in acc.items():
            for (w3, u3), c3 in _cross_gen(g, ww).items():
                # (g-part u3) * uu in U
                for u4, c4 in _mul_u(u3, uu).items():
                    _addt(nxt, (w3, u4), co * c3 * c4)
        acc = nxt
    return acc


def _mul_mono(m1: Monomial, m2: Monomial) -> dict:
    """Product of two PBW monomials -> {Monomial: QScalar}."""
    w1 = (m1.side, m1.x, m1.bm, m1.cm)
    w2 = (m2.side, m2.x, m2.bm, m2.cm)
    u1 = (m1.f, m1.k, m1.e)
    u2 = (m2.f, m2.k, m2.e)
    out: dict = {}
    if u1 == (0, 0, 0) or w2 == (0, 0, 0, 0):
        crossed = {(w2, u1): QSCALAR_ONE}
    else:
        crossed = _cross_umono(u1, w2)
    for (wmid, umid), co in crossed.items():
        words = _mul_coord(w1, wmid)
        upart = _mul_u(umid, u2) if u2 != (0, 0, 0) else {umid: QSCALAR_ONE}
        for w3, cw in words.items():
            for u3, cu in upart.items():
                mono = Monomial(w3[0], w3[1], w3[2], w3[3], u3[0], u3[1], u3[2])
                _addt(out, mono, co * cw * cu)
    return out


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------


class AlgebraElement:
    """Finite Q(q)-linear combination of PBW monomials, in normal form."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms: dict[Monomial, QScalar] = {}
        if terms:
            for m, c in terms.items():
                if not c.is_zero():
                    self.terms[m] = c

    # -- constructors ----------------------------------------------------
    @staticmethod
    def zero() -> "AlgebraElement":
        return AlgebraElement()

    @staticmethod
    def one() -> "AlgebraElement":
        return AlgebraElement({MONO_ONE: QSCALAR_ONE})

    @staticmethod
    def from_monomial(m: Monomial, c: QScalar = QSCALAR_ONE) -> "AlgebraElement":
        return AlgebraElement({m: c})

    # -- ring operations ---------------------------------------------------
    def __add__(self, other):
        other = _as_element(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            _addt(out, m, c)
        r = AlgebraElement()
        r.terms = out
        return r

    __radd__ = __add__

    def __neg__(self):
        r = AlgebraElement()
        r.terms = {m: -c for m, c in self.terms.items()}
        return r

    def __sub__(self, other):
        return self + (-_as_element(other))

    def __rsub__(self, other):
        return _as_element(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (QScalar, int, Fraction)):
            return self.scale(other)
        other = _as_element(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                c12 = c1 * c2
                for m3, c3 in _mul_mono(m1, m2).items():
                    _addt(out, m3, c12 * c3)
        r = AlgebraElement()
        r.terms = out
        return r

    def __rmul__(self, other):
        if isinstance(other, (QScalar, int, Fraction)):
            return self.scale(other)
        return _as_element(other) * self

    def scale(self, c) -> "AlgebraElement":
        if not isinstance(c, QScalar):
            c = QScalar.from_rational(c)
        if c.is_zero():
            return AlgebraElement()
        r = AlgebraElement()
        r.terms = {m: v * c for m, v in self.terms.items()}
        return r

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not defined in the algebra")
        acc = AlgebraElement.one()
        for _ in range(n):
            acc = acc * self
        return acc

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, (AlgebraElement, int, Fraction, QScalar)):
            return NotImplemented
        return (self - _as_element(other)).is_zero()

    def __hash__(self):
        raise TypeError("AlgebraElement is unhashable")

    # -- structure ----------------------------------------------------------
    def star(self) -> "AlgebraElement":
        """The *-structure: a*=d, b*=-q c, c*=-q^{-1} b, E*=F, K*=K."""
        out = AlgebraElement.zero()
        for m, co in self.terms.items():
            # (w F^f K^k E^e)* = F^e K^k E^f * (w*)
            upart = AlgebraElement.from_monomial(
                Monomial(0, 0, 0, 0, m.e, m.k, m.f))
            head = "a" if m.side == 0 else "d"
            letters = [head] * m.x + ["b"] * m.bm + ["c"] * m.cm
            acc = upart
            for ch in reversed(letters):
                acc = acc * _STAR_LETTER[ch]
            out = out + acc.scale(co)
        return out

    def is_coordinate(self) -> bool:
        return all(m.f == 0 and m.k == 0 and m.e == 0 for m in self.terms)

    def is_u(self) -> bool:
        return all(m.word_degree == 0 for m in self.terms)

    def coefficient(self, m: Monomial) -> QScalar:
        return self.terms.get(m, QSCALAR_ZERO)

    def __str__(self):
        if not self.terms:
            return "(0) * 1 | F^0 K^0 E^0"
        parts = []
        for m in sorted(self.terms):
            c = self.terms[m]
            parts.append(f"({c}) * {m.word_str()} | F^{m.f} K^{m.k} E^{m.e}")
        return " + ".join(parts)

    def __repr__(self):
        return f"<AlgebraElement {len(self.terms)} terms: {self}>"


_GEN_WORDS = {
    "a": Monomial(0, 1, 0, 0, 0, 0, 0),
    "b": Monomial(0, 0, 1, 0, 0, 0, 0),
    "c": Monomial(0, 0, 0, 1, 0, 0, 0),
    "d": Monomial(1, 1, 0, 0, 0, 0, 0),
    "E": Monomial(0, 0, 0, 0, 0, 0, 1),
    "F": Monomial(0, 0, 0, 0, 1, 0, 0),
    "K": Monomial(0, 0, 0, 0, 0, 1, 0),
    "Kinv": Monomial(0, 0, 0, 0, 0, -1, 0),
}


def gen(name: str) -> AlgebraElement:
    """Generator by name: a, b, c, d, E, F, K, Kinv."""
    return AlgebraElement.from_monomial(_GEN_WORDS[name])


_STAR_LETTER = {
    "a": gen("d"),
    "b": gen("c").scale(-_Q(1)),
    "c": gen("b").scale(-_Q(-1)),
    "d": gen("a"),
}


def _as_element(x) -> AlgebraElement:
    if isinstance(x, AlgebraElement):
        return x
    if isinstance(x, (int, Fraction)):
        return AlgebraElement.one().scale(x)
    if isinstance(x, QScalar):
        return AlgebraElement.one().scale(x)
    raise TypeError(f"cannot coerce {type(x)} into the algebra")


def normal_form(x) -> AlgebraElement:
    """Normal form of an element or of a word in the generators.

    Accepts an AlgebraElement (idempotent no-op by construction), a
    string in the canonical grammar, or an iterable of generator names
    interpreted as a product.
    """
    if isinstance(x, AlgebraElement):
        return x
    if isinstance(x, str):
        return parse_element(x)
    acc = AlgebraElement.one()
    for name in x:
        acc = acc * gen(name)
    return acc


def multiply(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return _as_element(x) * _as_element(y)


# ---------------------------------------------------------------------------
# Hopf structure on the U-part
# ---------------------------------------------------------------------------


class TensorElement:
    """Finite sum of two-leg tensors with QScalar coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms: dict[tuple[Monomial, Monomial], QScalar] = {}
        if terms:
            for key, c in terms.items():
                if not c.is_zero():
                    self.terms[key] = c

    @staticmethod
    def of(x: AlgebraElement, y: AlgebraElement) -> "TensorElement":
        out = TensorElement()
        for m1, c1 in x.terms.items():
            for m2, c2 in y.terms.items():
                _addt(out.terms, (m1, m2), c1 * c2)
        return out

    def __add__(self, other):
        out = dict(self.terms)
        for key, c in other.terms.items():
            _addt(out, key, c)
        r = TensorElement()
        r.terms = out
        return r

    def __neg__(self):
        r = TensorElement()
        r.terms = {k: -c for k, c in self.terms.items()}
        return r

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out: dict = {}
        for (l1, r1), c1 in self.terms.items():
            for (l2, r2), c2 in other.terms.items():
                c12 = c1 * c2
                for ml, cl in _mul_mono(l1, l2).items():
                    for mr, cr in _mul_mono(r1, r2).items():
                        _addt(out, (ml, mr), c12 * cl * cr)
        r = TensorElement()
        r.terms = out
        return r

    def scale(self, c: QScalar) -> "TensorElement":
        r = TensorElement()
        r.terms = {k: v * c for k, v in self.terms.items()}
        return r

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        return (self - other).is_zero()

    def second_leg_order(self):
        """Max filtration order carried by the second legs."""
        if not self.terms:
            return NEG_INF
        return max(mr.u_order for (_, mr) in self.terms)

    def legs(self):
        return [(ml, mr, c) for (ml, mr), c in self.terms.items()]

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for (ml, mr) in sorted(self.terms):
            c = self.terms[(ml, mr)]
            bits.append(
                f"({c}) * [{ml.word_str()}|F^{ml.f} K^{ml.k} E^{ml.e}] (x) "
                f"[{mr.word_str()}|F^{mr.f} K^{mr.k} E^{mr.e}]"
            )
        return " + ".join(bits)

    __repr__ = __str__


def _tensor_of_umono(u: tuple) -> TensorElement:
    """Coproduct of the U-monomial F^f K^k E^e."""
    f, k, e = u

    def t(mL: Monomial, mR: Monomial, c=QSCALAR_ONE) -> TensorElement:
        return TensorElement({(mL, mR): c})

    K = Monomial(0, 0, 0, 0, 0, 1, 0)
    Kinv = Monomial(0, 0, 0, 0, 0, -1, 0)
    E1 = Monomial(0, 0, 0, 0, 0, 0, 1)
    F1 = Monomial(0, 0, 0, 0, 1, 0, 0)
    one = MONO_ONE

    dK = t(K, K)
    dKinv = t(Kinv, Kinv)
    dE = t(K, E1) + t(E1, Kinv)
    dF = t(K, F1) + t(F1, Kinv)

    acc = t(one, one)
    for _ in range(f):
        acc = acc * dF
    for _ in range(abs(k)):
        acc = acc * (dK if k > 0 else dKinv)
    for _ in range(e):
        acc = acc * dE
    return acc


def coproduct(u: AlgebraElement) -> TensorElement:
    """Coproduct on the enveloping-algebra part (input must lie in U)."""
    if not u.is_u():
        raise ValueError("coproduct is defined on the U-subalgebra only")
    out = TensorElement()
    for m, c in u.terms.items():
        out = out + _tensor_of_umono((m.f, m.k, m.e)).scale(c)
    return out


def counit(u: AlgebraElement) -> QScalar:
    if not u.is_u():
        raise ValueError("counit is defined on the U-subalgebra only")
    acc = QSCALAR_ZERO
    for m, c in u.terms.items():
        if m.f == 0 and m.e == 0:
            acc = acc + c
    return acc


def act(u: AlgebraElement, x: AlgebraElement) -> AlgebraElement:
    """Left module-algebra action u |> x (u in U, x coordinate)."""
    if not u.is_u():
        raise ValueError("act: first argument must lie in U")
    if not x.is_coordinate():
        raise ValueError("act: second argument must be a coordinate element")
    out: dict = {}
    for m, cu in u.terms.items():
        coord = {(mw.side, mw.x, mw.bm, mw.cm): cc for mw, cc in x.terms.items()}
        res = _act_umono_coord((m.f, m.k, m.e), coord)
        for w, c in res.items():
            _addt(out, Monomial(w[0], w[1], w[2], w[3], 0, 0, 0), cu * c)
    r = AlgebraElement()
    r.terms = out
    return r


# ---------------------------------------------------------------------------
# filtration, twisting, weights
# ---------------------------------------------------------------------------


def filtration_order(x: AlgebraElement):
    """Filtration order: E, F in degree 1, K and coordinates in degree 0."""
    if x.is_zero():
        return NEG_INF
    return max(m.u_order for m in x.terms)


def twist_theta(x: AlgebraElement, power=1) -> AlgebraElement:
    """theta^s with theta(w h) = (K |> w) h; s integer or half-integer."""
    s = Fraction(power)
    if (2 * s).denominator != 1:
        raise ValueError("twist power must be an integer or half-integer")
    out = AlgebraElement()
    for m, c in x.terms.items():
        out.terms[m] = c * _Q(s * Fraction(m.col_weight2(), 2))
    return out


def weight_decompose(x: AlgebraElement) -> dict[int, AlgebraElement]:
    """Split into theta^2-eigenvectors; key 2k means eigenvalue q^(2k)...

    Keys are the integer exponents w2 with theta^2(component) =
    q^(w2) component, i.e. w2 = 2k for a coordinate word of K-weight
    q^k.  Finitely many keys occur.
    """
    comps: dict[int, AlgebraElement] = {}
    for m, c in x.terms.items():
        w2 = m.col_weight2()
        comps.setdefault(w2, AlgebraElement()).terms[m] = c
    return comps


# ---------------------------------------------------------------------------
# Casimir, twisted commutators, expansion terms
# ---------------------------------------------------------------------------


def casimir() -> AlgebraElement:
    """Central Casimir: F E + (q K^2 + 2 + q^-1 K^-2)/(q - q^-1)^2.

    Equivalently E F + (q^-1 K^2 + 2 + q K^-2)/(q - q^-1)^2; this is
    the inner-term-corrected variant, which commutes with E, F, K.
    """
    inv2 = (_qm1() * _qm1()).inv()
    return AlgebraElement({
        Monomial(0, 0, 0, 0, 1, 0, 1): QSCALAR_ONE,
        Monomial(0, 0, 0, 0, 0, 2, 0): _Q(1) * inv2,
        MONO_ONE: QScalar.from_rational(2) * inv2,
        Monomial(0, 0, 0, 0, 0, -2, 0): _Q(-1) * inv2,
    })


def casimir_printed() -> AlgebraElement:
    """E F + ((q^-1/2 K^2 + q^1/2 K^-2)/(q - q^-1))^2, for comparison.

    This variant fails centrality under the stated relations; the
    defect is computable with centrality_defect.
    """
    inner = gen("K") * gen("K") * QScalar.qpow(Fraction(-1, 2)) \
        + gen("Kinv") * gen("Kinv") * QScalar.qpow(Fraction(1, 2))
    beta = inner.scale(_qm1(-1))
    return gen("E") * gen("F") + beta * beta


def laplace_element() -> AlgebraElement:
    """The abstract Laplacian as an algebra element: C + 1 - 4/(q-q^-1)^2.

    On the spinor representation this is exactly D^2 + 1; the constant
    shift matters for twisted commutators because it fails to commute
    with the twist on elements of nonzero weight.
    """
    inv2 = (_qm1() * _qm1()).inv()
    shift = QSCALAR_ONE - QScalar.from_rational(4) * inv2
    return casimir() + AlgebraElement.one().scale(shift)


def centrality_defect(x: AlgebraElement, cas: AlgebraElement | None = None) -> AlgebraElement:
    if cas is None:
        cas = casimir()
    return cas * x - x * cas


def nabla(x: AlgebraElement, cas: AlgebraElement | None = None) -> AlgebraElement:
    """Twisted commutator  C x - theta^2(x) C  with the Casimir."""
    if cas is None:
        cas = casimir()
    return cas * x - twist_theta(x, 2) * cas


def nabla_mu(x: AlgebraElement, weights: Iterable[int],
             cas: AlgebraElement | None = None) -> AlgebraElement:
    """Iterated weight-projected twisted commutator.

    ``weights`` are integer theta^2-eigenvalue exponents (w.r.t. the
    key convention of weight_decompose): the empty tail means no
    projection; an absent weight yields zero.
    """
    exps = list(weights)
    if not exps:
        raise ValueError("need at least one weight exponent")
    cur = weight_decompose(x).get(exps[0], AlgebraElement.zero())
    for e in exps[1:]:
        cur = weight_decompose(nabla(cur, cas)).get(e, AlgebraElement.zero())
    return cur


def expansion_terms(y: AlgebraElement, n: int,
                    laplacian: AlgebraElement | None = None):
    """Symbolic terms of the complex-power expansion of Delta^z y.

    Returns a list of (coefficient, element, k) triples: coefficient is
    the exact weighted binomial binom(z, k) at the weight tuple of the
    branch (a ZExpr in Z = q^z), element is nabla^mu(y) for that tuple,
    and k the power shift, so that

        Delta^z y  ~  sum coeff * element * Delta^(z-k)  + remainder.

    The twisted commutators are taken against ``laplacian`` (default:
    the spectral Laplacian C + 1 - 4/(q-q^-1)^2, i.e. D^2 + 1).  Using
    the bare Casimir instead would drop the constant-shift commutator
    s (y - theta^2 y) and stall the remainder order.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    lap = laplace_element() if laplacian is None else laplacian
    terms = []
    frontier = []
    for e0, comp in sorted(weight_decompose(y).items()):
        terms.append((mu_binomial_exact(0, (e0,)), comp, 0))
        frontier.append(((e0,), comp))
    for k in range(1, n + 1):
        nxt = []
        for tup, comp in frontier:
            grad = nabla(comp, lap)
            for e, sub in sorted(weight_decompose(grad).items()):
                tup2 = tup + (e,)
                terms.append((mu_binomial_exact(k, tup2), sub, k))
                nxt.append((tup2, sub))
        frontier = nxt
    return terms


# ---------------------------------------------------------------------------
# parsing of the canonical serialization
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(
    r"^\((?P<coef>.*)\)\s*\*\s*(?P<word>[^|]*)\|\s*"
    r"F\^(?P<f>-?\d+)\s+K\^(?P<k>-?\d+)\s+E\^(?P<e>-?\d+)\s*$"
)
_WORD_TOKEN = re.compile(r"([abcd])(?:\^(\d+))?")


def _split_terms(s: str) -> list[str]:
    parts, depth, cur = [], 0, []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and s.startswith(" + ", i):
            parts.append("".join(cur))
            cur = []
            i += 3
            continue
        cur.append(ch)
        i += 1
    parts.append("".join(cur))
    return parts


def parse_element(s: str) -> AlgebraElement:
    """Parse the canonical `(coef) * word | F^i K^j E^k` serialization."""
    out = AlgebraElement()
    for chunk in _split_terms(s.strip()):
        m = _TERM_RE.match(chunk.strip())
        if not m:
            raise ValueError(f"bad term syntax: {chunk!r}")
        coef = parse_scalar(m.group("coef"))
        word = m.group("word").strip()
        exps = {"a": 0, "b": 0, "c": 0, "d": 0}
        if word != "1":
            pos = 0
            for tok in word.split():
                wm = _WORD_TOKEN.fullmatch(tok)
                if not wm:
                    raise ValueError(f"bad word token {tok!r}")
                exps[wm.group(1)] += int(wm.group(2) or 1)
                pos += 1
        if exps["a"] and exps["d"]:
            raise ValueError("word mixes a and d; not in PBW form")
        side = 1 if exps["d"] else 0
        x = exps["d"] if side else exps["a"]
        mono = Monomial(side if x else 0, x, exps["b"], exps["c"],
                        int(m.group("f")), int(m.group("k")), int(m.group("e")))
        if coef.is_zero():
            continue
        cur = out.terms.get(mono)
        out.terms[mono] = coef if cur is None else cur + coef
    out.terms = {m: c for m, c in out.terms.items() if not c.is_zero()}
    return out
