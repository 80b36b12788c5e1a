"""Weighted zeta functions, residues and the twisted residue trace.

zeta_X(z) = Tr(rho X Delta^(-z/2)) over the spinor columns.  The Delta
spectrum grows geometrically (shell eigenvalue 1 + [l+1/2]_q^2 with
[l+1/2] ~ q^(-l)), so the trace converges for Re z > 0 and the shell
sums are evaluated in log space from the closed-form eigenvalue model,
far beyond any matrix truncation.

The row multiplicity 2l+1 of each shell makes rho = 1 produce a double
pole of zeta_1 at z = 0.  A column-grading power rho = K^p only scales
the two spinor columns and provably leaves the double pole, so simple
poles require a modular-type weight that dampens the row index; the
implemented family rho(p) has weights q^(p(l-i)), whose shell sums
converge to 1/(1-q^p) and give an honest simple pole at z = 0 with

    Res_{z=0} z * zeta_1(z) -> 2 / ((1 - q^p) (-ln q)).

Residues are estimated by Neville extrapolation of s*zeta(s) on a grid
of small s > 0; pole orders by a log-log fit of zeta(s) ~ c * s^(-k).
The residue functional Phi(X) = Res_{z=0} zeta_X(z) is checked to be a
sigma-twisted trace, sigma(X) = rho X rho^{-1}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .spectral import TruncatedRep

__all__ = [
    "RhoSpec",
    "DiagSpec",
    "ShellModel",
    "zeta_partial",
    "zeta_residue",
    "pole_order_probe",
    "twisted_trace_defect",
    "ZetaReport",
]


@dataclass(frozen=True)
class RhoSpec:
    """Weight operator for the zeta trace.

    kind 'one': rho = 1.
    kind 'kcol': rho = K^p in the column grading (weights q^(p j)); the
        2l+1 row degeneracy survives, so zeta_1 keeps its double pole.
    kind 'modular': weights q^(p (l - i)) decaying from the top row;
        shell sums approach 1/(1-q^p) and the pole at 0 becomes simple.
    """

    kind: str = "modular"
    p: int = 2

    def __post_init__(self):
        if self.kind not in ("one", "kcol", "modular"):
            raise ValueError(f"unknown rho kind {self.kind!r}")
        if self.kind == "modular" and self.p <= 0:
            raise ValueError("modular rho needs p > 0")

    def row_sum(self, l2: int, q: float) -> float:
        """Sum of the row weights over a shell of spin l."""
        if self.kind == "modular":
            return (1.0 - q ** (self.p * (l2 + 1))) / (1.0 - q ** self.p)
        return l2 + 1.0  # 2l + 1 rows

    def col_exponent(self) -> int:
        return self.p if self.kind == "kcol" else 0

    def diag_vector(self, rep: TruncatedRep) -> np.ndarray:
        """Rho diagonal on an explicit truncated basis."""
        if self.kind == "one":
            return np.ones(rep.dim)
        if self.kind == "kcol":
            return rep.kcol_diag(self.p)
        return rep.q ** (0.5 * self.p * (rep.l2 - rep.i2))

    def label(self) -> str:
        if self.kind == "one":
            return "rho=1"
        return f"rho={self.kind}(p={self.p})"


@dataclass
class DiagSpec:
    """Symbolic diagonal operator on the spinor columns.

    kpow terms are column K-powers (sum of coef * K^m); ``finite``
    optionally adds per-shell scalars supported on finitely many
    shells (keyed by 2l).  These cover the zeta test operators exactly
    at any cutoff.
    """

    kpow: dict[int, float] = field(default_factory=dict)
    finite: dict[int, float] = field(default_factory=dict)

    @staticmethod
    def identity() -> "DiagSpec":
        return DiagSpec(kpow={0: 1.0})

    @staticmethod
    def kpower(m: int, coef: float = 1.0) -> "DiagSpec":
        return DiagSpec(kpow={m: coef})

    @staticmethod
    def zero() -> "DiagSpec":
        return DiagSpec()

    @staticmethod
    def finitely_supported(data: dict[int, float]) -> "DiagSpec":
        return DiagSpec(finite=dict(data))

    def __mul__(self, other: "DiagSpec") -> "DiagSpec":
        if self.finite or other.finite:
            if self.kpow or other.kpow:
                raise ValueError("mixed finite/kpow products are not supported")
            out = {}
            for l2, v in self.finite.items():
                if l2 in other.finite:
                    out[l2] = v * other.finite[l2]
            return DiagSpec(finite=out)
        out = {}
        for m1, c1 in self.kpow.items():
            for m2, c2 in other.kpow.items():
                out[m1 + m2] = out.get(m1 + m2, 0.0) + c1 * c2
        return DiagSpec(kpow=out)

    def is_zero(self) -> bool:
        return not self.kpow and not self.finite

    def shell_sum(self, l2: int, rho: RhoSpec, q: float) -> float:
        """Rho-weighted diagonal sum over the spinor shell of spin l."""
        rows = rho.row_sum(l2, q)
        pc = rho.col_exponent()
        acc = 0.0
        for m, coef in self.kpow.items():
            e = 0.5 * (m + pc)
            acc += coef * (q ** e + q ** (-e))
        if l2 in self.finite:
            e = 0.5 * pc
            acc += self.finite[l2] * (q ** e + q ** (-e))
        return rows * acc


class MeasuredDiag:
    """Shell sums measured from an explicit matrix, with geometric tail.

    Used for operators that are not symbolic diagonals; the tail model
    is a least-squares geometric fit of the last measured shells, and
    its residual is surfaced as a model error, never silently.
    """

    def __init__(self, X: sp.spmatrix, rep: TruncatedRep, rho: RhoSpec,
                 fit_window: int = 6):
        rd = rho.diag_vector(rep)
        diag = np.real(sp.csr_matrix(X).diagonal()) * rd
        self.q = rep.q
        self.sums: dict[int, float] = {}
        for l2 in rep.shells():
            if l2 > 2 * (rep.L - rep.B):
                continue
            cols = rep.shell_columns(l2)
            self.sums[l2] = float(diag[cols].sum())
        ls = sorted(self.sums)
        window = [l2 for l2 in ls[-fit_window:] if abs(self.sums[l2]) > 0]
        self.tail_ratio = 0.0
        self.model_err = 0.0
        if len(window) >= 3:
            xs = np.array(window, dtype=float)
            ys = np.log(np.abs([self.sums[l2] for l2 in window]))
            A = np.vstack([xs, np.ones_like(xs)]).T
            sol, *_ = np.linalg.lstsq(A, ys, rcond=None)
            self.tail_ratio = math.exp(2 * sol[0])  # per shell step (l2 += 2)
            fit = A @ sol
            self.model_err = float(np.max(np.abs(np.exp(fit) - np.abs(
                [self.sums[l2] for l2 in window]))))
            self.sign = math.copysign(1.0, self.sums[window[-1]])
        self.lmax2 = ls[-1] if ls else 0

    def shell_sum(self, l2: int, rho: RhoSpec, q: float) -> float:
        if l2 in self.sums:
            return self.sums[l2]
        if self.tail_ratio <= 0:
            return 0.0
        steps = (l2 - self.lmax2) // 2
        return self.sums[self.lmax2] * self.tail_ratio ** steps


def _loglam(l2: np.ndarray, q: float) -> np.ndarray:
    """log(1 + [l+1/2]^2), stable for arbitrarily large shells."""
    x = 0.5 * l2 + 0.5
    if q == 1.0:
        return np.log(1.0 + x ** 2)
    lnq = math.log(q)
    # log [x] = -x log q + log(1 - q^(2x)) - log(q^-1 - q)
    lognum = np.log1p(-np.exp(2 * x * lnq))
    logqn = -x * lnq + lognum - math.log(1.0 / q - q)
    return 2.0 * logqn + np.log1p(np.exp(-2.0 * logqn))


@dataclass
class ShellModel:
    """Closed-form spinor shell data for the zeta sums."""

    q: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("zeta shell model requires 0 < q < 1")

    def spinor_shells(self, Lz: int) -> np.ndarray:
        return np.arange(1, 2 * Lz + 1, 2, dtype=np.int64)

    def loglam(self, l2: np.ndarray) -> np.ndarray:
        return _loglam(l2.astype(float), self.q)


def zeta_partial(X, rho: RhoSpec, z: complex, model: ShellModel,
                 Lz: int = 400, tol: float | None = 1e-8):
    """Partial zeta sum with a geometric tail bound.

    Returns (value, tail_bound).  Requires Re z > 0.  Raises when the
    tail ratio reaches 1 (non-convergent) or, if ``tol`` is given, when
    the bound cannot be pushed below it by enlarging the cutoff.
    """
    z = complex(z)
    if z.real <= 0:
        raise ValueError("zeta partial sums require Re z > 0")
    q = model.q
    for attempt in range(8):
        l2s = model.spinor_shells(Lz)
        w = np.array([X.shell_sum(int(l2), rho, q) for l2 in l2s])
        logl = model.loglam(l2s)
        terms = w * np.exp(-0.5 * z * logl)
        value = complex(terms.sum())
        # per-step decay of |terms| near the cutoff
        tailmag = np.abs(terms[-3:])
        if np.all(tailmag == 0.0):
            return value, 0.0
        ratio = float(tailmag[-1] / tailmag[-2]) if tailmag[-2] else 1.0
        if ratio >= 0.999:
            raise ValueError("zeta tail is not geometric; Re z too small "
                             "or weights non-decaying")
        bound = float(tailmag[-1]) * ratio / (1.0 - ratio) * 1.5
        if tol is None or bound <= tol * max(abs(value), 1.0):
            return value, bound
        Lz *= 2
        if Lz > 2 * 10 ** 5:
            raise ValueError(f"tail bound {bound:.2e} exceeds tolerance at "
                             f"maximal cutoff")
    raise ValueError("tail bound did not converge")


def pole_order_probe(X, rho: RhoSpec, model: ShellModel, s_grid=None,
                     Lz: int = 400, floor: float = 1e-12):
    """Fit zeta(s) ~ c s^(-k) on the grid; returns (k, uncertainty, fit).

    Identically vanishing partial sums give k = 0 (regular point).
    """
    if s_grid is None:
        s_grid = (0.4, 0.3, 0.2, 0.15, 0.1)
    vals = []
    for s in s_grid:
        v, _ = zeta_partial(X, rho, s, model, Lz)
        vals.append(abs(v))
    vals = np.array(vals)
    if np.all(vals < floor):
        return 0.0, 0.0, {"values": vals.tolist(), "note": "zero partial sums"}
    xs = np.log(np.array(s_grid))
    ys = np.log(np.maximum(vals, floor))
    A = np.vstack([xs, np.ones_like(xs)]).T
    sol, *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - A @ sol
    se = float(np.sqrt((resid @ resid) / max(len(xs) - 2, 1)) /
               math.sqrt(float(((xs - xs.mean()) ** 2).sum())))
    quality = float(np.max(np.abs(resid)))
    return -float(sol[0]), max(se, quality), {
        "values": vals.tolist(), "s_grid": list(s_grid), "max_resid": quality}


def zeta_residue(X, rho: RhoSpec, model: ShellModel, s_grid=None,
                 Lz: int = 400, pole_guard: float = 1.5):
    """Richardson/Neville estimate of lim_{s->0+} s zeta(s).

    Valid as Res_{z=0} when the pole is simple; a fitted pole order
    above ``pole_guard`` raises (higher-order pole), mirroring the
    divergence of the extrapolation table.
    """
    if s_grid is None:
        s_grid = (0.4, 0.3, 0.2, 0.15, 0.1)
    k, kerr, _ = pole_order_probe(X, rho, model, s_grid, Lz)
    fs = []
    tails = []
    for s in s_grid:
        v, tb = zeta_partial(X, rho, s, model, Lz)
        fs.append(s * v.real)
        tails.append(s * tb)
    if k > pole_guard:
        raise ValueError(
            f"extrapolation divergent: fitted pole order {k:.2f} "
            "(higher-order pole; see pole_order_probe)")
    xs = np.array(s_grid, dtype=float)
    table = [list(fs)]
    m = len(fs)
    for j in range(1, m):
        prev = table[-1]
        row = []
        for i in range(m - j):
            num = (xs[i] * prev[i + 1] - xs[i + j] * prev[i])
            row.append(num / (xs[i] - xs[i + j]))
        table.append(row)
    est = table[-1][0]
    err = abs(table[-1][0] - table[-2][0]) if m > 1 else 0.0
    err += max(tails)
    return est, err, {"pole_order": k, "pole_order_err": kerr,
                      "f_values": fs, "s_grid": list(s_grid)}


def twisted_trace_defect(X, Y, rho: RhoSpec, model: ShellModel,
                         s_grid=None, Lz: int = 400,
                         rep: TruncatedRep | None = None,
                         floor: float = 1e-10):
    """Relative defect |Phi(XY) - Phi(Y sigma(X))| of the twisted trace.

    X, Y may be DiagSpec (sigma acts trivially: diagonals commute) or
    explicit matrices on ``rep`` (sigma conjugates by the rho diagonal;
    shell sums are measured, tails fitted).
    """
    if isinstance(X, DiagSpec) and isinstance(Y, DiagSpec):
        XY = X * Y
        YsX = Y * X
        r1, e1, _ = zeta_residue(XY, rho, model, s_grid, Lz)
        r2, e2, _ = zeta_residue(YsX, rho, model, s_grid, Lz)
    else:
        if rep is None:
            raise ValueError("matrix operands need a TruncatedRep")
        Xm = X if sp.issparse(X) else sp.csr_matrix(X)
        Ym = Y if sp.issparse(Y) else sp.csr_matrix(Y)
        rd = rho.diag_vector(rep)
        sX = sp.diags(rd) @ Xm @ sp.diags(1.0 / rd)
        m1 = MeasuredDiag(sp.csr_matrix(Xm @ Ym), rep, rho)
        m2 = MeasuredDiag(sp.csr_matrix(Ym @ sX), rep, rho)
        r1, e1, _ = zeta_residue(m1, rho, model, s_grid, Lz=rep_cutoff(rep))
        r2, e2, _ = zeta_residue(m2, rho, model, s_grid, Lz=rep_cutoff(rep))
    scale = max(abs(r1), abs(r2), floor)
    return abs(r1 - r2) / scale, {"phi_xy": r1, "phi_ysx": r2,
                                  "err": e1 + e2}


def rep_cutoff(rep: TruncatedRep) -> int:
    return int(rep.L - rep.B)


@dataclass
class ZetaReport:
    """Residue estimates with provenance and plot-ready grids."""

    q: float
    rho: str
    entries: list = field(default_factory=list)
    grids: list = field(default_factory=list)

    def add_entry(self, name: str, **kw):
        self.entries.append({"name": name, **kw})

    def add_grid(self, name: str, s_grid, values, tails):
        self.grids.append({
            "name": name,
            "rows": [
                {"s": float(s), "zeta": float(v), "s_zeta": float(s * v),
                 "tail_bound": float(t)}
                for s, v, t in zip(s_grid, values, tails)
            ],
        })

    def to_json(self) -> str:
        return json.dumps(
            {"schema": "twisted-psido-report/1", "q": self.q,
             "rho": self.rho, "entries": self.entries, "grids": self.grids},
            indent=2, sort_keys=True)

    def csv_rows(self):
        rows = [("name", "s", "zeta", "s_zeta", "tail_bound")]
        for g in self.grids:
            for r in g["rows"]:
                rows.append((g["name"], r["s"], r["zeta"], r["s_zeta"],
                             r["tail_bound"]))
        return rows
