"""Verification suites wiring the exact engine against the numerics.

Each suite returns a list of CheckResult rows; run_suite aggregates
them into a SuiteReport.  Checks carry a status out of pass/fail/flag:
flagged rows document expected anomalies (the printed-Casimir defect,
the double pole at rho = 1, the divergent literal K-column twist) and
do not fail the run.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from . import algebra as alg
from . import mucalc as mu
from . import spectral as spec
from . import zeta as zt
from .algebra import AlgebraElement, Monomial, gen
from .scalars import QSCALAR_ONE, QScalar, qq

SUITES = ("mucalc", "hopf", "spectrum", "expansion", "regularity", "zeta")

DEFAULT_TOLS = {
    "interior": 1e-12,       # represented relation residuals
    "casimir": 1e-10,        # D^2 vs Casimir scalar/shell-independence
    "spectrum": 1e-10,       # classical Dirac spectrum match at q=1
    "order_delta": 0.05,     # analytic order of Delta powers
    "order": 0.10,           # other analytic-order slacks
    "elliptic": 0.05,        # elliptic-constant stabilization
    "lead": 1e-8,            # leading expansion term match
    "order_drop": 0.8,       # required remainder-order decrease per n
    "stability": 0.10,       # regularity norm stability across cutoffs
    "pole": 0.2,             # pole-order fit slack
    "defect": 1e-3,          # twisted-trace defect
    "vanish": 1e-6,          # residue on finitely supported operators
    "contour": 1e-8,         # contour oracle vs closed form
}


@dataclass
class RunConfig:
    q: float = 0.5
    q_str: str = "1/2"
    cutoff: Fraction = Fraction(21, 2)
    buffer: int = 2
    depth: int = 2
    jmax: Fraction = Fraction(4)
    rho_exp: int = 2
    seed: int = 0
    out: str | None = None
    format: str = "json"
    suites: tuple[str, ...] = SUITES
    parallel: bool = False
    strip_timings: bool = False
    tols: dict = field(default_factory=lambda: dict(DEFAULT_TOLS))

    def validate(self):
        if not 0.0 < self.q <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {self.q}")
        if self.cutoff < Fraction(5, 2):
            raise ValueError("cutoff must be at least 5/2")
        if self.buffer < 1:
            raise ValueError("buffer must be at least 1")
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")
        for name, v in self.tols.items():
            if name not in DEFAULT_TOLS:
                raise ValueError(f"unknown tolerance {name!r}")
            if v <= 0:
                raise ValueError(f"tolerance {name} must be positive")
        for s in self.suites:
            if s not in SUITES:
                raise ValueError(f"unknown suite {s!r}")
        return self


@dataclass
class CheckResult:
    name: str
    status: str             # pass | fail | flag
    measured: float | str
    tolerance: float | str
    provenance: str         # paper | derived | trivial | artifact
    seconds: float = 0.0
    details: dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    config: dict
    checks: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)

    def add(self, check: CheckResult):
        self.checks.append(check)

    @property
    def failures(self):
        return [c for c in self.checks if c.status == "fail"]

    @property
    def flagged(self):
        return [c for c in self.checks if c.status == "flag"]

    def to_dict(self, strip_timings: bool = False) -> dict:
        rows = []
        for c in self.checks:
            row = {
                "name": c.name, "status": c.status,
                "measured": c.measured, "tolerance": c.tolerance,
                "provenance": c.provenance, "details": c.details,
            }
            if not strip_timings:
                row["seconds"] = round(c.seconds, 4)
            rows.append(row)
        return {
            "schema": "twisted-psido-report/1",
            "config": self.config,
            "checks": rows,
            "summary": {
                "total": len(self.checks),
                "failed": len(self.failures),
                "flagged": len(self.flagged),
            },
        }


def _check(report, name, ok, measured, tol, provenance, t0, flag=False, **details):
    status = "flag" if flag else ("pass" if ok else "fail")
    report.add(CheckResult(name, status, measured, tol, provenance,
                           time.perf_counter() - t0, details))
    return status != "fail"


# ---------------------------------------------------------------------------
# mucalc suite
# ---------------------------------------------------------------------------


def _zexpr_at_zero(expr: mu.ZExpr) -> QScalar:
    from .scalars import QSCALAR_ZERO
    acc = QSCALAR_ZERO
    for (d, e), c in expr.terms.items():
        if d == 0:
            acc = acc + c
    return acc


def run_mucalc(cfg: RunConfig, report: SuiteReport):
    rng = random.Random(cfg.seed)
    tol = cfg.tols

    t0 = time.perf_counter()
    bad = 0
    for _ in range(500):
        n = rng.randint(1, 6)
        exps = tuple(rng.sample(range(-6, 7), n + 1))
        lhs = mu.mu_binomial_exact(n, exps).shift_z()
        rhs = mu.mu_binomial_exact(n, exps).scale(qq(exps[0])) \
            + mu.mu_binomial_exact(n - 1, exps[1:])
        if not (lhs - rhs).is_zero():
            bad += 1
    _check(report, "mucalc.pascal_identity_500", bad == 0, bad, 0, "paper", t0,
           trials=500)

    t0 = time.perf_counter()
    ok = True
    for n in range(0, 5):
        got = mu.mu_binomial_exact(n, (0,) * (n + 1))
        want = mu.ZExpr.one()
        for i in range(n):
            fac = mu.ZExpr({(1, 0): QSCALAR_ONE,
                            (0, 0): QScalar.from_rational(-i)})
            want = want * fac.scale(QScalar.from_rational(Fraction(1, i + 1)))
        ok &= (got - want).is_zero()
    _check(report, "mucalc.standard_binomial_specialization", ok,
           "exact" if ok else "mismatch", "exact", "paper", t0)

    t0 = time.perf_counter()
    ok = True
    for n in range(1, 5):
        got = mu.mu_binomial_exact(n, tuple(range(n + 1)))
        want = mu.ZExpr.one()
        for i in range(n):
            # (1 - q^(z-i)) / (1 - q^(i+1)) = (1 - q^(-i) Z)/(1 - q^(i+1))
            num = mu.ZExpr({(0, 0): QSCALAR_ONE, (0, 1): -qq(-i)})
            want = want * num.scale((QSCALAR_ONE - qq(i + 1)).inv())
        ok &= (got - want).is_zero()
    _check(report, "mucalc.gaussian_binomial_specialization", ok,
           "exact" if ok else "mismatch", "exact", "paper", t0)

    t0 = time.perf_counter()
    ok = True
    for _ in range(40):
        n = rng.randint(1, 5)
        exps = rng.sample(range(-6, 7), n + 1)
        base = mu.mu_binomial_exact(n, tuple(exps))
        shuf = exps[:]
        rng.shuffle(shuf)
        ok &= (base - mu.mu_binomial_exact(n, tuple(shuf))).is_zero()
    _check(report, "mucalc.permutation_symmetry", ok,
           "exact" if ok else "mismatch", "exact", "derived", t0)

    t0 = time.perf_counter()
    okb = mu.mu_binomial_exact(0, (3,)) == mu.ZExpr.Zpow(3)
    for _ in range(20):
        n = rng.randint(1, 6)
        exps = tuple(rng.sample(range(-6, 7), n + 1))
        okb &= _zexpr_at_zero(mu.mu_binomial_exact(n, exps)).is_zero()
    _check(report, "mucalc.boundary_values", okb,
           "exact" if okb else "mismatch", "exact", "paper", t0)

    t0 = time.perf_counter()
    worst = 0.0
    for z in (-0.7, -1.3, -2.5):
        for n in range(1, 5):
            muv = tuple(cfg.q ** k for k in range(n + 1))
            got = mu.contour_mu_cauchy_oracle(z, muv, 1.7)
            want = mu.mu_binomial_numeric(z, n, muv) * 1.7 ** (z - n)
            worst = max(worst, abs(got.value - want) / max(abs(want), 1e-300))
    _check(report, "mucalc.contour_oracle_grid", worst <= tol["contour"],
           worst, tol["contour"], "derived", t0, grid="3x4")

    t0 = time.perf_counter()
    zs = np.linspace(-2.5, 2.5, 21)
    vals = [abs(mu.mu_binomial_numeric(complex(z), 2, (1.0, cfg.q, cfg.q ** 2)))
            for z in zs]
    jumps = max(abs(vals[i + 1] - vals[i]) for i in range(len(vals) - 1))
    finite = all(np.isfinite(vals))
    _check(report, "mucalc.entirety_proxy", finite, jumps, "finite",
           "paper", t0, flag=not finite)


# ---------------------------------------------------------------------------
# hopf suite
# ---------------------------------------------------------------------------

_GEN_NAMES = ("a", "b", "c", "d", "E", "F", "K", "Kinv")


def _random_element(rng, nterms=2, maxlen=2) -> AlgebraElement:
    acc = AlgebraElement.zero()
    for _ in range(nterms):
        m = AlgebraElement.one().scale(
            Fraction(rng.randint(-3, 3) or 1, rng.randint(1, 2)))
        for _ in range(rng.randint(0, maxlen)):
            m = m * gen(rng.choice(_GEN_NAMES))
        acc = acc + m
    return acc


def _random_coordinate(rng, nterms=2, maxlen=2) -> AlgebraElement:
    acc = AlgebraElement.zero()
    for _ in range(nterms):
        m = AlgebraElement.one().scale(Fraction(rng.randint(-2, 2) or 1))
        for _ in range(rng.randint(0, maxlen)):
            m = m * gen(rng.choice(("a", "b", "c", "d")))
        acc = acc + m
    return acc


def _coassociativity_defect(u: AlgebraElement) -> bool:
    """(Delta x id) Delta == (id x Delta) Delta, expanded to three legs."""
    T = alg.coproduct(u)
    left: dict = {}
    right: dict = {}
    for (ml, mr), c in T.terms.items():
        for (m1, m2), c2 in alg.coproduct(
                AlgebraElement.from_monomial(ml)).terms.items():
            key = (m1, m2, mr)
            cur = left.get(key)
            s = c * c2 if cur is None else cur + c * c2
            left[key] = s
        for (m1, m2), c2 in alg.coproduct(
                AlgebraElement.from_monomial(mr)).terms.items():
            key = (ml, m1, m2)
            cur = right.get(key)
            s = c * c2 if cur is None else cur + c * c2
            right[key] = s
    keys = set(left) | set(right)
    from .scalars import QSCALAR_ZERO
    for k in keys:
        if not (left.get(k, QSCALAR_ZERO) - right.get(k, QSCALAR_ZERO)).is_zero():
            return False
    return True


def run_hopf(cfg: RunConfig, report: SuiteReport):
    rng = random.Random(cfg.seed + 1)

    t0 = time.perf_counter()
    bad = 0
    for _ in range(200):
        x, y, z = (_random_element(rng) for _ in range(3))
        if not ((x * y) * z == x * (y * z)):
            bad += 1
    _check(report, "hopf.associativity_200_triples", bad == 0, bad, 0,
           "derived", t0)

    t0 = time.perf_counter()
    ok = all(_coassociativity_defect(gen(g)) for g in ("E", "F", "K"))
    for _ in range(6):
        u = _random_element(rng, 2, 2)
        u = AlgebraElement({m: c for m, c in u.terms.items()
                            if m.word_degree == 0}) + gen("E") * gen("F")
        ok &= _coassociativity_defect(u)
    _check(report, "hopf.coassociativity", ok, "exact" if ok else "mismatch",
           "exact", "paper", t0)

    t0 = time.perf_counter()
    ok = True
    for g in ("E", "F", "K", "Kinv"):
        h = gen(g)
        T = alg.coproduct(h)
        lft = AlgebraElement.zero()
        rgt = AlgebraElement.zero()
        for (ml, mr), c in T.terms.items():
            lft = lft + AlgebraElement.from_monomial(
                mr, c * alg.counit(AlgebraElement.from_monomial(ml)))
            rgt = rgt + AlgebraElement.from_monomial(
                ml, c * alg.counit(AlgebraElement.from_monomial(mr)))
        ok &= (lft == h) and (rgt == h)
    _check(report, "hopf.counit_laws", ok, "exact" if ok else "mismatch",
           "exact", "paper", t0)

    t0 = time.perf_counter()
    ok = True
    for _ in range(20):
        h = gen(rng.choice(("E", "F", "K")))
        x = _random_coordinate(rng) + gen("a")
        y = _random_coordinate(rng) + gen("b")
        lhs = alg.act(h, x * y)
        rhs = AlgebraElement.zero()
        for (ml, mr), c in alg.coproduct(h).terms.items():
            rhs = rhs + alg.act(AlgebraElement.from_monomial(ml, c), x) \
                * alg.act(AlgebraElement.from_monomial(mr), y)
        ok &= lhs == rhs
    _check(report, "hopf.module_algebra_law", ok,
           "exact" if ok else "mismatch", "exact", "paper", t0)

    t0 = time.perf_counter()
    ok = True
    for g in ("E", "F", "K"):
        for xn in ("a", "b", "c", "d"):
            h, x = gen(g), gen(xn)
            rhs = AlgebraElement.zero()
            for (ml, mr), c in alg.coproduct(h).terms.items():
                rhs = rhs + alg.act(AlgebraElement.from_monomial(ml, c), x) \
                    * AlgebraElement.from_monomial(mr)
            ok &= h * x == rhs
    _check(report, "hopf.crossed_relation", ok, "exact" if ok else "mismatch",
           "exact", "paper", t0)

    t0 = time.perf_counter()
    ok = all(alg.centrality_defect(gen(g)).is_zero() for g in ("E", "F", "K"))
    _check(report, "hopf.corrected_casimir_central", ok,
           "exact zero" if ok else "nonzero", "exact", "derived", t0)

    t0 = time.perf_counter()
    dp = alg.centrality_defect(gen("E"), alg.casimir_printed())
    _check(report, "hopf.printed_casimir_defect", True,
           f"{len(dp.terms)} terms", "nonzero (documented erratum)",
           "derived", t0, flag=True, nonzero=not dp.is_zero())

    t0 = time.perf_counter()
    ok = True
    worst = -1
    C = alg.casimir()
    basis = []
    for f in range(4):
        for e in range(4 - f):
            basis.append(Monomial(0, 1, 1, 0, f, 1, e))
            basis.append(Monomial(1, 1, 0, 2, f, -1, e))
            basis.append(Monomial(0, 0, 0, 0, f, 0, e))
    for m in basis:
        x = AlgebraElement.from_monomial(m)
        dx = C * x - alg.twist_theta(x, 2) * C
        bound = alg.filtration_order(x) + 1
        o = alg.filtration_order(dx)
        if o != alg.NEG_INF:
            ok &= o <= bound
            worst = max(worst, o - bound)
    _check(report, "hopf.twisted_commutator_order_bound", ok, worst, 0,
           "paper", t0, basis_size=len(basis))

    t0 = time.perf_counter()
    DC = alg.coproduct(C) - alg.TensorElement.of(gen("K") * gen("K"), C)
    o2 = DC.second_leg_order()
    _check(report, "hopf.casimir_coproduct_second_leg", o2 <= 1, o2, 1,
           "paper", t0)

    t0 = time.perf_counter()
    ok = True
    for _ in range(20):
        x, y = _random_element(rng), _random_element(rng)
        if x.is_zero() or y.is_zero():
            continue
        diff = alg.twist_theta(x * y, 2) \
            - alg.twist_theta(x, 2) * alg.twist_theta(y, 2)
        bound = alg.filtration_order(x) + alg.filtration_order(y) - 1
        ok &= diff.is_zero() or alg.filtration_order(diff) <= bound
    _check(report, "hopf.graded_automorphism", ok,
           "exact" if ok else "violated", "ord drop >= 1", "paper", t0)

    t0 = time.perf_counter()
    ok = True
    for _ in range(15):
        x = _random_element(rng)
        comps = alg.weight_decompose(x)
        resum = AlgebraElement.zero()
        for w2, comp in comps.items():
            resum = resum + comp
            ok &= alg.twist_theta(comp, 2) == comp.scale(qq(w2))
        ok &= resum == x
    _check(report, "hopf.weight_decomposition_direct_sum", ok,
           "exact" if ok else "mismatch", "exact", "paper", t0)

    t0 = time.perf_counter()
    ok = (gen("E").star() == gen("F")) and (gen("F").star() == gen("E")) \
        and (gen("K").star() == gen("K"))
    for _ in range(15):
        x, y = _random_element(rng), _random_element(rng)
        ok &= (x * y).star() == y.star() * x.star()
    _check(report, "hopf.star_antimultiplicative", ok,
           "exact" if ok else "mismatch", "exact", "paper", t0)

    t0 = time.perf_counter()
    ok = True
    for _ in range(30):
        x = _random_element(rng, 3, 3)
        ok &= alg.normal_form(x) == x
    _check(report, "hopf.normal_form_idempotent", ok,
           "exact" if ok else "mismatch", "exact", "derived", t0)

    t0 = time.perf_counter()
    ok = True
    for _ in range(20):
        x = _random_element(rng, 3, 3)
        ok &= alg.parse_element(str(x)) == x
    _check(report, "hopf.serialization_round_trip", ok,
           "exact" if ok else "mismatch", "exact", "artifact", t0)


# ---------------------------------------------------------------------------
# spectrum suite (relations, spectra, orders, elliptic estimates)
# ---------------------------------------------------------------------------


def _pershell_relative(R: sp.spmatrix, refs, rep) -> float:
    """max over interior shells of ||R P_l|| / max(1, max_ref ||ref P_l||)."""
    worst = 0.0
    prof_r = {l2: v for (l2, _, v) in spec.shell_profile(R, rep)}
    prof_refs = [
        {l2: v for (l2, _, v) in spec.shell_profile(sp.csr_matrix(M), rep)}
        for M in refs]
    for l2, v in prof_r.items():
        scale = max([p.get(l2, 0.0) for p in prof_refs] + [1.0])
        worst = max(worst, v / scale)
    return worst


def relation_residuals(rep: spec.TruncatedRep) -> dict[str, float]:
    """Residuals of the defining relations, transported to matrices.

    Coordinate-algebra relations are O(1) operators and measured in
    absolute operator norm on the interior domain; relations involving
    the ladders E, F grow like the shell eigenvalues and are measured
    per shell relative to the size of their terms.
    """
    q = rep.q
    Ma, Mb, Mc, Md = (rep.letters[x] for x in "abcd")
    E, F = rep.ladder_E, rep.ladder_F
    K = sp.diags(rep.kcol_diag(1))
    Ki = sp.diags(rep.kcol_diag(-1))
    I = sp.identity(rep.dim, format="csr")
    dom = rep.domain_mask()
    out = {}

    def absn(M):
        return spec.operator_norm(sp.csr_matrix(M), dom)

    out["ab=qba"] = absn(Ma @ Mb - q * Mb @ Ma)
    out["ac=qca"] = absn(Ma @ Mc - q * Mc @ Ma)
    out["bc=cb"] = absn(Mb @ Mc - Mc @ Mb)
    out["bd=qdb"] = absn(Mb @ Md - q * Md @ Mb)
    out["cd=qdc"] = absn(Mc @ Md - q * Md @ Mc)
    out["ad-qbc=1"] = absn(Ma @ Md - q * Mb @ Mc - I)
    out["da-bc/q=1"] = absn(Md @ Ma - Mb @ Mc / q - I)
    out["unitarity"] = absn(Ma.T @ Ma + Mc.T @ Mc - I)
    out["KE=qEK"] = _pershell_relative(
        sp.csr_matrix(K @ E - q * E @ K), [E @ K], rep)
    gmat = (K @ K - Ki @ Ki) / (q - 1.0 / q) if q != 1.0 else sp.csr_matrix(
        (rep.dim, rep.dim))
    if q == 1.0:
        # classical limit: [E, F] = H with H = diag(2j)
        gmat = sp.diags(rep.j2.astype(float))
    out["EF-FE=g"] = _pershell_relative(
        sp.csr_matrix(E @ F - F @ E - gmat), [E @ F, I], rep)
    rt = q ** 0.5
    out["crossed:E.a"] = _pershell_relative(
        sp.csr_matrix(E @ Ma - rt * Ma @ E), [E @ Ma, I], rep)
    out["crossed:F.a"] = _pershell_relative(
        sp.csr_matrix(F @ Ma - rt * Ma @ F - Mb @ Ki), [F @ Ma, I], rep)
    out["crossed:E.b"] = _pershell_relative(
        sp.csr_matrix(E @ Mb - Mb @ E / rt - Ma @ Ki), [E @ Mb, I], rep)
    out["crossed:F.c"] = _pershell_relative(
        sp.csr_matrix(F @ Mc - rt * Mc @ F - Md @ Ki), [F @ Mc, I], rep)
    return out


def run_spectrum(cfg: RunConfig, report: SuiteReport):
    tol = cfg.tols
    t0 = time.perf_counter()
    rep = spec.build_rep(cfg.q, cfg.cutoff, cfg.buffer, cfg.jmax)
    res = relation_residuals(rep)
    worst = max(res.values())
    _check(report, "spectrum.relation_residuals", worst <= tol["interior"],
           worst, tol["interior"], "derived", t0, residuals=res)

    t0 = time.perf_counter()
    ok = bool(np.all(rep.lam >= 1.0))
    _check(report, "spectrum.delta_strictly_positive", ok,
           float(rep.lam.min()), ">= 1", "paper", t0)

    t0 = time.perf_counter()
    K = sp.diags(rep.kcol_diag(1))
    D = sp.diags(rep.delta_power(1.0))
    comm = spec.operator_norm(sp.csr_matrix(K @ D - D @ K),
                              rep.domain_mask())
    lamscale = float(rep.lam.max())
    _check(report, "spectrum.K_commutes_with_delta",
           comm / lamscale <= tol["interior"], comm / lamscale,
           tol["interior"], "trivial", t0)

    t0 = time.perf_counter()
    rep1 = spec.build_rep(1.0, cfg.cutoff, cfg.buffer, cfg.jmax)
    rows = spec.spectrum_rows(rep1)
    err = max(abs(ev - (w / abs(w)) * (l + 0.5)) for (l, m, w, ev) in rows)
    mult_ok = True
    for l2 in rep1.shells():
        n_plus = sum(1 for (l, m, w, ev) in rows if 2 * l == l2 and w > 0)
        mult_ok &= n_plus == l2 + 1
    _check(report, "spectrum.classical_dirac_q1", err <= tol["spectrum"]
           and mult_ok, err, tol["spectrum"], "derived", t0)
    report.artifacts["spectrum_rows"] = spec.spectrum_rows(rep)

    t0 = time.perf_counter()
    if cfg.q < 1.0:
        evs = [spec.qnum(0.5 * l2 + 0.5, cfg.q) for l2 in rep.shells()]
        ratio = evs[-1] / evs[-2]
        _check(report, "spectrum.qinteger_growth", True,
               float(ratio), f"~ {1.0 / cfg.q}", "derived", t0,
               note="recorded from the build, not asserted a priori")
    t0 = time.perf_counter()
    tab = spec.dirac_squared_vs_casimir(rep)
    ok = tab["offdiag_rel"] <= tol["casimir"] \
        and tab["variation_rel"] <= tol["casimir"]
    _check(report, "spectrum.dirac_squared_vs_casimir", ok,
           max(tab["offdiag_rel"], tab["variation_rel"]), tol["casimir"],
           "derived", t0,
           predicted=tab["predicted"],
           constant_abs_err=tab["constant_abs_err_resolvable"])

    # --- elliptic / order checks -------------------------------------
    Lmax = cfg.cutoff
    sched = sorted({Fraction(10), Fraction(15), min(Fraction(20), Lmax), Lmax})
    sched = [L for L in sched if L <= Lmax] or [Lmax]
    t0 = time.perf_counter()
    worst = 0.0
    orders = {}
    for k in (-2, -1, 0, 1, 2):
        est = spec.analytic_order_estimate(
            lambda r, kk=k: sp.diags(r.delta_power(0.5 * kk)),
            sched, q=cfg.q, B=cfg.buffer, jmax=cfg.jmax)
        orders[k] = est.order
        worst = max(worst, abs(est.order - k))
    _check(report, "spectrum.delta_power_orders", worst <= tol["order_delta"],
           worst, tol["order_delta"], "trivial", t0, orders=orders)

    t0 = time.perf_counter()
    estE = spec.analytic_order_estimate(lambda r: r.ladder_E, sched,
                                        q=cfg.q, B=cfg.buffer, jmax=cfg.jmax)
    estF = spec.analytic_order_estimate(lambda r: r.ladder_F, sched,
                                        q=cfg.q, B=cfg.buffer, jmax=cfg.jmax)
    worst = max(estE.order, estF.order)
    _check(report, "spectrum.ladder_orders_at_most_one",
           worst <= 1.0 + tol["order"], worst, 1.0 + tol["order"],
           "derived", t0, E=estE.order, F=estF.order)

    t0 = time.perf_counter()
    stab = {}
    ok = True
    for name, builder in (("E", lambda r: r.ladder_E),
                          ("F", lambda r: r.ladder_F)):
        consts = spec.elliptic_constant(builder, 1, sched, q=cfg.q,
                                        B=cfg.buffer, jmax=cfg.jmax)
        stab[name] = consts["rel_spread"]
        ok &= consts["rel_spread"] <= tol["elliptic"]
    _check(report, "spectrum.elliptic_constants_stable", ok,
           max(stab.values()), tol["elliptic"], "derived", t0, spreads=stab)

    t0 = time.perf_counter()
    if cfg.q < 1.0:
        def discrep(r):
            Ma = r.letters["a"]
            conj = sp.diags(r.delta_power(0.5)) @ Ma @ sp.diags(
                r.delta_power(-0.5))
            return conj - (r.q ** 0.5) * Ma

        est = spec.analytic_order_estimate(discrep, sched, q=cfg.q,
                                           B=cfg.buffer, jmax=cfg.jmax)
        _check(report, "spectrum.twist_discrepancy_order",
               est.order <= -1.0 + tol["order"], est.order,
               -1.0 + tol["order"], "paper", t0, uncertainty=est.uncertainty)

    t0 = time.perf_counter()
    sob = {
        "identity_t0": spec.sobolev_norm(
            sp.identity(rep.dim, format="csr"), 0.0, 0.0, rep),
        "sqrt_delta_t1_s-2": spec.sobolev_norm(
            sp.diags(rep.delta_power(0.5)), -2.0, 1.0, rep),
        "sqrt_delta_t1_s2": spec.sobolev_norm(
            sp.diags(rep.delta_power(0.5)), 2.0, 1.0, rep),
    }
    ok = abs(sob["identity_t0"] - 1.0) <= 1e-12 and \
        abs(sob["sqrt_delta_t1_s-2"] - 1.0) <= 1e-12 and \
        abs(sob["sqrt_delta_t1_s2"] - 1.0) <= 1e-12
    _check(report, "spectrum.sobolev_norm_identities", ok,
           max(abs(v - 1.0) for v in sob.values()), 1e-12, "trivial", t0,
           values=sob)


# ---------------------------------------------------------------------------
# expansion suite
# ---------------------------------------------------------------------------


def run_expansion(cfg: RunConfig, report: SuiteReport):
    tol = cfg.tols
    z = -1.0
    L = max(cfg.cutoff, Fraction(15))
    sched = sorted({Fraction(10), L})
    rep = spec.build_rep(cfg.q, L, cfg.buffer, cfg.jmax)
    depths = list(range(cfg.depth + 1))
    for name, y in (("K", gen("K")), ("E", gen("E")), ("a", gen("a"))):
        t0 = time.perf_counter()
        qnorms = []
        orders = []
        est = None
        for n in depths:
            Q, est, info = spec.expansion_remainder(y, z, n, rep,
                                                    cutoffs=sched)
            qn = spec.operator_norm(Q, rep.domain_mask())
            qnorms.append(qn)
            orders.append(est.order)
        zero_floor = 1e-12
        if max(qnorms) <= zero_floor:
            _check(report, f"expansion.remainder_{name}", True,
                   max(qnorms), zero_floor, "derived", t0,
                   note="expansion terminates; remainder identically zero",
                   flag=(name == "E"), orders=orders)
        else:
            drops = [orders[i] - orders[i + 1] for i in range(len(orders) - 1)]
            ok = all(d >= tol["order_drop"] for d in drops)
            _check(report, f"expansion.remainder_{name}", ok,
                   min(drops) if drops else 0.0, tol["order_drop"],
                   "derived", t0, orders=orders, norms=qnorms,
                   predicted_plain=info["predicted_order_plain"],
                   predicted_with_m=info["predicted_order_with_m"])

        t0 = time.perf_counter()
        terms = alg.expansion_terms(y, 0)
        lead = sp.csr_matrix((rep.dim, rep.dim))
        for coeff, elem, k in terms:
            cz = coeff.evaluate(z, rep.q)
            lead = lead + cz * (spec.represent(elem, rep)
                                @ sp.diags(rep.delta_power(z)))
        direct = spec.represent(alg.twist_theta(y, 2 * z), rep) \
            @ sp.diags(rep.delta_power(z))
        resid = spec.operator_norm(sp.csr_matrix(lead - direct),
                                   rep.domain_mask())
        _check(report, f"expansion.leading_term_{name}",
               resid <= tol["lead"], resid, tol["lead"], "paper", t0)


# ---------------------------------------------------------------------------
# regularity suite
# ---------------------------------------------------------------------------


def run_regularity(cfg: RunConfig, report: SuiteReport):
    tol = cfg.tols
    Lhi = cfg.cutoff
    lo = Fraction(15) if Lhi > Fraction(15) \
        else max(Fraction(11, 2), Lhi - Fraction(5))
    sched = sorted({lo, Lhi})
    gens = {"ab": gen("a") * gen("b"), "cd": gen("c") * gen("d"),
            "bc": gen("b") * gen("c")}
    data: dict = {}
    for L in sched:
        rep = spec.build_rep(cfg.q, L, cfg.buffer, cfg.jmax)
        for nm, x in gens.items():
            X = spec.represent(x, rep)
            comm = sp.csr_matrix(rep.dirac @ X - X @ rep.dirac)
            nc = spec.operator_norm(comm, rep.domain_mask())
            _, nx = spec.delta_theta_iterate(X, 3, rep, twist="shell")
            _, ncm = spec.delta_theta_iterate(comm, 3, rep, twist="shell")
            data.setdefault(nm, {})[L] = [nc] + nx + ncm
    for nm in gens:
        t0 = time.perf_counter()
        series = data[nm]
        vals = list(series.values())
        finite = all(np.isfinite(v).all() for v in np.array(vals))
        if len(vals) >= 2:
            lo, hi = np.array(vals[0]), np.array(vals[-1])
            denom = np.maximum(np.abs(hi), 1e-30)
            drift = float(np.max(np.abs(hi - lo) / denom))
        else:
            drift = 0.0
        ok = finite and drift <= tol["stability"]
        _check(report, f"regularity.iterates_{nm}", ok, drift,
               tol["stability"], "derived", t0,
               cutoffs=[str(L) for L in series],
               norms={str(L): [float(v) for v in series[L]] for L in series},
               flag=len(vals) < 2)

    # document the literal K-column twist blow-up (why it is not the probe)
    t0 = time.perf_counter()
    rep = spec.build_rep(cfg.q, sched[-1], cfg.buffer, cfg.jmax)
    X = spec.represent(gens["bc"], rep)
    _, nk = spec.delta_theta_iterate(X, 3, rep, twist="kcol")
    growing = nk[-1] > 10 * max(nk[0], 1e-30)
    _check(report, "regularity.kcol_twist_divergence", True,
           float(nk[-1] / max(nk[0], 1e-30)), "divergent (documented)",
           "derived", t0, flag=True, norms=[float(v) for v in nk],
           note="literal K-column twist is not an admissible extension; "
                "iterates grow, so the probe uses the shell twist")


# ---------------------------------------------------------------------------
# zeta suite
# ---------------------------------------------------------------------------


def run_zeta(cfg: RunConfig, report: SuiteReport):
    tol = cfg.tols
    if cfg.q >= 1.0:
        t0 = time.perf_counter()
        _check(report, "zeta.skipped_q1", True, "q=1",
               "geometric spectrum needed", "artifact", t0, flag=True)
        return
    rng = random.Random(cfg.seed + 2)
    model = zt.ShellModel(cfg.q)
    one = zt.DiagSpec.identity()
    rho1 = zt.RhoSpec("one")
    rho_mod = zt.RhoSpec("modular", cfg.rho_exp)
    rho_kcol = zt.RhoSpec("kcol", cfg.rho_exp)
    s_grid = (0.4, 0.3, 0.2, 0.15, 0.1)

    t0 = time.perf_counter()
    k1, e1, f1 = zt.pole_order_probe(one, rho1, model, s_grid)
    _check(report, "zeta.pole_order_rho1", abs(k1 - 2.0) <= tol["pole"],
           k1, f"2.0 +- {tol['pole']}", "paper", t0, fit_err=e1)
    t0 = time.perf_counter()
    _check(report, "zeta.double_pole_flagged_rho1", True, k1,
           "double pole (flagged)", "paper", t0, flag=True)

    t0 = time.perf_counter()
    km, em, fm = zt.pole_order_probe(one, rho_mod, model, s_grid)
    _check(report, "zeta.pole_order_modular", abs(km - 1.0) <= tol["pole"],
           km, f"1.0 +- {tol['pole']}", "paper", t0, fit_err=em,
           rho=rho_mod.label())

    t0 = time.perf_counter()
    kk, ek, fk = zt.pole_order_probe(one, rho_kcol, model, s_grid)
    _check(report, "zeta.kcol_rho_still_double", True, kk,
           "literal K^p keeps the double pole (documented deviation)",
           "derived", t0, flag=True, fit_err=ek)

    t0 = time.perf_counter()
    sep = abs(k1 - km)
    _check(report, "zeta.pole_order_separation", sep >= 0.6, sep, 0.6,
           "derived", t0)

    t0 = time.perf_counter()
    r, err, diag = zt.zeta_residue(one, rho_mod, model, s_grid)
    pred = 2.0 / ((1.0 - cfg.q ** cfg.rho_exp) * (-math.log(cfg.q)))
    rel = abs(r - pred) / pred
    _check(report, "zeta.residue_vs_geometric_model", rel <= 1e-3,
           rel, 1e-3, "derived", t0, residue=r, predicted=pred,
           reported_err=err)

    t0 = time.perf_counter()
    ok = True
    try:
        zt.zeta_residue(one, rho1, model, s_grid)
        ok = False
    except ValueError:
        pass
    _check(report, "zeta.rho1_extrapolation_divergent", ok,
           "raised" if ok else "no divergence", "must raise", "paper", t0)

    t0 = time.perf_counter()
    worst = 0.0
    pairs = [(zt.DiagSpec.kpower(2), zt.DiagSpec.kpower(-2))]
    for _ in range(4):
        X = zt.DiagSpec.kpower(rng.randint(-3, 3),
                               rng.choice([0.5, 1.0, -0.75, 2.0]))
        Y = zt.DiagSpec.kpower(rng.randint(-3, 3),
                               rng.choice([1.0, -1.5, 0.25]))
        pairs.append((X, Y))
    defects = []
    for X, Y in pairs:
        d, info = zt.twisted_trace_defect(X, Y, rho_mod, model, s_grid)
        defects.append(d)
        worst = max(worst, d)
    _check(report, "zeta.twisted_trace_defect_5_pairs",
           worst <= tol["defect"], worst, tol["defect"], "derived", t0,
           defects=defects)

    t0 = time.perf_counter()
    fin = zt.DiagSpec.finitely_supported({1: 1.0, 5: -2.0, 9: 0.5})
    small_grid = (0.05, 0.02, 0.01, 0.005, 0.002)
    r0, e0, _ = zt.zeta_residue(fin, rho_mod, model, small_grid)
    _check(report, "zeta.residue_vanishes_finite_support",
           abs(r0) <= tol["vanish"], abs(r0), tol["vanish"], "paper", t0,
           reported_err=e0)

    t0 = time.perf_counter()
    zsample = 1.5
    a1, _ = zt.zeta_partial(zt.DiagSpec.kpower(2), rho_mod, zsample, model)
    a2, _ = zt.zeta_partial(zt.DiagSpec.kpower(-1), rho_mod, zsample, model)
    combo = zt.DiagSpec(kpow={2: 0.3, -1: -1.7})
    a3, _ = zt.zeta_partial(combo, rho_mod, zsample, model)
    lin = abs(0.3 * a1 - 1.7 * a2 - a3) / max(abs(a3), 1e-30)
    _check(report, "zeta.linearity", lin <= 1e-12, lin, 1e-12, "trivial", t0)

    t0 = time.perf_counter()
    grids = []
    vals, tails = [], []
    for s in s_grid:
        v, tb = zt.zeta_partial(one, rho_mod, s, model)
        vals.append(v.real)
        tails.append(tb)
    zrep = zt.ZetaReport(cfg.q, rho_mod.label())
    zrep.add_grid("identity_modular", s_grid, vals, tails)
    report.artifacts["zeta_grids"] = zrep.csv_rows()
    ratio = vals[-1] / vals[-2]
    _check(report, "zeta.partial_sums_recorded", True, ratio, "recorded",
           "artifact", t0, flag=False)


_RUNNERS = {
    "mucalc": run_mucalc,
    "hopf": run_hopf,
    "spectrum": run_spectrum,
    "expansion": run_expansion,
    "regularity": run_regularity,
    "zeta": run_zeta,
}


class SuiteExecutionError(RuntimeError):
    def __init__(self, suite, check, original):
        super().__init__(f"internal numerical failure in {suite}.{check}: "
                         f"{original}")
        self.suite = suite
        self.check = check


def run_suite(cfg: RunConfig) -> SuiteReport:
    cfg.validate()
    report = SuiteReport(config={
        "q": cfg.q_str, "cutoff": str(cfg.cutoff), "buffer": cfg.buffer,
        "depth": cfg.depth, "jmax": str(cfg.jmax), "rho_exp": cfg.rho_exp,
        "seed": cfg.seed, "suites": list(cfg.suites),
        "tolerances": {k: cfg.tols[k] for k in sorted(cfg.tols)},
    })
    for name in cfg.suites:
        runner = _RUNNERS[name]
        try:
            runner(cfg, report)
        except Exception as ex:  # noqa: BLE001 - surfaced with exit code 3
            last = report.checks[-1].name if report.checks else "(start)"
            raise SuiteExecutionError(name, last, ex) from ex
    return report
