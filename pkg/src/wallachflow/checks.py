"""Acceptance checks, shared by the test suite and ``wallachflow verify``.

Each check returns a :class:`CheckResult` holding the measured quantities
next to the pass/fail verdict. Timing is kept out of ``details`` so reports
are deterministic; it is reported separately.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import (
    Ordering,
    fit_tail_exponent,
    integrate_tail,
    ordering_vs_curve,
    predicted_exponent,
)
from .curvature import (
    Sign,
    kahler_residual,
    principal_ricci,
    rho_residuals,
    sample_boundary_curve,
    scalar_curvature,
    submersion_critical_points,
)
from .equilibria import (
    classify_equilibrium,
    disjointness_certificate,
    q_point,
    singular_points,
    transversality_l3,
    transversality_r1,
)
from .fields import field_w
from .integrator import X_BOUNDS, IntegrationOptions, integrate_w, integrate_x
from .space import (
    Metric3,
    PhasePoint,
    SpaceParams,
    from_scale_invariant,
    in_omega,
    make_space,
    normalize_volume,
    to_scale_invariant,
)
from .sweep import SweepSpec, below_kahler, grid_points, ricci_retention, run_sweep

WALLACH_A = ("1/9", "1/8", "1/6")

# reference roots (t*, w1*, w2*) of the tangency problem on r1
REFERENCE_Q_POINTS = {
    "1/9": (0.389089209, 3.364907691, 8.648165018),
    "1/8": (0.361437711, 3.166087521, 8.759704438),
    "1/6": (0.2094305850, 2.125323812, 10.14810617),
}


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)
    elapsed: float = 0.0
    budget: float = math.inf

    @property
    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        extra = "" if not self.failures else " | " + "; ".join(self.failures)
        return f"[{verdict}] {self.number:2d} {self.name} ({self.elapsed:.2f}s / {self.budget:g}s){extra}"


class _Recorder:
    def __init__(self, number: int, name: str, budget: float):
        self.result = CheckResult(number, name, True, budget=budget)
        self._t0 = time.perf_counter()

    def expect(self, ok: bool, message: str) -> bool:
        if not ok:
            self.result.passed = False
            self.result.failures.append(message)
        return ok

    def done(self) -> CheckResult:
        self.result.elapsed = time.perf_counter() - self._t0
        if self.result.elapsed > self.result.budget:
            self.expect(False, f"runtime {self.result.elapsed:.1f}s over budget {self.result.budget:g}s")
        return self.result


def _round(x: float, digits: int = 12) -> float:
    return float(f"{x:.{digits}g}")


# --- 1 -----------------------------------------------------------------------


def check_q_points(tol: float = 1e-6) -> CheckResult:
    rec = _Recorder(1, "Q-point golden values", 1.0)
    for a, ref in REFERENCE_Q_POINTS.items():
        rep = q_point(make_space(a))
        got = (rep.t_star, rep.q_point.w1, rep.q_point.w2)
        rec.result.details[a] = {"computed": [_round(v) for v in got], "reference": list(ref), "n_roots": len(rep.roots)}
        rec.expect(rep.unique, f"a={a}: {len(rep.roots)} roots")
        for label, g, r in zip(("t*", "w1*", "w2*"), got, ref):
            rec.expect(abs(g - r) <= tol, f"a={a} {label}={g:.10g} vs {r} (|diff|={abs(g - r):.2e})")
    t16 = q_point(make_space("1/6")).t_star
    closed = 1.0 - math.sqrt(10.0) / 4.0
    rec.expect(abs(t16 - closed) <= 1e-12, f"a=1/6 t*-(1-sqrt(10)/4)={t16 - closed:.2e}")
    return rec.done()


# --- 2 -----------------------------------------------------------------------


def check_equilibria() -> CheckResult:
    rec = _Recorder(2, "Equilibrium structure", 1.0)
    for a in WALLACH_A:
        s = make_space(a)
        pts = singular_points(s)
        distinct = len({(round(p.w1, 12), round(p.w2, 12)) for p in pts}) == 4
        rec.expect(distinct, f"a={a}: singular points not distinct")
        for k, p in enumerate(pts):
            norm = math.hypot(*field_w(s, p))
            rec.expect(norm <= 1e-12, f"a={a} E{k}: |field|={norm:.2e}")
            report = classify_equilibrium(s, p)
            ev = report.eigenvalues
            r = principal_ricci(s, normalize_volume(from_scale_invariant(p)))
            spread = max(r) - min(r)
            rec.expect(spread <= 1e-10, f"a={a} E{k}: Ricci spread {spread:.2e}")
            if k == 0:
                lam = 1.0 - 4.0 * s.a
                ok = all(abs(complex(e) - lam) <= 1e-12 for e in ev) and lam > 0
                rec.expect(ok and report.classification == "UnstableNode", f"a={a} E0: {ev}")
            else:
                prod = (complex(ev[0]) * complex(ev[1])).real
                rec.expect(prod < 0 and report.classification == "Saddle", f"a={a} E{k}: product {prod:.3g}")
        rec.result.details[a] = [str(classify_equilibrium(s, p).classification) for p in pts]
    return rec.done()


# --- 3, 4 --------------------------------------------------------------------


def _sweep_check(number, name, cases, region, jobs, budget, expect_boundary) -> CheckResult:
    rec = _Recorder(number, name, budget)
    for a in cases:
        spec = SweepSpec(make_space(a), region, (10, 10), margin=1e-2, horizon=100.0)
        res = run_sweep(spec, jobs=jobs)
        summ = res.summary
        rec.result.details[a] = summ
        rec.expect(summ["n_starts"] > 0, f"a={a}: empty grid")
        rec.expect(summ["n_exited"] == summ["n_starts"], f"a={a}: {summ['n_exited']}/{summ['n_starts']} exited")
        rec.expect(summ["n_reentered"] == 0, f"a={a}: {summ['n_reentered']} re-entries")
        rec.expect(summ["n_errors"] == 0, f"a={a}: {summ['n_errors']} errors")
        bad = [c for c in summ["exit_curves"] if c not in expect_boundary]
        rec.expect(not bad, f"a={a}: exits through {bad}")
    return rec.done()


def check_sectional_exit_sweep(jobs: int | None = None) -> CheckResult:
    return _sweep_check(3, "Sectional exit sweep (D)", WALLACH_A, "D", jobs, 120.0, ("s1", "s2", "s3"))


def check_ricci_exit_sweep(jobs: int | None = None) -> CheckResult:
    return _sweep_check(4, "Ricci exit sweep (R)", ("1/8", "1/9"), "R", jobs, 120.0, ("r1", "r2", "r3"))


# --- 5 -----------------------------------------------------------------------


OMEGA_STARTS = tuple(PhasePoint(w1, w1 * f) for w1 in (1.1, 1.5, 2.0, 3.0, 5.0) for f in (1.2, 2.0, 5.0))


def _tail_opts() -> IntegrationOptions:
    return IntegrationOptions(state_bounds=(1e-12, 1e14), t_max=1e3)


def check_ricci_dichotomy(jobs: int | None = None) -> CheckResult:
    rec = _Recorder(5, "Ricci dichotomy in a", 120.0)
    # a = 0.10: exit from R, tails over r1
    s = make_space("1/10")
    spec = SweepSpec(s, "R", (5, 5), margin=1e-2, horizon=100.0)
    res = run_sweep(spec, jobs=jobs)
    rec.result.details["0.1"] = {"sweep": res.summary}
    rec.expect(res.summary["n_starts"] > 0 and res.summary["n_exited"] == res.summary["n_starts"],
               f"a=0.1: {res.summary['n_exited']}/{res.summary['n_starts']} exited R")
    verdicts = {}
    for a in ("1/10", "1/5", "3/10"):
        s = make_space(a)
        expected = Ordering.OVER if s.a < 1 / 6 else Ordering.UNDER
        counts: dict[str, int] = {}
        for p in OMEGA_STARTS:
            tr = integrate_tail(s, p, until=1e-6, opts=_tail_opts())
            o = ordering_vs_curve(s, tr, 1.0, 1.0 / (2.0 * s.a))
            counts[str(o)] = counts.get(str(o), 0) + 1
            rec.expect(o is expected, f"a={a} start {p.as_tuple()}: {o}")
        verdicts[a] = dict(sorted(counts.items()))
        if s.a > 1 / 6:
            kept = 0
            for p in OMEGA_STARTS:
                r = ricci_retention(s, p, IntegrationOptions(t_max=100.0))
                kept += r.retained
                rec.expect(r.retained, f"a={a} start {p.as_tuple()}: ricci positive not retained")
            rec.result.details[a] = {"retained": kept, "n": len(OMEGA_STARTS)}
    rec.result.details["ordering"] = verdicts
    return rec.done()


# --- 6 -----------------------------------------------------------------------


def check_kahler_side_invariance() -> CheckResult:
    rec = _Recorder(6, "Ricci invariance below the Kahler curve (a=1/6)", 60.0)
    s = make_space("1/6")
    spec = SweepSpec(s, "R", (10, 5), margin=1e-2, horizon=50.0, constraint="below_kahler")
    starts = grid_points(spec)
    rec.expect(len(starts) == 50, f"{len(starts)} starts instead of 50")
    rec.expect(all(in_omega(p) and below_kahler(p) for p in starts), "start outside the Kahler sector")
    kept = 0
    for p in starts:
        r = ricci_retention(s, p, IntegrationOptions(t_max=50.0))
        ok = r.retained and r.first_positive_time == 0.0
        kept += ok
        rec.expect(ok, f"start {p.as_tuple()}: ricci not Positive throughout")
    worst = 0.0
    for w1 in (1.25, 1.5, 1.8):
        p = PhasePoint(w1, w1 / (w1 - 1.0))
        tr = integrate_w(s, p, IntegrationOptions(t_max=50.0))
        _, ys = tr.dense(8)
        worst = max(worst, max(abs(kahler_residual(PhasePoint(*map(float, y)))) for y in ys))
    rec.expect(worst <= 1e-7, f"Kahler residual {worst:.2e}")
    rec.result.details = {"n_starts": len(starts), "retained": kept, "max_kahler_residual_ok": worst <= 1e-7}
    return rec.done()


# --- 7 -----------------------------------------------------------------------


def random_unit_metrics(n: int, seed: int, sigma: float = 0.5) -> list[Metric3]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        x = np.exp(rng.normal(0.0, sigma, 3))
        out.append(normalize_volume(Metric3(*map(float, x))))
    return out


def check_first_integral(seed: int = 2024) -> CheckResult:
    rec = _Recorder(7, "First integral and scalar monotonicity", 30.0)
    opts = IntegrationOptions(rel_tol=1e-10, abs_tol=1e-12, t_max=20.0, state_bounds=X_BOUNDS)
    for name, a in zip(("W24", "W12", "W6"), WALLACH_A):
        s = make_space(a)
        worst_vol, worst_dS = 0.0, math.inf
        for m in random_unit_metrics(20, seed):
            tr = integrate_x(s, m, opts)
            _, ys = tr.dense(4)
            vol = float(np.max(np.abs(np.prod(ys, axis=1) - 1.0)))
            S = np.array([scalar_curvature(s, Metric3(*map(float, y))) for y in ys])
            dS = float(np.min(np.diff(S)))
            worst_vol = max(worst_vol, vol)
            worst_dS = min(worst_dS, dS)
        rec.expect(worst_vol <= 1e-8, f"{name}: volume drift {worst_vol:.2e}")
        rec.expect(worst_dS >= -1e-9, f"{name}: scalar decrease {worst_dS:.2e}")
        rec.result.details[a] = {"volume_ok": worst_vol <= 1e-8, "scalar_ok": worst_dS >= -1e-9}
    return rec.done()


# --- 8 -----------------------------------------------------------------------


def check_tail_exponent() -> CheckResult:
    rec = _Recorder(8, "Asymptotic exponent", 60.0)
    for a in ("1/9", "1/8"):
        s = make_space(a)
        tr = integrate_tail(s, (1.5, 2.0), until=1e-4)
        fit = fit_tail_exponent(tr)
        alpha = predicted_exponent(s)
        rel = abs(fit.alpha_hat - alpha) / alpha
        rec.result.details[a] = {"alpha_hat": _round(fit.alpha_hat, 6), "alpha": alpha}
        rec.expect(rel <= 0.1, f"a={a}: alpha_hat={fit.alpha_hat:.4f} vs {alpha}")
    u = np.geomspace(1e-4, 1e-3, 50)
    for alpha in (0.5, 1.0, 2.0):
        fit = fit_tail_exponent((1.0 + u, 3.0 * u ** (-alpha)), threshold=1e-3)
        rec.expect(abs(fit.alpha_hat - alpha) <= 1e-9, f"synthetic alpha={alpha}: {fit.alpha_hat!r}")
    return rec.done()


# --- 9 -----------------------------------------------------------------------


def s3_omega_samples(space: SpaceParams, count: int = 100) -> list[PhasePoint]:
    cs = sample_boundary_curve(space, "s3", (1.0 + 1e-3, 4.0 / 3.0 - 1e-3), count)
    return [p for p in cs.points if in_omega(p)]


def check_transversality() -> CheckResult:
    rec = _Recorder(9, "Transversality identities", 10.0)
    for a in WALLACH_A:
        s = make_space(a)
        pts = s3_omega_samples(s)
        rec.expect(len(pts) == 100, f"a={a}: {len(pts)} s3 samples")
        worst = 0.0
        for p in pts:
            tr = transversality_l3(s, p)
            rel = abs(tr.inner_product - tr.factored) / max(abs(tr.factored), 1e-300)
            worst = max(worst, rel)
            rec.expect(tr.inner_product < 0, f"a={a} {p.as_tuple()}: (V, grad l3) = {tr.inner_product:.3g}")
        rec.expect(worst <= 1e-9, f"a={a}: relative mismatch {worst:.2e}")
        t_star = q_point(s).t_star
        lo, hi = transversality_r1(s, t_star - 0.01), transversality_r1(s, t_star + 0.01)
        rec.expect(lo.sign < 0 and hi.sign > 0, f"a={a}: signs {lo.sign}, {hi.sign} around t*")
        for t in (t_star - 0.01, t_star + 0.01):
            tr = transversality_r1(s, t)
            rec.expect(abs(tr.inner_product - tr.factored) <= 1e-9 * abs(tr.factored), f"a={a} t={t}: r1 mismatch")
        rec.result.details[a] = {"n_s3": len(pts), "r1_signs": [lo.sign, hi.sign]}
    return rec.done()


# --- 10 ----------------------------------------------------------------------


def check_geometry() -> CheckResult:
    rec = _Recorder(10, "Geometry certificates", 10.0)
    a_grid = np.linspace(1 / 9, 0.5, 400, endpoint=False)
    cert = max(disjointness_certificate(float(a)) for a in a_grid)
    rec.expect(cert < 0, f"certificate max {cert:.3g}")
    min_rho = math.inf
    w1_star = []
    for a in WALLACH_A:
        s = make_space(a)
        cs = sample_boundary_curve(s, "s3", (1.0 + 1e-6, 50.0), 5000, spacing="log")
        min_rho = min(min_rho, min(abs(rho_residuals(s, p)[0]) for p in cs.points))
        w1_star.append(q_point(s).q_point.w1)
    rec.expect(min_rho > 0.01, f"min |rho1| on s3 = {min_rho:.3g}")
    rec.expect(max(w1_star) < 6.0, f"max w1* = {max(w1_star):.6g}")
    crit = submersion_critical_points(make_space("1/6"))
    kinds = [(round(x, 6), kind) for x, kind in crit]
    ok = (
        len(crit) == 2
        and abs(crit[0][0] - 1.0) <= 1e-6 and crit[0][1] == "min"
        and abs(crit[1][0] - 2.0) <= 1e-6 and crit[1][1] == "max"
    )
    rec.expect(ok, f"submersion critical points {kinds}")
    rec.result.details = {"min_rho1_on_s3": _round(min_rho, 6), "max_w1_star": _round(max(w1_star), 9), "submersion": kinds}
    return rec.done()


# --- 11 ----------------------------------------------------------------------


def polyline_distance(points: np.ndarray, line: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Distance from each row of ``points`` to the polyline through ``line``."""
    a, b = line[:-1], line[1:]
    ab = b - a
    den = np.einsum("ij,ij->i", ab, ab)
    den = np.where(den > 0, den, 1.0)
    out = np.empty(len(points))
    for i in range(0, len(points), chunk):
        p = points[i : i + chunk, None, :]
        s = np.clip(np.einsum("kij,ij->ki", p - a, ab) / den, 0.0, 1.0)
        d = p - (a + s[..., None] * ab)
        out[i : i + chunk] = np.sqrt(np.min(np.einsum("kij,kij->ki", d, d), axis=1))
    return out


def cross_system_distance(space: SpaceParams, m: Metric3, w_box: float = 50.0, t_max: float = 20.0) -> float:
    """Largest distance from the w-image of the 3D orbit to the direct w-orbit.

    Both curves are cut to the box ``1/w_box <= w1, w2 <= w_box``. Orbits
    leave every compact set, in ``w`` either towards infinity or towards 0,
    and outside the box absolute distances lose meaning.
    """
    opts = IntegrationOptions(t_max=t_max, state_bounds=X_BOUNDS)
    tx = integrate_x(space, m, opts)
    _, xs = tx.dense(8)
    img = np.column_stack([xs[:, 2] / xs[:, 0], xs[:, 2] / xs[:, 1]])
    tw = integrate_w(space, to_scale_invariant(m), IntegrationOptions(t_max=t_max))
    _, ws = tw.dense(16)
    img = img[np.all((img <= w_box) & (img >= 1.0 / w_box), axis=1)]
    ws = ws[np.all((ws <= 1.05 * w_box) & (ws >= 0.95 / w_box), axis=1)]
    return float(np.max(polyline_distance(img, ws)))


def check_cross_system(seed: int = 11) -> CheckResult:
    rec = _Recorder(11, "Cross-system consistency", 30.0)
    for name, a in zip(("W24", "W12", "W6"), WALLACH_A):
        s = make_space(a)
        worst = max(cross_system_distance(s, m) for m in random_unit_metrics(10, seed))
        rec.expect(worst <= 1e-5, f"{name}: curve distance {worst:.2e}")
        rec.result.details[a] = {"distance_ok": worst <= 1e-5}
    return rec.done()


FAST = (check_q_points, check_equilibria, check_transversality, check_geometry)
FULL = FAST + (
    check_sectional_exit_sweep,
    check_ricci_exit_sweep,
    check_ricci_dichotomy,
    check_kahler_side_invariance,
    check_first_integral,
    check_tail_exponent,
    check_cross_system,
)


def run_checks(level: str = "fast", jobs: int | None = None) -> list[CheckResult]:
    suite = {"fast": FAST, "full": FULL}[level]
    results = []
    for fn in suite:
        if "jobs" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
            results.append(fn(jobs=jobs))
        else:
            results.append(fn())
    return sorted(results, key=lambda r: r.number)
