"""Regenerate the published trade-off data and diff it against the embedded tables."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import bounds
from .inactivity import RobustConfig, outage_probability
from .reference import FIGURE_DATA, LEGEND_OUTAGE

FIG2 = dict(N=10, K=30)
FIG3 = dict(N=50, K=100, p=Fraction(1, 10), a_values=(32, 24, 0), t_values=range(2, 31))
FIG2_TOL = 1e-9
FIG3_REL_TOL = 1e-6


@dataclass(frozen=True)
class DiffRow:
    figure: str
    panel: str
    curve: str
    M_ref: float
    R_ref: float
    M: Fraction
    R: Fraction
    deviation: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.deviation <= self.tolerance

    def csv(self) -> list[str]:
        f = bounds.fmt_float
        return [
            self.figure, self.panel, self.curve,
            f(self.M_ref), f(self.R_ref), f(self.M), f(self.R),
            format(self.deviation, ".3e"), format(self.tolerance, ".0e"),
            "ok" if self.ok else "FAIL",
        ]


CSV_HEADER = ["figure", "panel", "curve", "M_ref", "R_ref", "M", "R", "deviation", "tolerance", "status"]


def _rel(x: float, ref: float) -> float:
    return abs(x - ref) / abs(ref) if ref else abs(x)


def fig2_rows() -> list[DiffRow]:
    """Absolute deviation of R on the M = 1, 4/3, ..., 6 grid."""
    N, K = FIG2["N"], FIG2["K"]
    rows = []
    for (fig, panel, name), pts in FIGURE_DATA.items():
        if fig != "fig2":
            continue
        M_exact = [Fraction(m).limit_denominator(K) for m, _ in pts]
        if name in bounds.SCHEME_CURVES:
            # envelope over the corners inside the plotted range only
            ts = sorted({int(M * K / N) for M in M_exact})
            curve = bounds.scheme_curve(name, N, K, ts)
        else:
            curve = bounds.bound_curve(name, N, K, M_exact)
        for (m_s, r_s), M in zip(pts, M_exact):
            R = curve.evaluate(M)
            dev = max(abs(float(R) - float(r_s)), abs(float(M) - float(m_s)))
            rows.append(DiffRow(fig, panel, name, float(m_s), float(r_s), M, R, dev, FIG2_TOL))
    return rows


def fig3_rows() -> list[DiffRow]:
    """Relative deviation of both corner coordinates (M n/m, R n/m), t = 2..30."""
    N, K = FIG3["N"], FIG3["K"]
    ts = list(FIG3["t_values"])
    base_cache: dict[str, dict[int, Fraction]] = {}
    rows = []
    for (fig, panel, name), pts in FIGURE_DATA.items():
        if fig != "fig3":
            continue
        label, a = name.split("@a=")
        a = int(a)
        if label not in base_cache:
            f = bounds.SCHEME_CURVES[label]
            base_cache[label] = {t: f(N, K, t) for t in ts}
        for (m_s, r_s), t in zip(pts, ts):
            cfg = RobustConfig(N, K, t, a, FIG3["p"])
            M = cfg.base_M * cfg.factor
            R = base_cache[label][t] * cfg.factor
            dev = max(_rel(float(M), float(m_s)), _rel(float(R), float(r_s)))
            rows.append(DiffRow(fig, panel, name, float(m_s), float(r_s), M, R, dev, FIG3_REL_TOL))
    return rows


def two_sig(x: float) -> str:
    return format(x, ".1e")


def legend_outages() -> list[tuple[int, Fraction, str, bool]]:
    """(a, exact outage, printed legend value, agreement to 2 significant figures)."""
    out = []
    for a, shown in LEGEND_OUTAGE.items():
        exact = outage_probability(FIG3["K"], FIG3["p"], a)
        out.append((a, exact, shown, float(two_sig(float(exact))) == float(shown)))
    return out


def panel_summary(rows: list[DiffRow]) -> list[tuple[str, str, float, bool]]:
    """(figure, panel, max deviation, all within tolerance) per panel, in input order."""
    groups: dict[tuple[str, str], list[DiffRow]] = {}
    for r in rows:
        groups.setdefault((r.figure, r.panel), []).append(r)
    return [
        (fig, panel, max(r.deviation for r in rs), all(r.ok for r in rs))
        for (fig, panel), rs in groups.items()
    ]
