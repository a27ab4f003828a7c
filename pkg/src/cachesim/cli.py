"""Command-line front end: simulate, bounds, converse, inactivity, repro.

CSV goes to stdout (or ``--out``); cross-check verdicts go to stderr. The
exit status is 1 when any cross-check fails, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

from . import bounds, converse, repro
from .combinatorics import as_fraction, demands_of_type, enumerate_compositions
from .delivery import DecodeError, decode_all, serialize_log, transmit_all
from .inactivity import RobustConfig, robust_place_and_deliver, tradeoff_curve_inactivity
from .placement import (
    ScenarioError,
    memory_sharing_parts,
    smallest_sharing_F,
    store_from_files,
    file_bits,
    man_placement,
)

fmt = bounds.fmt_float


@dataclass
class Checks:
    failures: list[str] = field(default_factory=list)

    def expect(self, ok: bool, what: str) -> bool:
        if not ok:
            self.failures.append(what)
        return ok

    @property
    def status(self) -> int:
        return 1 if self.failures else 0


# --------------------------------------------------------------------------
# Configuration


def read_config(path: str) -> dict[str, str]:
    """key=value lines; '#' starts a comment. Keys use the long flag names."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def parse_demand(text: str) -> tuple[int, ...] | str:
    text = text.strip()
    if text in ("worst", "average", "all"):
        return text
    return tuple(int(x) for x in text.replace(" ", "").split(","))


def parse_int_list(text: str) -> list[int]:
    """"1,3,5", "2:30" (inclusive) or a mix such as "0,24,32"."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi = part.split(":")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _emit(rows: list[list], header: list[str] | None, out: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    w.writerows(rows)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# --------------------------------------------------------------------------
# simulate


@dataclass
class SimOutcome:
    demand: tuple[int, ...]
    load: Fraction
    formula: Fraction
    counts: dict[int, int]
    decoded: dict[int, bool]
    one_shot: bool
    wire: bytes


def simulate_demand(N: int, K: int, M: Fraction, F: int, d, seed: int) -> SimOutcome:
    """Run placement and delivery (memory-shared when KM/N is fractional)."""
    parts = memory_sharing_parts(N, K, M, F)
    files = [file_bits(seed, q, F) for q in range(1, N + 1)]
    total_bits = 0
    formula = Fraction(0)
    counts = {k: 0 for k in range(1, K + 1)}
    rebuilt = {k: 0 for k in range(1, K + 1)}
    ok = {k: True for k in range(1, K + 1)}
    one_shot = True
    wire = []
    for part in parts:
        sc = part.scenario
        mask = (1 << sc.F) - 1
        store = store_from_files(sc, [(f >> part.bit_offset) & mask for f in files])
        cache = man_placement(sc, store)
        log = transmit_all(sc, d, store)
        wire.append(serialize_log(log))
        total_bits += log.total_bits
        formula += part.weight * bounds.d2d_per_demand(K, sc.t, d)
        for i, n in log.counts().items():
            counts[i] += n
        for k in range(1, K + 1):
            try:
                res = decode_all(k, log, cache)
            except DecodeError:
                ok[k] = False
                continue
            one_shot &= res.one_shot()
            rebuilt[k] |= res.bits << part.bit_offset
    decoded = {k: ok[k] and rebuilt[k] == files[d[k - 1] - 1] for k in range(1, K + 1)}
    return SimOutcome(tuple(d), Fraction(total_bits, F), formula, counts, decoded, one_shot, b"".join(wire))


def _demands_for(mode, N: int, K: int):
    if mode == "worst":
        return [bounds.worst_case_demand(N, K)], None
    if mode == "all":
        return list(product(range(1, N + 1), repeat=K)), None
    if mode == "average":
        comps = enumerate_compositions(N, K)
        return [demands_of_type(s)[0] for s, _ in comps], [c for _, c in comps]
    return [tuple(mode)], None


def cmd_simulate(args) -> int:
    N, K = args.N, args.K
    if args.M is None:
        raise ScenarioError("simulate needs -M")
    M = as_fraction(args.M)
    t = Fraction(K) * M / N
    if t.denominator != 1 and not args.envelope:
        raise ScenarioError(f"t = KM/N = {t} is not an integer; pass --envelope for memory sharing")
    F = args.F if args.F else smallest_sharing_F(N, K, M)
    demands, weights = _demands_for(args.demand, N, K)
    checks = Checks()
    outcomes = []
    for d in demands:
        if len(d) != K:
            raise ValueError(f"demand {d} has length {len(d)}, expected K={K}")
        outcomes.append(simulate_demand(N, K, M, F, d, args.seed))

    lines = [f"scenario N={N} K={K} M={M} t={t} F={F} seed={args.seed}"]
    for o in outcomes:
        tag = ",".join(map(str, o.demand))
        checks.expect(all(o.decoded.values()), f"decode failed for demand {tag}")
        checks.expect(o.load == o.formula, f"load mismatch for demand {tag}")
        checks.expect(o.one_shot, f"one-shot audit failed for demand {tag}")
        if len(outcomes) == 1:
            lines.append(f"demand {tag}")
            lines.append("user,codewords,decoded")
            for k in range(1, K + 1):
                lines.append(f"{k},{o.counts[k]},{'ok' if o.decoded[k] else 'FAIL'}")
        else:
            lines.append(
                f"demand {tag} load={o.load} ({fmt(o.load)}) formula={o.formula} "
                f"decoded={'ok' if all(o.decoded.values()) else 'FAIL'}"
            )
    if len(outcomes) == 1:
        o = outcomes[0]
        lines.append(f"load {o.load} ({fmt(o.load)})")
        lines.append(f"formula {o.formula} ({fmt(o.formula)})")
        lines.append(f"equal {'yes' if o.load == o.formula else 'no'}")
        lines.append(f"one_shot {'yes' if o.one_shot else 'no'}")
    if weights is not None:
        avg = sum((w * o.load for w, o in zip(weights, outcomes)), Fraction(0)) / N**K
        lines.append(f"average_load {avg} ({fmt(avg)})")
        if t.denominator == 1:
            expected = bounds.d2d_average_optimal(N, K, int(t))
            lines.append(f"average_formula {expected} ({fmt(expected)})")
            checks.expect(avg == expected, "average load differs from closed form")
    if args.demand == "worst" and t.denominator == 1:
        expected = bounds.d2d_worst_optimal(N, K, int(t))
        checks.expect(outcomes[0].load == expected, "worst-case demand load differs from closed form")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.dump:
        with open(args.dump, "wb") as fh:
            fh.write(b"".join(o.wire for o in outcomes))
    for f in checks.failures:
        _note(f"FAIL {f}")
    return checks.status


# --------------------------------------------------------------------------
# bounds

EXHAUSTIVE_LIMIT = 200_000


def cmd_bounds(args) -> int:
    N, K = args.N, args.K
    if args.grid:
        grid = bounds.parse_grid(args.grid)
    else:
        grid = [Fraction(N * t, K) for t in range(1, K + 1)]
    rows = bounds.curves_csv_rows(N, K, grid)
    _emit(rows, ["curve", "M_num", "M_den", "R_num", "R_den", "R_float"], args.out)
    checks = Checks()
    if N**K <= EXHAUSTIVE_LIMIT:
        demands = list(product(range(1, N + 1), repeat=K))
        for t in range(1, K + 1):
            loads = [bounds.d2d_per_demand_direct(K, t, d) for d in demands]
            checks.expect(
                sum(loads, Fraction(0)) / len(demands) == bounds.d2d_average_optimal(N, K, t),
                f"average load at t={t} differs from demand enumeration",
            )
            checks.expect(
                max(loads) == bounds.d2d_worst_optimal(N, K, t),
                f"worst-case load at t={t} differs from demand enumeration",
            )
        _note(f"cross-check against {len(demands)} demands: {'ok' if not checks.failures else 'FAIL'}")
    for t in range(1, K + 1):
        checks.expect(
            bounds.d2d_worst_optimal(N, K, t) == bounds.d2d_worst_exhaustive(N, K, t),
            f"piecewise worst case differs from composition maximum at t={t}",
        )
    for f in checks.failures:
        _note(f"FAIL {f}")
    return checks.status


# --------------------------------------------------------------------------
# converse


def cmd_converse(args) -> int:
    N, K = args.N, args.K
    if K > converse.MAX_BRUTE_K:
        raise ScenarioError(f"converse verifier is limited to K <= {converse.MAX_BRUTE_K}")
    checks = Checks()
    rows = []
    n_demands = n_asym = 0
    acyclic_ok = controls_ok = True
    for s, _ in enumerate_compositions(N, K):
        tag = "-".join(map(str, s))
        demands = demands_of_type(s)
        for t in range(1, K + 1):
            conv = converse.converse_value(N, K, Fraction(N * t, K), s)
            ach = sum((bounds.d2d_per_demand(K, t, d) for d in demands), Fraction(0)) / len(demands)
            eq = conv == ach
            checks.expect(eq, f"converse {conv} != achievable {ach} for type {tag}, t={t}")
            rows.append([tag, t, conv.numerator, conv.denominator, ach.numerator, ach.denominator,
                         "yes" if eq else "no"])
        if not args.report:
            tl = converse.type_ledger(N, s)
            checks.expect(tl.symmetric(), f"type-aggregated coefficients not symmetric for type {tag}")
            checks.expect(tl.closed_form_holds(), f"b_t closed form fails for type {tag}")
            n_demands += len(demands)
            n_asym += len(tl.asymmetric_demands)
            rep = demands[0]
            for t in range(1, K + 1):
                a_ok, c_ok = converse.acyclicity_sweep(K, t, rep)
                acyclic_ok &= a_ok
                controls_ok &= c_ok
    if not args.report:
        checks.expect(n_asym == 0, f"owner symmetry of a^(k,i)_V fails for {n_asym}/{n_demands} demands")
        checks.expect(acyclic_ok, "a pruned-level node set contains a directed cycle")
        checks.expect(controls_ok, "a negative-control node set was not flagged cyclic")
    if args.report:
        _emit(rows, ["type", "t", "r_num", "r_den", "achievable_num", "achievable_den", "equal"], args.out)
    else:
        lines = [
            f"types {len(rows) // K}",
            f"tight {sum(r[-1] == 'yes' for r in rows)}/{len(rows)}",
            f"owner_symmetric_demands {n_demands - n_asym}/{n_demands}",
            f"acyclic_levels {'ok' if acyclic_ok else 'FAIL'}",
            f"negative_controls {'ok' if controls_ok else 'FAIL'}",
            f"status {'ok' if not checks.failures else 'FAIL'}",
        ]
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    for f in checks.failures:
        _note(f"FAIL {f}")
    return checks.status


# --------------------------------------------------------------------------
# inactivity


def cmd_inactivity(args) -> int:
    N, K = args.N, args.K
    p = as_fraction(args.p)
    checks = Checks()
    if args.simulate:
        if args.t is not None:
            t = args.t
        elif args.M is not None:
            tt = Fraction(K) * as_fraction(args.M) / N
            if tt.denominator != 1:
                raise ScenarioError("inactivity simulation needs integer t = KM/N")
            t = int(tt)
        else:
            raise ScenarioError("inactivity --simulate needs -M or --t")
        a_values = parse_int_list(args.a) if args.a is not None else [0]
        d = args.demand if isinstance(args.demand, tuple) else bounds.worst_case_demand(N, K)
        if args.inactive == "all":
            patterns = [c for r in range(K + 1) for c in combinations(range(1, K + 1), r)]
        else:
            patterns = [tuple(parse_int_list(args.inactive or ""))]
        lines = ["a,inactive,user,status,pieces"]
        for a in a_values:
            cfg = RobustConfig(N, K, t, a, p)
            for inactive in patterns:
                res = robust_place_and_deliver(cfg, d, inactive, seed=args.seed, F=args.F)
                # with nobody active there is nothing to decode
                expect_ok = len(inactive) <= a or len(inactive) == K
                checks.expect(
                    res.all_active_decoded() == expect_ok,
                    f"a={a} inactive={inactive}: decode outcome contradicts |inactive| <= a",
                )
                tag = "-".join(map(str, inactive)) or "none"
                for k, o in res.outcomes.items():
                    lines.append(f"{a},{tag},{k},{o.status},{o.pieces_collected}")
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        a_values = parse_int_list(args.a) if args.a is not None else [0]
        ts = parse_int_list(args.t_range) if args.t_range else None
        rows = []
        for curve in tradeoff_curve_inactivity(N, K, p, a_values, args.scheme, ts):
            for pt in curve.points:
                cfg = RobustConfig(N, K, pt.t, pt.a, p)
                checks.expect(cfg.factor == cfg.factor_closed_form(), f"expansion factor identity a={pt.a} t={pt.t}")
                rows.append([pt.a, pt.t, fmt(pt.M), fmt(pt.R), format(float(pt.p_out), ".15g")])
        _emit(rows, ["a", "t", "M_float", "R_float", "P_out"], args.out)
    for f in checks.failures:
        _note(f"FAIL {f}")
    return checks.status


# --------------------------------------------------------------------------
# repro


def cmd_repro(args) -> int:
    fig = args.figure
    rows = repro.fig2_rows() if fig == "fig2" else repro.fig3_rows()
    checks = Checks()
    for r in rows:
        checks.expect(r.ok, f"{r.figure} {r.panel} {r.curve} M={fmt(r.M_ref)}: deviation {r.deviation:.3e}")
    _emit([r.csv() for r in rows], repro.CSV_HEADER, args.out)
    for f_, panel, dev, ok in repro.panel_summary(rows):
        _note(f"{f_} {panel}: max deviation {dev:.3e} {'PASS' if ok else 'FAIL'}")
    if fig == "fig3":
        for a, exact, shown, ok in repro.legend_outages():
            checks.expect(ok, f"legend outage a={a}")
            _note(f"fig3 outage a={a}: {float(exact):.6e} vs legend {shown} {'PASS' if ok else 'FAIL'}")
    return checks.status


# --------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; explicit flags take precedence")
    common.add_argument("-N", type=int, help="number of files")
    common.add_argument("-K", type=int, help="number of users")
    common.add_argument("-M", help="memory per user in files, e.g. 2/3 or 0.5")
    common.add_argument("-F", type=int, help="file size in bits (default: smallest valid)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write output here instead of stdout")

    p = argparse.ArgumentParser(prog="cachesim", description="One-shot D2D coded caching engine")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="run placement and delivery bit-exactly")
    s.add_argument("-d", "--demand", type=parse_demand, default="worst",
                   help="comma list, or worst / average / all")
    s.add_argument("--dump", help="write the serialized transmission log here")
    s.add_argument("--envelope", action="store_true", help="allow fractional t via memory sharing")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bounds", parents=[common], help="emit every load curve and bound as CSV")
    b.add_argument("--grid", help="M grid start:step:stop, e.g. 1:1/3:6")
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("converse", parents=[common], help="brute-force converse verifier (K <= 6)")
    c.add_argument("--report", action="store_true", help="per-type CSV of converse vs achievable")
    c.set_defaults(func=cmd_converse)

    i = sub.add_parser("inactivity", parents=[common], help="MDS-coded scheme under user inactivity")
    mode = i.add_mutually_exclusive_group()
    mode.add_argument("--curve", action="store_true", help="trade-off points as CSV (default)")
    mode.add_argument("--simulate", action="store_true", help="end-to-end decode under inactivity")
    i.add_argument("-p", default="0", help="per-user inactivity probability")
    i.add_argument("-a", help="tolerated inactive users, e.g. 0,24,32 or 0:3")
    i.add_argument("--t", type=int, help="cache parameter (alternative to -M)")
    i.add_argument("--t-range", help="t values for --curve, e.g. 2:30")
    i.add_argument("--scheme", default="proposed_worst", choices=sorted(bounds.SCHEME_CURVES))
    i.add_argument("-d", "--demand", type=parse_demand, default="worst")
    i.add_argument("--inactive", help="inactive users, e.g. 3 or 1,4, or 'all' for every subset")
    i.set_defaults(func=cmd_inactivity)

    r = sub.add_parser("repro", parents=[common], help="regenerate published figure data and diff")
    r.add_argument("figure", choices=["fig2", "fig3"])
    r.set_defaults(func=cmd_repro)
    return p


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        # re-parse with config values as defaults so flags still win
        sub = parser._subparsers._group_actions[0].choices[args.command]  # type: ignore[union-attr]
        known = {a.dest: a for a in sub._actions}
        unknown = sorted(set(cfg) - set(known))
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        converted = {}
        for key, value in cfg.items():
            action = known[key]
            if action.type is not None:
                value = action.type(value)
            elif isinstance(action, argparse._StoreTrueAction):
                value = value.lower() in ("1", "true", "yes", "on")
            converted[key] = value
        sub.set_defaults(**converted)
        args = parser.parse_args(argv)
    for name in ("N", "K"):
        if getattr(args, name) is None and args.command != "repro":
            parser.error(f"-{name} is required")
    return args


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ValueError) as exc:
        _note(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
