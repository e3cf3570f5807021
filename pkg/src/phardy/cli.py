"""Command-line front end.

Subcommands
-----------
weight   : weight table + hypothesis checklist (exit 3 on a failed flag)
certify  : full report: Hardy margin, cutoff energies, partial-sum growth,
           decay screen, optimality probes (exit 4 naming the first
           inconclusive sub-check)
ineq     : seeded uncertainty/Rellich sweeps (exit 0 iff all slacks pass)

Exit codes are a stable contract: 0 ok, 2 bad configuration, 3 hypothesis
failure, 4 inconclusive diagnostic.  Identical configuration and seed give
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import hardy, inequalities, variational
from .exponents import as_p
from .fixtures import get_fixture

_G = "%.17g"


def _fmt(x) -> str:
    return _G % float(x)


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, (int, float, np.floating))
                              else str(v) for v in row) + "\n")


def _parse_list(text, cast=float):
    return [cast(tok) for tok in text.split(",") if tok]


def _add_common(sp):
    sp.add_argument("--family", required=True,
                    help="line | tree:<d> | star | model:<profile.json> | explicit:<graph.json>")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--R", type=int, default=None, help="truncation radius")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--out", default=".", help="output directory")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phardy")
    sub = ap.add_subparsers(dest="command", required=True)
    w = sub.add_parser("weight", help="weight table and hypothesis checklist")
    _add_common(w)
    c = sub.add_parser("certify", help="full optimality diagnostics")
    _add_common(c)
    c.add_argument("--n-schedule", default="4,16,64",
                   help="cutoff indices for the null-sequence energies")
    c.add_argument("--lambdas", default="",
                   help="relative excesses for the near-infinity probes")
    c.add_argument("--budget", type=float, default=120.0,
                   help="seconds per probe")
    q = sub.add_parser("ineq", help="inequality chain sweeps")
    _add_common(q)
    q.add_argument("--samples", type=int, default=1000)
    return ap


class _ConfigError(Exception):
    pass


def _load(args):
    if args.p <= 1.0:
        raise _ConfigError("p must be > 1")
    try:
        fx = get_fixture(args.family, args.p)
    except (ValueError, OSError, KeyError) as exc:
        raise _ConfigError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return fx, out


_DEFAULT_R = {"line": 1000, "star": 1000}


def cmd_weight(args) -> int:
    fx, out = _load(args)
    R = args.R or _DEFAULT_R.get(fx.family.kind, 12)
    table = hardy.optimal_weight(fx.family, args.p, R)
    _write_csv(out / "weight.csv", ["site", "w", "wm"],
               list(zip(table.sites.tolist(), table.w, table.wm)))
    checklist = hardy.check_hypotheses(fx.family, args.p,
                                       min(R, 256 if fx.family.kind != "tree" else 24))
    payload = asdict(checklist)
    payload["family"] = args.family
    payload["p"] = args.p
    with open(out / "hypotheses.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1, default=float)
    ok = checklist.all_pass()
    print(f"weight table: {len(table.sites)} sites -> {out / 'weight.csv'}")
    print(f"hypotheses: {'pass' if ok else 'FAIL'} -> {out / 'hypotheses.json'}")
    return 0 if ok else 3


_SR_SCHEDULES = {
    "line": lambda R: np.unique(np.geomspace(10, R, 12).astype(int)),
    "star": lambda R: np.unique(np.geomspace(10, R, 12).astype(int)),
    "tree": lambda R: np.arange(2, min(R, 20) + 1),
    "model": lambda R: np.arange(2, min(R, 20) + 1),
}


def cmd_certify(args) -> int:
    fx, out = _load(args)
    pe = as_p(args.p)
    kind = fx.family.kind
    R = args.R or {"line": 10**6, "star": 10**6}.get(kind, 20)
    n_schedule = _parse_list(args.n_schedule, int)
    lambdas = _parse_list(args.lambdas, float)
    failures = []

    table = hardy.optimal_weight(fx.family, pe, min(R, 4000))
    report = hardy.HardyReport(family=args.family, p=pe.p, weight=table,
                               notes={"seed": args.seed, "R": R})

    # Hardy margin of the shifted functional at a moderate radius
    R_margin = min(R, 2000) if kind in ("line", "star") else min(R, 16)
    if table.radial:
        wfun = np.zeros(R_margin + 2)
        upto = min(len(table.wm), R_margin + 2 - int(table.sites[0]))
        wfun[table.sites[:upto]] = table.wm[:upto]
        margin, _ = variational.hardy_witness(fx.family, pe, wfun, R_margin,
                                              maxiter=20000, tol=1e-8)
    else:
        tab2 = hardy.optimal_weight(fx.family, pe, R_margin)
        wfun = np.zeros(fx.family.truncate(R_margin).n_vertices)
        wfun[tab2.sites] = tab2.wm
        margin, _ = variational.hardy_witness(fx.family, pe, wfun, R_margin,
                                              maxiter=20000, tol=1e-8)
    report.notes["hardy_margin"] = float(margin)
    if margin < -args.tol:
        failures.append("hardy-margin")

    energies = hardy.null_sequence_energies(fx.family, pe, n_schedule)
    report.null_seq_energies = [(n, e) for n, e, _ in energies]
    evals = [e for _, e, _ in energies]
    if not all(b < a for a, b in zip(evals, evals[1:])) or evals[-1] > evals[0]:
        failures.append("null-sequence-decay")

    schedule = _SR_SCHEDULES[kind](R)
    pairs, fit = hardy.null_criticality_sums(fx.family, pe, schedule)
    report.null_crit_partial_sums = pairs
    report.null_crit_fit = fit
    if fit["converged"]:
        failures.append("null-criticality")

    # decay screen: tail sums of w m v^p outside a small ball
    sites = table.sites
    keepR = min(R, int(sites[-1]))
    decay, converged = hardy.decay_condition_check(
        fx.family, pe, sites, table.wm * table.multiplicity, table.proxy,
        K_radius=5, R_max=keepR)
    report.decay_sums = decay
    report.decay_converged = bool(converged)

    for lam in lambdas:
        wit = hardy.optimality_near_infinity_probe(fx.family, pe, lam,
                                                   K_radius=10,
                                                   budget=args.budget)
        if wit is None:
            failures.append(f"optimality-probe:{lam:g}")
        else:
            report.opti_violations.append(wit)

    with open(out / "report.json", "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    _write_csv(out / "null_seq_energies.csv", ["n", "value"],
               report.null_seq_energies)
    _write_csv(out / "null_crit_sums.csv", ["R", "value"], pairs)
    _write_csv(out / "decay_sums.csv", ["R", "value"], decay)
    status = "ok" if not failures else "inconclusive: " + ", ".join(failures)
    print(f"certify {args.family} p={pe.p:g}: {status} -> {out / 'report.json'}")
    return 0 if not failures else 4


def cmd_ineq(args) -> int:
    fx, out = _load(args)
    pe = as_p(args.p)
    kind = fx.family.kind
    R = args.R or {"line": 400, "star": 400}.get(kind, 8)
    g = fx.family.truncate(R)
    table = hardy.optimal_weight(fx.family, pe, R)
    w = np.zeros(g.n_vertices)
    if table.radial and kind != "line":
        radius = g.meta["radius"]
        lookup = np.zeros(int(np.max(radius)) + 1)
        lookup[table.sites] = table.wm
        w[g.interior] = lookup[radius[g.interior]]
    else:
        w[table.sites] = table.wm
    sites = None
    if kind == "line":
        sites = np.arange(g.n_vertices, dtype=float)
    rng = np.random.default_rng(args.seed)
    rows = []
    worst = 0.0
    inner = g.interior_indices
    inner = inner[np.asarray(g.b[inner][:, np.flatnonzero(g.boundary)].sum(axis=1)).ravel() == 0]
    for k in range(args.samples):
        phi = np.zeros(g.n_vertices)
        size = int(rng.integers(1, min(12, len(inner)) + 1))
        chosen = rng.choice(inner, size=size, replace=False)
        phi[chosen] = rng.standard_normal(size)
        hp = inequalities.hpw_check(g, w, phi, pe, moment_sites=sites)
        rl = inequalities.rellich_check(g, w, phi, pe, moment_sites=sites)
        for chain, rep in (("hpw", hp), ("rellich", rl)):
            for name, lv, rv, slack in rep.links:
                scale = abs(lv) + abs(rv)
                rows.append((k, chain, name, slack, scale))
                rel = slack / scale if scale else 0.0
                if rel < worst:
                    worst = rel
    _write_csv(out / "ineq_slacks.csv",
               ["sample", "chain", "link", "slack", "scale"], rows)
    ok = worst >= -args.tol
    print(f"ineq {args.family} p={pe.p:g}: worst relative slack {worst:.3e} "
          f"({'ok' if ok else 'FAIL'}) -> {out / 'ineq_slacks.csv'}")
    return 0 if ok else 4


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "weight":
            return cmd_weight(args)
        if args.command == "certify":
            return cmd_certify(args)
        return cmd_ineq(args)
    except (_ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
