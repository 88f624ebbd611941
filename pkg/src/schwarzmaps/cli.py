"""Command-line interface.

Reports are JSON lines, one object per check (sorted by check id) followed
by a ``summary`` object. Exit codes: 0 when no violation was found, 1 when
any check produced a proven violation, 2 on errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from . import acceptance
from .ensembles import ginibre, haar_unitary, random_pd, random_tracial_pair, rng_for
from .maps import (
    MapRep,
    choi_reduction_map,
    depolarizing_map,
    identity_map,
    load_map,
    map_to_dict,
    normalize_to_unital,
    random_cp_map,
    regularize,
    save_map,
    tensor_with_identity,
    transpose_map,
    unitary_conjugation_map,
)
from .monotone import MonotoneFunction, check_L1, check_L2, check_equivalence_ab, check_hp_a, check_hp_b
from .numerics import ToleranceConfig, is_pd
from .positivity import (
    check_cp,
    check_generalized_schwarz,
    check_kpositive_seesaw,
    search_identity_mon,
    search_schwarz_block,
    witness_from_verdict,
)
from .tracial import TracialPair, check_F_monotone, check_tracial_GS, check_tracial_schwarz, violation_from_witness
from .verdicts import to_jsonable

log = logging.getLogger("schwarzmaps")

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    restarts: int = 20
    samples: int = 100
    tol: ToleranceConfig = ToleranceConfig()
    out: str | None = None

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        base = ToleranceConfig()
        tol = ToleranceConfig(
            psd_tol=args.tol_psd if args.tol_psd is not None else base.psd_tol,
            kernel_tol=args.tol_kernel if args.tol_kernel is not None else base.kernel_tol,
        )
        return cls(args.seed, args.restarts, args.samples, tol, args.out)


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _emit(fh, obj) -> None:
    fh.write(json.dumps(to_jsonable(obj), sort_keys=True) + "\n")


# -- gen ---------------------------------------------------------------------------


def _build(args) -> MapRep:
    name = args.builder
    if name == "depolarizing":
        phi = depolarizing_map(args.n, args.m)
    elif name == "choi-reduction":
        phi = choi_reduction_map(args.t, args.n)
    elif name == "transpose":
        phi = transpose_map(args.n)
    elif name == "identity":
        phi = identity_map(args.n)
    elif name == "unitary":
        phi = unitary_conjugation_map(haar_unitary(args.n, rng_for(args.seed, "unitary", args.n)))
    elif name == "random-cp":
        phi = random_cp_map(args.n, args.m, args.kraus, args.seed)
    else:
        raise UsageError(f"unknown builder {name!r}")
    if args.tensor_identity:
        phi = tensor_with_identity(args.tensor_identity, phi)
    if args.regularize:
        phi = regularize(phi, args.regularize)
    if args.unital:
        phi = normalize_to_unital(phi)
    return phi


def cmd_gen(args) -> int:
    phi = _build(args)
    if args.out:
        save_map(phi, args.out)
    else:
        sys.stdout.write(json.dumps(map_to_dict(phi)) + "\n")
    return EXIT_OK


# -- check ---------------------------------------------------------------------------


def _parse_checks(spec: str):
    checks = []
    for item in filter(None, (s.strip() for s in spec.split(","))):
        if item.startswith("kpos="):
            try:
                checks.append(("kpos", int(item[5:])))
            except ValueError:
                raise UsageError(f"invalid k in {item!r}") from None
        elif item in ("cp", "gschwarz", "schwarz-block", "idmon"):
            checks.append((item, None))
        else:
            raise UsageError(f"unknown check {item!r}")
    if not checks:
        raise UsageError("no checks requested")
    return checks


def cmd_check(args) -> int:
    cfg = RunConfig.from_args(args)
    phi = load_map(args.map)
    checks = _parse_checks(args.checks)
    for name, k in checks:
        if name == "kpos" and not 1 <= k <= phi.n:
            raise UsageError(f"k={k} outside [1, {phi.n}]")
    verdicts = []
    for name, k in checks:
        log.info("running %s on %s", name if k is None else f"kpos={k}", phi.label)
        if name == "cp":
            v = check_cp(phi, cfg.tol)
        elif name == "kpos":
            v = check_kpositive_seesaw(phi, k, cfg.restarts, cfg.seed, cfg.tol)
        elif name == "gschwarz":
            v = check_generalized_schwarz(phi, cfg.restarts, cfg.seed, cfg.tol)
        elif name == "schwarz-block":
            v = search_schwarz_block(phi, cfg.samples, cfg.seed, cfg.tol)
        else:
            v = search_identity_mon(phi, cfg.samples, cfg.seed, cfg.tol)
        verdicts.append(v)
    verdicts.sort(key=lambda v: v.check)
    n_viol = sum(v.violated for v in verdicts)
    with _output(cfg.out) as fh:
        for v in verdicts:
            _emit(fh, v.to_json())
        _emit(fh, {"summary": {"map": phi.label, "checks": len(verdicts), "violations": n_viol}})
    return EXIT_VIOLATION if n_viol else EXIT_OK


# -- tracial ---------------------------------------------------------------------------


def _tracial_eval(mode, phi, pair, tol):
    if mode == "gs":
        r = check_tracial_GS(phi, pair, tol)
        return r.to_json(), r.violated, r.gap, not r.transport_ok
    if mode == "schwarz":
        r = check_tracial_schwarz(phi, pair, tol)
        return r.to_json(), r.violated, r.gap, not r.transport_ok
    r = check_F_monotone(phi, pair, tol)
    gap = float(r.F) - float(r.F_image) if r.F.finite else float("inf")
    if r.F.finite and r.F_image.infinite:
        gap = float("-inf")
    return r.to_json(), not r.holds, gap, r.F.finite and r.F_image.infinite


def cmd_tracial(args) -> int:
    cfg = RunConfig.from_args(args)
    phi = load_map(args.map)
    rows = []
    for s in range(cfg.samples):
        rng = rng_for(cfg.seed, "tracial", args.mode, s)
        rank = None if s % 4 else max(1, phi.m - 1)
        pair = TracialPair(*random_tracial_pair(phi.m, rng, rank=rank))
        rows.append((f"sample-{s:06d}", pair))
    if args.witness:
        v = check_generalized_schwarz(phi, cfg.restarts, cfg.seed, cfg.tol)
        if v.violated:
            conv = violation_from_witness(phi, witness_from_verdict(v), cfg.tol)
            rows.append(("witness", conv.pair))
    gaps, transport_failures, violations = [], 0, 0
    with _output(cfg.out) as fh:
        for ident, pair in rows:
            result, violated, gap, transport_fail = _tracial_eval(args.mode, phi, pair, cfg.tol)
            gaps.append(gap)
            transport_failures += bool(transport_fail)
            violations += bool(violated)
            _emit(fh, {"id": ident, "mode": args.mode, **result})
        finite = np.array([g for g in gaps if np.isfinite(g)])
        summary = {
            "map": phi.label,
            "mode": args.mode,
            "pairs": len(rows),
            "min_gap": min(gaps) if gaps else None,
            "quantiles": dict(zip(("q0", "q25", "q50", "q75", "q100"), np.quantile(finite, [0, 0.25, 0.5, 0.75, 1]).tolist()))
            if finite.size
            else {},
            "transport_failures": transport_failures,
            "violations": violations,
        }
        _emit(fh, {"summary": summary})
    return EXIT_VIOLATION if violations else EXIT_OK


# -- monotone ---------------------------------------------------------------------------


def cmd_monotone(args) -> int:
    cfg = RunConfig.from_args(args)
    phi = load_map(args.map)
    try:
        f = MonotoneFunction.parse(args.f)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    # the L1/L2 exponent follows a power f when it lies strictly inside (0, 1)
    r = f.params[0] if f.variant == "power" and 0 < f.params[0] < 1 else 0.5
    stats = {"hp_a_min": np.inf, "hp_b_min": np.inf, "L1_min": np.inf, "L2_min": np.inf}
    violations, disagreements = 0, 0
    with _output(cfg.out) as fh:
        for s in range(cfg.samples):
            rng = rng_for(cfg.seed, "monotone", s)
            X, Y = random_pd(phi.m, rng), random_pd(phi.m, rng)
            K1, K2 = ginibre(phi.n, phi.n, rng), ginibre(phi.m, phi.m, rng)
            if is_pd(phi.adjoint_apply(X), cfg.tol) and is_pd(phi.adjoint_apply(Y), cfg.tol):
                eq = check_equivalence_ab(phi, f, X, Y, cfg.tol)
                a, b, agree = eq.a, eq.b, eq.agree
            else:
                a, b, agree = check_hp_a(phi, f, X, Y, cfg.tol), check_hp_b(phi, f, X, Y, cfg.tol), None
            l1, l2 = check_L1(phi, X, Y, K1, r, cfg.tol), check_L2(phi, X, Y, K2, r, cfg.tol)
            l_bad = [rep.gap < -cfg.tol.psd_tol * rep.scale for rep in (l1, l2)]
            violations += a.violated + b.violated + sum(l_bad)
            disagreements += agree is False
            stats["hp_a_min"] = min(stats["hp_a_min"], a.value)
            stats["hp_b_min"] = min(stats["hp_b_min"], b.value)
            stats["L1_min"] = min(stats["L1_min"], l1.gap)
            stats["L2_min"] = min(stats["L2_min"], l2.gap)
            _emit(
                fh,
                {
                    "id": f"sample-{s:06d}",
                    "f": f.to_json(),
                    "hp_a": {"status": a.status.value, "value": a.value},
                    "hp_b": {"status": b.status.value, "value": b.value},
                    "agree": agree,
                    "L1": l1.to_json(),
                    "L2": l2.to_json(),
                },
            )
        summary = {
            "map": phi.label,
            "f": f.to_json(),
            "r": r,
            "samples": cfg.samples,
            **stats,
            "violations": violations,
            "disagreements": disagreements,
        }
        _emit(fh, {"summary": summary})
    return EXIT_VIOLATION if violations else EXIT_OK


# -- suite ---------------------------------------------------------------------------


def cmd_suite(args) -> int:
    cfg = RunConfig.from_args(args)
    samples = args.samples if args.samples_given else None
    if args.map:
        # validates an externally supplied map file before running anything
        load_map(args.map)
    results = []
    with _output(cfg.out) as fh:
        for cid in sorted(acceptance.CRITERIA):
            res = acceptance.run_criterion(cid, seed=cfg.seed, samples=samples)
            print(res.line(), file=sys.stderr)
            results.append(res)
            _emit(fh, res.to_json())
        passed = sum(r.passed for r in results)
        _emit(fh, {"summary": {"criteria": len(results), "passed": passed, "seed": cfg.seed, "samples": samples}})
    return EXIT_OK if passed == len(results) else EXIT_VIOLATION


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    common.add_argument("--restarts", type=int, default=20)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--tol-psd", type=float, default=None)
    common.add_argument("--tol-kernel", type=float, default=None)
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="schwarzmaps", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write a .map.json file")
    g.add_argument("builder", help="depolarizing | choi-reduction | transpose | identity | unitary | random-cp")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, default=None)
    g.add_argument("--t", type=float, default=None)
    g.add_argument("--kraus", type=int, default=2)
    g.add_argument("--tensor-identity", type=int, default=0, metavar="K")
    g.add_argument("--regularize", type=float, default=0.0, metavar="EPS")
    g.add_argument("--unital", action="store_true", help="normalize so that phi(1) = 1")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", parents=[common], help="positivity checks")
    c.add_argument("map")
    c.add_argument("--checks", default="cp", help="comma list of cp, kpos=K, gschwarz, schwarz-block, idmon")
    c.set_defaults(func=cmd_check)

    t = sub.add_parser("tracial", parents=[common], help="tracial inequalities on seeded pairs")
    t.add_argument("map")
    t.add_argument("--mode", choices=("gs", "schwarz", "fmono"), default="gs")
    t.add_argument("--no-witness", dest="witness", action="store_false", help="skip the witness pipeline")
    t.set_defaults(func=cmd_tracial)

    mo = sub.add_parser("monotone", parents=[common], help="monotonicity inequalities")
    mo.add_argument("map")
    mo.add_argument("--f", default="power:0.5", help="power:R | identity | loewner:BETA,GAMMA,T")
    mo.set_defaults(func=cmd_monotone)

    s = sub.add_parser("suite", parents=[common], help="run every acceptance criterion")
    s.add_argument("--map", default=None, help="optional map file to validate first")
    s.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    args.samples_given = args.samples is not None
    if args.samples is None:
        args.samples = 100
    if args.command == "gen":
        if args.builder == "choi-reduction" and args.t is None:
            parser.error("choi-reduction needs --t")
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"schwarzmaps: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
