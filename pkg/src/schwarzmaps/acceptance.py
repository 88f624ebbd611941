"""Acceptance criteria, runnable from the test suite and from ``schwarzmaps suite``.

Each criterion returns a :class:`CriterionResult`. Sample counts default to
the full values; passing ``samples`` caps every ensemble size (quick mode).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import maps as M
from .ensembles import ginibre, random_pd, random_psd, random_tracial_pair, rng_for
from .monotone import MonotoneFunction, check_L1, check_L2, check_equivalence_ab, check_hp_a
from .numerics import ToleranceDisagreement, opnorm, schur_block_psd
from .positivity import (
    check_cp,
    check_generalized_schwarz,
    check_kpositive_seesaw,
    identity_mon_block,
    reverify,
    search_operator_2pos,
    witness_from_verdict,
)
from .tracial import (
    OmegaPoint,
    TracialPair,
    check_tracial_GS,
    check_tracial_schwarz,
    dual_optimizer,
    eval_F,
    pairing,
    violation_from_witness,
)


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.id}: {self.name} ({self.seconds:.1f}s)"

    def to_json(self) -> dict:
        return {
            "criterion": self.id,
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
        }


def _cap(default: int, samples: int | None) -> int:
    return default if samples is None else max(1, min(default, samples))


def choi_example() -> M.MapRep:
    return M.choi_reduction_map(3, 4)


def choi_tensor_map() -> M.MapRep:
    return M.tensor_with_identity(2, choi_example())


def schwarz_ensemble(count: int = 20, seed: int = 0) -> list[M.MapRep]:
    """Unital CP maps of mixed shapes, followed by the normalized id_2 ⊗ Choi map."""
    shapes = [(2, 2), (2, 3), (3, 2), (3, 3)]
    out = []
    for i in range(count):
        n, m = shapes[i % len(shapes)]
        phi = M.random_cp_map(n, m, kraus_count=2 + i % 3, seed=seed * 1000 + i)
        out.append(M.normalize_to_unital(phi))
    out.append(M.normalize_to_unital(choi_tensor_map()))
    return out


def cp_ensemble(count: int = 20, seed: int = 0) -> list[M.MapRep]:
    shapes = [(2, 2), (2, 3), (3, 2), (3, 3)]
    return [
        M.random_cp_map(*shapes[i % 4], kraus_count=1 + i % 3, seed=seed * 1000 + 500 + i)
        for i in range(count)
    ]


def _pairs(dim, count, rng):
    """Valid tracial pairs, every fourth one with rank-deficient ``X``."""
    for s in range(count):
        rank = None if s % 4 else max(1, dim - 1 - s % 2)
        yield TracialPair(*random_tracial_pair(dim, rng, rank=rank))


# -- criteria ---------------------------------------------------------------------


def criterion_1(seed=0, samples=None):
    t0 = time.perf_counter()
    phi = choi_example()
    cp = check_cp(phi)
    k4 = check_kpositive_seesaw(phi, 4, restarts=_cap(20, samples), seed=seed)
    k3 = check_kpositive_seesaw(phi, 3, restarts=_cap(200, samples), seed=seed)
    elapsed = time.perf_counter() - t0
    ok = (
        cp.violated
        and abs(cp.value + 1) <= 1e-9
        and k4.violated
        and k4.value <= -1 + 1e-6
        and abs(reverify(phi, k4) - k4.value) <= 1e-8
        and not k3.violated
        and elapsed < 30
    )
    detail = {"cp_min_eig": cp.value, "k4_value": k4.value, "k3_value": k3.value, "k3_status": k3.status.value}
    return "Choi map: not CP, not 4-positive, no 3-positivity violation", ok, detail


def criterion_2(seed=0, samples=None):
    phi = choi_tensor_map()
    gs = check_generalized_schwarz(phi, restarts=_cap(200, samples), seed=seed)
    two = search_operator_2pos(phi, seed=seed)
    certified = two.violated and two.value < -1e-7 * (1 + opnorm(phi.choi))
    ok = (not gs.violated) and certified and abs(reverify(phi, two) - two.value) <= 1e-8
    detail = {"gschwarz_best": gs.value, "gschwarz_status": gs.status.value, "two_pos_value": two.value}
    return "id_2 ⊗ Choi map: generalized Schwarz, not 2-positive", ok, detail


def criterion_3(seed=0, samples=None):
    maps = [M.normalize_to_unital(choi_tensor_map())] + cp_ensemble(_cap(20, samples), seed)
    npairs = _cap(1000, samples)
    worst, failures, transport = np.inf, 0, 0
    for idx, phi in enumerate(maps):
        rng = rng_for(seed, "crit3", idx)
        for p in _pairs(phi.m, npairs, rng):
            r = check_tracial_GS(phi, p)
            if not r.transport_ok:
                transport += 1
                continue
            worst = min(worst, r.gap / r.scale)
            failures += r.gap < -1e-9 * r.scale
    ok = failures == 0 and transport == 0
    detail = {"maps": len(maps), "pairs_per_map": npairs, "min_relative_gap": worst, "transport_failures": transport}
    return "tracial GS inequality holds on generalized Schwarz maps", ok, detail


def criterion_4(seed=0, samples=None):
    phi = M.transpose_map(2)
    v = check_generalized_schwarz(phi, restarts=_cap(20, samples), seed=seed)
    if not v.violated:
        return "witness pipeline on transpose", False, {"gschwarz": v.value}
    w = witness_from_verdict(v)
    conv = violation_from_witness(phi, w)
    rep = conv.report
    ok = (not rep.transport_ok) or rep.gap <= -w.lam + 1e-8
    detail = {"lambda": w.lam, "classification": conv.classification, "gap": rep.gap}
    return "witness pipeline on transpose", ok, detail


def criterion_5(seed=0, samples=None):
    maps = schwarz_ensemble(_cap(20, samples), seed)
    npairs = _cap(1000, samples)
    failures, worst = 0, np.inf
    for idx, phi in enumerate(maps):
        rng = rng_for(seed, "crit5", idx)
        for p in _pairs(phi.m, npairs, rng):
            r = check_tracial_schwarz(phi, p)
            if not r.transport_ok:
                failures += 1
                continue
            worst = min(worst, r.gap / r.scale)
            failures += r.gap < -1e-9 * r.scale
    # transpose: search random definite pairs, then re-verify with plain inverses
    T = M.transpose_map(2)
    found = None
    for s in range(200):
        rng = rng_for(seed, "crit5-transpose", s)
        p = TracialPair(ginibre(2, 2, rng), random_pd(2, rng))
        r = check_tracial_schwarz(T, p)
        if r.violated:
            found = (p, r)
            break
    reverified = False
    if found:
        p, r = found
        K, X = p.K, p.X
        tK, tX = K.T, X.T
        lhs = np.trace(K.conj().T @ np.linalg.inv(X) @ K).real
        rhs = np.trace(tK.conj().T @ np.linalg.inv(tX) @ tK).real
        reverified = bool(lhs - rhs < 0 and abs((lhs - rhs) - r.gap) <= 1e-8 * r.scale)
    ok = failures == 0 and reverified
    detail = {"maps": len(maps), "pairs_per_map": npairs, "min_relative_gap": worst, "transpose_reverified": reverified}
    return "tracial Schwarz inequality characterizes Schwarz maps", ok, detail


CRIT7_FUNCTIONS = [
    MonotoneFunction.power(0.25),
    MonotoneFunction.power(0.5),
    MonotoneFunction.power(0.75),
    MonotoneFunction.loewner_atom(1, 1, 1),
    MonotoneFunction.loewner_atom(0, 0, 2),
]


def criterion_7(seed=0, samples=None):
    maps = schwarz_ensemble(_cap(20, samples), seed)
    n_xy = _cap(100, samples)
    failures, disagreements, worst = 0, 0, np.inf
    for idx, phi in enumerate(maps):
        for fi, f in enumerate(CRIT7_FUNCTIONS):
            rng = rng_for(seed, "crit7", idx, fi)
            for _ in range(n_xy):
                X, Y = random_pd(phi.m, rng), random_pd(phi.m, rng)
                rep = check_equivalence_ab(phi, f, X, Y)
                disagreements += not rep.agree
                for v in (rep.a, rep.b):
                    rel = v.value / v.detail["scale"]
                    worst = min(worst, rel)
                    failures += rel < -1e-8
    ok = failures == 0 and disagreements == 0
    detail = {"maps": len(maps), "instances": n_xy, "min_relative_eig": worst, "disagreements": disagreements}
    return "Hiai-Petz (a) and (b) hold on Schwarz maps", ok, detail


def criterion_8(seed=0, samples=None):
    maps = schwarz_ensemble(_cap(20, samples), seed) + [M.transpose_map(2)]
    n_inst = _cap(50, samples)
    disagreements, transpose_violations = 0, 0
    ident = MonotoneFunction.identity()
    for idx, phi in enumerate(maps):
        rng = rng_for(seed, "crit8", idx)
        for _ in range(n_inst):
            X, Y = random_pd(phi.m, rng), random_pd(phi.m, rng)
            block = identity_mon_block(phi, X)
            hp = check_hp_a(phi, ident, X, Y)
            disagreements += block.status != hp.status
            if idx == len(maps) - 1:
                transpose_violations += block.violated
    ok = disagreements == 0 and transpose_violations > 0
    detail = {"instances_per_map": n_inst, "disagreements": disagreements, "transpose_violations": transpose_violations}
    return "identity monotonicity block agrees with (a) at f = identity", ok, detail


def criterion_9(seed=0, samples=None):
    maps = schwarz_ensemble(_cap(20, samples), seed)
    n_inst = _cap(200, samples)
    failures, worst = 0, np.inf
    for idx, phi in enumerate(maps):
        for r in (0.25, 0.5, 0.75):
            rng = rng_for(seed, "crit9", idx, r)
            for _ in range(n_inst):
                X, Y = random_pd(phi.m, rng), random_pd(phi.m, rng)
                K1 = ginibre(phi.n, phi.n, rng)
                K2 = ginibre(phi.m, phi.m, rng)
                for rep in (check_L1(phi, X, Y, K1, r), check_L2(phi, X, Y, K2, r)):
                    worst = min(worst, rep.gap / rep.scale)
                    failures += rep.gap < -1e-9 * rep.scale
    ident = M.identity_map(3)
    max_identity_gap = 0.0
    rng = rng_for(seed, "crit9-identity")
    for _ in range(n_inst):
        X, Y, K = random_pd(3, rng), random_pd(3, rng), ginibre(3, 3, rng)
        for r in (0.25, 0.5, 0.75):
            for rep in (check_L1(ident, X, Y, K, r), check_L2(ident, X, Y, K, r)):
                max_identity_gap = max(max_identity_gap, abs(rep.gap))
    ok = failures == 0 and max_identity_gap <= 1e-12
    detail = {"min_relative_gap": worst, "identity_max_abs_gap": max_identity_gap}
    return "Lieb-type trace inequalities on Schwarz maps", ok, detail


def criterion_6(seed=0, samples=None):
    npairs = _cap(500, samples)
    nq = _cap(100, samples)
    rng = rng_for(seed, "crit6")
    attain, dominance_violations = 0.0, 0
    for p in _pairs(3, npairs, rng):
        F = eval_F(p).value
        q = dual_optimizer(p)
        attain = max(attain, abs(pairing(p, q) - F))
        for _ in range(nq):
            L = ginibre(3, 3, rng) * rng.uniform(0.1, 3)
            slack = random_psd(3, rng, rank=rng.integers(0, 4)) if rng.random() < 0.8 else 0
            qq = OmegaPoint(L, -L @ L.conj().T - slack)
            dominance_violations += pairing(p, qq) > F + 1e-8
    convexity_violations = 0
    for _ in range(_cap(200, samples)):
        p1 = TracialPair(*random_tracial_pair(3, rng))
        p2 = TracialPair(*random_tracial_pair(3, rng))
        lam = rng.uniform(0, 1)
        mix = TracialPair(lam * p1.K + (1 - lam) * p2.K, lam * p1.X + (1 - lam) * p2.X)
        bound = lam * eval_F(p1).value + (1 - lam) * eval_F(p2).value
        convexity_violations += eval_F(mix).value > bound + 1e-8
    ok = attain <= 1e-8 and dominance_violations == 0 and convexity_violations == 0
    detail = {
        "max_attainment_gap": attain,
        "dominance_violations": dominance_violations,
        "convexity_violations": convexity_violations,
    }
    return "Legendre duality for F", ok, detail


def criterion_10(seed=0, samples=None):
    nblocks = _cap(1000, samples)
    rng = rng_for(seed, "crit10")
    disagreements, psd_count = 0, 0
    for s in range(nblocks):
        d1, d2 = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        rank = int(rng.integers(1, d1 + d2 + 1))
        G = ginibre(rank, d1 + d2, rng)
        H = G.conj().T @ G
        X, K, Y = H[:d1, :d1], H[d1:, :d1], H[d1:, d1:]
        if s % 2:
            K = K + rng.choice([0.1, 1.0]) * ginibre(d2, d1, rng)
        try:
            rep = schur_block_psd(X, Y, K)
        except ToleranceDisagreement:
            disagreements += 1
            continue
        disagreements += not rep.agree
        psd_count += rep.block_psd
    ok = disagreements == 0
    detail = {"blocks": nblocks, "psd_blocks": psd_count, "disagreements": disagreements}
    return "Schur complement three-way equivalence", ok, detail


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_criterion(cid: int, seed: int = 0, samples: int | None = None) -> CriterionResult:
    t0 = time.perf_counter()
    name, ok, detail = CRITERIA[cid](seed=seed, samples=samples)
    return CriterionResult(cid, name, bool(ok), detail, time.perf_counter() - t0)


def run_all(seed: int = 0, samples: int | None = None) -> list[CriterionResult]:
    return [run_criterion(cid, seed, samples) for cid in sorted(CRITERIA)]
