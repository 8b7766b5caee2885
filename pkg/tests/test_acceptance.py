"""Acceptance gate: one test and one printed verdict line per criterion.

Each test exercises a release criterion at its stated scale and tolerance
and prints a single [PASS]/[FAIL] line even under captured output, so a
full run reads as a checklist.  Criteria 1..9 cover the core library; the
tenth is the annotation-service half of the interface criterion and runs
headless (the browser layer has its own suite and is not imported here).
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from fastapi.testclient import TestClient
from scipy import stats

from acluster.harness import (
    classified_counts,
    exhaustive_distribution,
    exhaustive_mean,
    optimal_average_game_tree,
    sample_labels,
    validate_asymptotics,
    validate_closed_forms,
    validate_insertion_mean,
    validate_random_mean,
    validate_two_class_productive,
)
from acluster.noise import (
    NoisyRunner,
    SignedGraph,
    detect_contradiction,
    repair,
    verify_k_robust,
)
from acluster.oracles import (
    CategoricalModel,
    NoiseModel,
    make_rng,
    sample_categorical_partition,
    sample_uniform_partition,
)
from acluster.partition import Partition, iter_partitions
from acluster.qmath import complexity_polynomial, exact_moments
from acluster.service import SessionService, create_app


def announce(capsys, passed: bool, number: int, title: str, detail: str,
             started: float, budget: float) -> None:
    elapsed = time.perf_counter() - started
    verdict = "PASS" if passed and elapsed < budget else "FAIL"
    with capsys.disabled():
        print(f"[{verdict}] {number:02d} {title}: {detail} "
              f"({elapsed:.1f}s / {budget:.0f}s)")
    assert passed, detail
    assert elapsed < budget, f"over budget: {elapsed:.1f}s >= {budget:.0f}s"


class TestAcceptance:
    def test_01_exact_distribution_matches_exhaustive(self, capsys):
        t0 = time.perf_counter()
        mismatches = []
        for n in range(1, 9):
            exact = complexity_polynomial(n).coeffs
            counted = exhaustive_distribution("universal", n)
            if exact != counted:
                mismatches.append(n)
        frozen = complexity_polynomial(3).coeffs == {2: 3, 3: 2}
        mean_ok = exact_moments(3)[0] == Fraction(12, 5)
        announce(
            capsys, not mismatches and frozen and mean_ok,
            1, "exact distribution equals exhaustive histograms n<=8",
            f"mismatches={mismatches or 'none'}, n=3 gives "
            f"{complexity_polynomial(3).coeffs} mean {exact_moments(3)[0]}",
            t0, 60,
        )

    def test_02_strategies_share_one_distribution(self, capsys):
        t0 = time.perf_counter()
        bad = []
        for n in range(1, 7):
            hists = [
                exhaustive_distribution("clique", n),
                exhaustive_distribution("universal", n),
                exhaustive_distribution("chordal-any", n, seed=11),
                exhaustive_distribution("chordal-any", n, seed=12),
            ]
            if any(h != hists[0] for h in hists[1:]):
                bad.append(n)
        announce(
            capsys, not bad,
            2, "clique/universal/chordal-any identical distributions n<=6",
            f"divergent n: {bad or 'none'}",
            t0, 60,
        )

    def test_03_game_tree_equals_chordal_mean(self, capsys):
        t0 = time.perf_counter()
        rows = []
        ok = True
        for n in (2, 3, 4):
            tree = optimal_average_game_tree(n)
            chordal = exhaustive_mean("chordal-any", n, seed=21)
            rows.append(f"n={n}: {tree}")
            ok = ok and tree == chordal == exact_moments(n)[0]
        announce(
            capsys, ok,
            3, "optimal game tree equals chordal exact mean n in {2,3,4}",
            "; ".join(rows),
            t0, 300,
        )

    def test_04_closed_forms_and_limit_law(self, capsys):
        t0 = time.perf_counter()
        forms = validate_closed_forms(n_max=20, qs=(0.6, 0.75, 0.9), tol=1e-9)
        law = validate_asymptotics(
            n_small=100, n_large=600, trials=10_000, seed=0, ks_tol=0.15
        )
        announce(
            capsys, forms.passed and law.passed,
            4, "generating-function closed forms and n=600 limit law",
            f"max closed-form rel err {forms.measured:.2e}; "
            f"KS {law.measured:.4f} <= 0.15; "
            f"mean gap shrinks {law.details['gap_small']:.4f} -> "
            f"{law.details['gap_large']:.4f}",
            t0, 1800,
        )

    def test_05_insertion_strategy_means(self, capsys):
        t0 = time.perf_counter()
        skew = validate_insertion_mean((0.5, 0.3, 0.2), 10_000, 200, 0, tol=0.02)
        flat = validate_insertion_mean((0.2,) * 5, 10_000, 200, 0, tol=0.02)
        targets_ok = (
            skew.target == pytest.approx(1.7 * 10_000)
            and flat.target == pytest.approx(6 * 10_000 / 2)
        )
        announce(
            capsys, skew.passed and flat.passed and targets_ok,
            5, "insertion means within 2% at n=10^4",
            f"(0.5,0.3,0.2): {skew.measured:.0f} vs 1.7n={skew.target:.0f}; "
            f"uniform k=5: {flat.measured:.0f} vs (k+1)n/2={flat.target:.0f}",
            t0, 300,
        )

    def test_06_random_strategy_means(self, capsys):
        t0 = time.perf_counter()
        n = 10_000
        equal = validate_random_mean((0.25,) * 4, n, 200, 0, tol=0.05)
        unequal = validate_random_mean((0.5, 0.25, 0.25), n, 200, 0, tol=0.05)
        pair_sum = 2 * math.log(2) + 0.5
        targets_ok = (
            equal.target == pytest.approx(4 * (n - 1))
            and unequal.target == pytest.approx(n - 3 + pair_sum * n)
        )
        announce(
            capsys, equal.passed and unequal.passed and targets_ok,
            6, "random-strategy means within 5% at n=10^4",
            f"equal k=4: {equal.measured:.0f} vs k(n-1)={equal.target:.0f}; "
            f"(0.5,0.25,0.25): {unequal.measured:.0f} vs "
            f"n-k+sum f: {unequal.target:.0f}",
            t0, 600,
        )

    def test_07_query_taxonomy(self, capsys):
        t0 = time.perf_counter()
        # every run spends exactly n - k positive answers building its blocks
        core_ok = True
        labels = sample_labels(10, 500, seed=71)
        ks = np.array([len(np.unique(row)) for row in labels])
        for strategy in ("clique", "universal", "chordal-any", "random"):
            _, core, _, _ = classified_counts(strategy, labels, seed=72)
            core_ok = core_ok and bool(np.all(core == 10 - ks))
        # chordal strategies never waste a negative
        excessive = 0
        for n in range(2, 8):
            batch = sample_labels(n, 10_000, seed=73 + n)
            for strategy in ("clique", "universal", "chordal-any"):
                _, _, _, exc = classified_counts(strategy, batch, seed=74)
                excessive += int(exc.sum())
        # two-class coin-flip model: productive mean tracks (n-1)/2
        p2 = [
            validate_two_class_productive("chordal-any", n, 100_000, seed=0)
            for n in range(4, 11)
        ]
        announce(
            capsys, core_ok and excessive == 0 and all(r.passed for r in p2),
            7, "core n-k, zero chordal excessive n<=7, P2 productive mean",
            f"core always n-k: {core_ok}; excessive total {excessive} over "
            f"180k chordal runs; P2 3-sigma passes {sum(r.passed for r in p2)}/7",
            t0, 900,
        )

    def test_08_uniform_sampler_chi_square(self, capsys):
        t0 = time.perf_counter()
        n, draws = 4, 100_000
        index = {p: i for i, p in enumerate(iter_partitions(n))}
        counts = np.zeros(len(index))
        rng = make_rng(81)
        for _ in range(draws):
            counts[index[sample_uniform_partition(n, rng)]] += 1
        _, pvalue = stats.chisquare(counts)
        announce(
            capsys, pvalue > 0.001,
            8, "uniform partition sampler chi-square at n=4",
            f"p-value {pvalue:.4f} over 15 cells, {draws} draws",
            t0, 60,
        )

    def test_09_noise_pipeline(self, capsys):
        t0 = time.perf_counter()
        # a) any single flipped record in a 1-robust log is caught and fixed
        sizes = [12, 9, 6]
        assignment = [c for c, size in enumerate(sizes) for _ in range(size)]
        blocks = []
        offset = 0
        for size in sizes:
            blocks.append(list(range(offset, offset + size)))
            offset += size
        g = SignedGraph(sum(sizes))
        for block in blocks:
            for i, u in enumerate(block):
                g.add(u, block[(i + 1) % len(block)], True)
        for a in range(len(blocks)):
            for b in range(a + 1, len(blocks)):
                for t in range(2):
                    g.add(blocks[a][t], blocks[b][t], False)
        flips_ok = verify_k_robust(g, 1)

        def honest(u, v):
            return assignment[u] == assignment[v]

        for i in range(len(g.records)):
            flipped = g.with_flipped_record(i)
            cycle = detect_contradiction(flipped)
            if cycle is None:
                flips_ok = False
                break
            repair(flipped, cycle, honest)
            if flipped.sign_map() != g.sign_map():
                flips_ok = False
                break

        # b) end-to-end recovery rate under p=0.01 at n=200, r=5
        runner = NoisyRunner(NoiseModel(0.01), redundancy=5)
        recovered = 0
        runs = 500
        for t in range(runs):
            truth = sample_uniform_partition(200, make_rng((940, t)))
            recovered += runner.run(truth, make_rng((941, t))).recovered

        # c) planner overhead against n/(3r+2)+b with a clean oracle
        n = 1000
        truth = sample_categorical_partition(
            n, CategoricalModel((0.25,) * 4), make_rng((930, 0))
        )
        ratios = {}
        for r in (3, 5, 8):
            clean = NoisyRunner(NoiseModel(0.0), redundancy=r)
            out = clean.run(truth, make_rng((930, r)))
            ratios[r] = out.extra_in_block / (n / (3 * r + 2) + truth.b)
        accounting_ok = all(0.75 <= v <= 1.25 for v in ratios.values())

        announce(
            capsys, flips_ok and recovered >= 0.95 * runs and accounting_ok,
            9, "noise: single-flip soundness, 95% e2e recovery, overhead",
            f"all {len(g.records)} flips repaired: {flips_ok}; recovery "
            f"{recovered}/{runs}; overhead ratios "
            + ", ".join(f"r={r}: {v:.3f}" for r, v in ratios.items()),
            t0, 600,
        )

    def test_10_scripted_annotation_sessions(self, capsys, tmp_path):
        t0 = time.perf_counter()
        truth = [0] * 4 + [1] * 4 + [2] * 4
        want = [[0, 1, 2, 3], [4, 5, 6, 7], [8, 9, 10, 11]]

        def script(client, lie_once: bool):
            body = {"items": [f"item{k}" for k in range(12)]}
            if lie_once:
                body["plan"] = {"r": 2}
            sid = client.post("/sessions", json=body).json()["id"]
            lied = False
            saw_repair = False
            for _ in range(400):
                nxt = client.get(f"/sessions/{sid}/next").json()
                if nxt["query"] is None:
                    break
                q = nxt["query"]
                ans = truth[q["u"]] == truth[q["v"]]
                if lie_once and not lied and not q["repair"] and not ans:
                    ans, lied = True, True
                saw_repair = saw_repair or q["repair"]
                client.post(
                    f"/sessions/{sid}/answers",
                    json={"u": q["u"], "v": q["v"], "positive": ans},
                )
            state = client.get(f"/sessions/{sid}").json()
            client.post(
                f"/sessions/{sid}/labels",
                json={"labels": {"0": "red", "1": "green", "2": "blue"}},
            )
            exported = client.get(f"/sessions/{sid}/export").json()
            return state, saw_repair, exported

        ok = True
        with TestClient(create_app(SessionService(tmp_path))) as client:
            clean_state, _, clean_export = script(client, lie_once=False)
            lied_state, saw_repair, lied_export = script(client, lie_once=True)
            for state, exported in ((clean_state, clean_export),
                                    (lied_state, lied_export)):
                ok = ok and state["status"] == "resolved"
                ok = ok and state["blocks"] == want
                by_label = sorted(
                    sorted(int(i.removeprefix("item")) for i, lab
                           in exported["labels"].items() if lab == name)
                    for name in ("red", "green", "blue")
                )
                ok = ok and by_label == want
            ok = ok and saw_repair
        announce(
            capsys, ok,
            10, "scripted 12-item sessions, wrong click repaired (service half)",
            f"clean and lied sessions both export the true 3 blocks; "
            f"repair prompt seen: {saw_repair}",
            t0, 300,
        )
