#!/usr/bin/env python3

import logging
import math
import sys
import time

from cayleywalk.cayley import build_ball, verify_bs_sheet
from cayleywalk.grigorchuk import grig_is_identity, grig_search_badcycles
from cayleywalk.heightfn import VERDICT_NONE, is_harmonic, solve_group_height_function
from cayleywalk.obstructions import higman_quotient_search
from cayleywalk.oracles import element_order, oracle_for, presentation_for
from cayleywalk.saw import count_saws, naive_saw_counts
from cayleywalk.spectral import return_probabilities_tree

logging.basicConfig(level=logging.WARNING, format='%(asctime)s - DESK-CHECK - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

Z2_SIGMA = [1, 4, 12, 36, 100, 284, 780, 2172, 5916]
GRIG_RELATIONS = ["bcbc", "abcabcabcabc", "ac" * 8, "abcacac" * 4, "acab" * 8, "ab" * 16]


def check_saw_counts():
    z2 = oracle_for("z2")
    counts = count_saws(build_ball(z2, 8), 8).counts
    tree = count_saws(build_ball(oracle_for("tree:3"), 12), 12).counts
    return (counts == Z2_SIGMA and naive_saw_counts(z2, 4) == Z2_SIGMA[:5]
            and all(tree[n] == 3 * 2 ** (n - 1) for n in range(1, 13)))


def check_grigorchuk():
    grig = oracle_for("grigorchuk")
    ab = element_order(grig, grig.presentation.parse_word("a b"), 64).order
    ac = element_order(grig, grig.presentation.parse_word("a c"), 64).order
    layers = build_ball(grig, 2).summary()["layers"]
    return (all(grig_is_identity(w) for w in GRIG_RELATIONS) and ab == 16 and ac == 8
            and grig_search_badcycles() == [] and layers[:3] == [1, 3, 5])


def check_height_functions():
    z2 = solve_group_height_function(presentation_for("z2"))
    higman = solve_group_height_function(presentation_for("higman"))
    variant = solve_group_height_function(presentation_for("higman-variant"))
    hnn = solve_group_height_function(presentation_for("grig-hnn"))
    harmonic = is_harmonic(build_ball(oracle_for("z2"), 3), z2.witness).harmonic
    return (z2.rank == 2 and higman.verdict == VERDICT_NONE and variant.verdict == VERDICT_NONE
            and hnn.witness is not None and hnn.witness.as_dict().get("t") == 1 and harmonic)


def check_bs_sheet():
    report = verify_bs_sheet(build_ball(oracle_for("bs12"), 6))
    return report.all_passed


def check_spectral():
    series = return_probabilities_tree(3, 200)
    return abs(series.rho_ratio_estimate() - 2 * math.sqrt(2) / 3) < 0.01


def check_higman_quotients():
    result = higman_quotient_search(10_000)
    return result.solutions == [] and result.audit_passed


CHECKS = [
    ("SAW counts on Z^2 and T_3", check_saw_counts),
    ("Grigorchuk relations, orders and layers", check_grigorchuk),
    ("Height function verdicts", check_height_functions),
    ("BS(1,2) five-cycle structure", check_bs_sheet),
    ("Return probabilities on T_3", check_spectral),
    ("Higman quotient divisibility search", check_higman_quotients),
]


def main():
    print("🔍 cayleywalk desk check")
    print("=" * 50)

    passed, failed = [], []
    for name, check in CHECKS:
        start = time.time()
        try:
            ok = check()
        except Exception as e:
            logger.error(f"❌ {name} raised: {e}")
            ok = False
        elapsed = time.time() - start
        print(f"{'✅' if ok else '❌'} {name} ({elapsed:.2f}s)")
        (passed if ok else failed).append(name)

    print()
    print("📊 RESULTS")
    print("=" * 50)
    print(f"✅ Passed: {len(passed)}")
    print(f"❌ Failed: {len(failed)}")
    for name in failed:
        print(f"   • {name}")
    return 0 if not failed else 1


if __name__ == "__main__":
    sys.exit(main())
