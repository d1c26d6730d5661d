"""Randomized equivalence between the production matcher and the naive
reference, across every (secondary x tie-break) comparator combination."""

import random

import pytest

from matchdriver import COMBOS, drive_pair, random_instance

N_INSTANCES = 200


@pytest.mark.parametrize("secondary,tiebreak", COMBOS)
def test_trade_multisets_match_reference(secondary, tiebreak):
    rng = random.Random(f"{secondary}/{tiebreak}")
    for _ in range(N_INSTANCES):
        instance = random_instance(rng)
        impl, ref, impl_state, ref_state, impl_crossed, ref_crossed = drive_pair(
            instance, secondary, tiebreak)
        flat_impl = sorted(t for sub in impl for t in sub)
        flat_ref = sorted(t for sub in ref for t in sub)
        assert flat_impl == flat_ref, instance
        assert impl_state == ref_state, instance
        assert not impl_crossed and not ref_crossed, instance


@pytest.mark.parametrize("secondary,tiebreak", COMBOS)
def test_fok_is_all_or_nothing_and_quantities_bound(secondary, tiebreak):
    rng = random.Random(f"fok/{secondary}/{tiebreak}")
    for _ in range(N_INSTANCES):
        instance = random_instance(rng)
        impl, _, _, _, _, _ = drive_pair(instance, secondary, tiebreak)
        for (side, otype, price, qty), trades in zip(instance, impl):
            traded = sum(t[1] for t in trades)
            assert traded <= qty
            if otype == "fok":
                assert traded in (0, qty)


def test_resting_remainders_decrease_by_traded_quantity():
    rng = random.Random("remainders")
    for _ in range(50):
        instance = random_instance(rng)
        impl, _, impl_state, _, _, _ = drive_pair(instance, "time", "fifo")
        traded_against = {}
        for trades in impl:
            for price, qty, buy_oid, sell_oid in trades:
                traded_against[buy_oid] = traded_against.get(buy_oid, 0) + qty
                traded_against[sell_oid] = traded_against.get(sell_oid, 0) + qty
        for oid, remaining in impl_state.items():
            index = int(oid[1:]) - 1
            original = instance[index][3]
            assert remaining == original - traded_against.get(oid, 0)
