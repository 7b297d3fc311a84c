import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fresnelris.protocol import (
    CE_PARAMETRIC,
    CE_PER_ELEMENT,
    LOCATION_DRIVEN,
    FrameModel,
    OverheadError,
    crossover_elements,
    effective_rate,
    frame_table,
    overhead_symbols,
)


def test_zero_costs():
    for scheme in (LOCATION_DRIVEN, CE_PER_ELEMENT, CE_PARAMETRIC):
        model = FrameModel(scheme, uplink_pilot_cost=0, control_cost=0)
        assert overhead_symbols(model) == 0
        assert effective_rate(3.0, model) == 3.0


def test_per_element_example():
    model = FrameModel(CE_PER_ELEMENT, frame_length=100_000, num_ris=3, elements_per_ris=6400,
                       uplink_pilot_cost=1, control_cost=10)
    assert overhead_symbols(model) == 19_200 + 10


def test_enabling_one_of_three():
    model = FrameModel(LOCATION_DRIVEN, num_ris=3, enabled_ris_fraction=1 / 3,
                       uplink_pilot_cost=7, control_cost=0)
    assert overhead_symbols(model) == 7


def test_pilot_free_localization():
    model = FrameModel(LOCATION_DRIVEN, num_ris=4, uplink_pilot_cost=5, control_cost=10,
                       location_pilots=False)
    assert overhead_symbols(model) == 10


def test_full_overhead_gives_zero_rate():
    model = FrameModel(CE_PARAMETRIC, frame_length=20, num_ris=2, paths_per_ris=5, control_cost=10)
    assert overhead_symbols(model) == 20
    assert effective_rate(4.0, model) == 0.0


def test_overflow_raises():
    model = FrameModel(CE_PER_ELEMENT, frame_length=1000, elements_per_ris=6400)
    with pytest.raises(OverheadError):
        overhead_symbols(model)
    with pytest.raises(OverheadError):
        effective_rate(1.0, model)


def test_location_overhead_constant_in_n():
    values = {overhead_symbols(FrameModel(LOCATION_DRIVEN, num_ris=2, elements_per_ris=n))
              for n in (1, 100, 6400)}
    assert len(values) == 1


@given(st.integers(1, 400), st.integers(1, 5))
def test_ce_strictly_increasing(n, r):
    base = FrameModel(CE_PER_ELEMENT, frame_length=10 ** 6, num_ris=r, elements_per_ris=n)
    assert overhead_symbols(replace(base, elements_per_ris=n + 1)) > overhead_symbols(base)
    assert overhead_symbols(replace(base, num_ris=r + 1)) > overhead_symbols(base)
    para = replace(base, scheme=CE_PARAMETRIC, paths_per_ris=n)
    assert overhead_symbols(replace(para, paths_per_ris=n + 1)) > overhead_symbols(para)
    assert overhead_symbols(replace(para, num_ris=r + 1)) > overhead_symbols(para)


@given(st.sampled_from([LOCATION_DRIVEN, CE_PER_ELEMENT, CE_PARAMETRIC]), st.integers(0, 50),
       st.integers(0, 50), st.integers(1, 4), st.integers(0, 30), st.floats(0, 20))
def test_rate_bounds_and_cost_monotonicity(scheme, pilot, control, r, n, se):
    model = FrameModel(scheme, frame_length=5000, uplink_pilot_cost=pilot, control_cost=control,
                       num_ris=r, elements_per_ris=n, paths_per_ris=n)
    rate = effective_rate(se, model)
    assert 0 <= rate <= se
    assert effective_rate(se, replace(model, uplink_pilot_cost=pilot + 1)) <= rate
    assert effective_rate(se, replace(model, control_cost=control + 1)) <= rate


def closed_form_crossover(base, se_loc, se_ce):
    """Solve se_loc*(F-O_loc) > se_ce*(F - R*N*p - c) for the smallest integer N."""
    f, p, c, r = base.frame_length, base.uplink_pilot_cost, base.control_cost, base.num_ris
    o_loc = p * math.ceil(r * base.enabled_ris_fraction) + c
    loc = se_loc * (f - o_loc) / f
    # strict inequality: smallest N with se_ce*(f - r*N*p - c)/f < loc
    bound = (f - c - loc * f / se_ce) / (r * p)
    n = max(0, math.floor(bound) + 1)
    return min(n, math.floor((f - c) / (r * p)) + 1)


@pytest.mark.parametrize("r, p, c, se_loc, se_ce", [
    (1, 1, 10, 10.0, 11.0),
    (3, 2, 50, 9.0, 12.0),
    (2, 1, 10, 12.0, 12.0),
    (1, 3, 0, 5.0, 5.5),
])
def test_crossover_scan_matches_closed_form(r, p, c, se_loc, se_ce):
    base = FrameModel(frame_length=10_000, uplink_pilot_cost=p, control_cost=c, num_ris=r)
    assert crossover_elements(base, se_loc, se_ce) == closed_form_crossover(base, se_loc, se_ce)


def test_frame_table_rows():
    rows = frame_table(FrameModel(num_ris=3), [100, 6400], se=2.0)
    assert len(rows) == 6
    over = [row for row in rows if row[0] == CE_PER_ELEMENT and row[2] == 6400][0]
    assert over[4] == 3 * 6400 + 10 and over[6] == 0.0
