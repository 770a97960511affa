"""Button ladder electrical model and decode tables.

Frozen expected values were computed with an independent exact-rational
oracle (divider formula + round-half-up), not by running the code under
test.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from memswitch.errors import ConfigInvalid
from memswitch.ladder import (
    LadderConfig,
    build_thresholds,
    decode_button,
    format_threshold_table,
    nominal_voltage,
    voltage_to_code,
)

# Oracle outputs for the default electrical config (5 V supply and
# reference, 10-bit ADC, 10k rungs, 100k pull-down).
CODES_N9 = (930, 853, 787, 731, 682, 639, 602, 568, 538)
BOUNDS_N9 = (1023, 891, 820, 759, 706, 660, 620, 585, 553, 269)
CODES_N6 = (930, 853, 787, 731, 682, 639)
BOUNDS_N6 = (1023, 891, 820, 759, 706, 660, 319)


def cfg(n: int, **kw) -> LadderConfig:
    kw.setdefault("vcc_volts", 5.0)
    kw.setdefault("vref_volts", 5.0)
    return LadderConfig(n_buttons=n, **kw)


def oracle_voltage(vcc, r_pd, r_l, k) -> Fraction:
    return Fraction(vcc) * Fraction(r_pd) / (Fraction(r_pd) + k * Fraction(r_l))


class TestNominalVoltages:
    def test_matches_divider_oracle_to_1e12(self):
        for n in (6, 9):
            c = cfg(n)
            for k in range(1, n + 1):
                expect = oracle_voltage(5, 100_000, 10_000, k)
                got = Fraction(nominal_voltage(c, k))
                assert abs(got - expect) / expect <= Fraction(1, 10**12)

    def test_spot_values(self):
        c = cfg(9)
        assert nominal_voltage(c, 1) == pytest.approx(50 / 11, rel=1e-12)
        assert nominal_voltage(c, 9) == pytest.approx(50 / 19, rel=1e-12)


class TestNominalCodes:
    def test_frozen_table_n9(self):
        assert build_thresholds(cfg(9)).nominal_counts == CODES_N9

    def test_frozen_table_n6(self):
        assert build_thresholds(cfg(6)).nominal_counts == CODES_N6

    def test_half_up_at_exact_midpoint(self):
        # Button 2 at the default config lands on exactly 852.5 counts;
        # the declared rule sends it up.
        assert build_thresholds(cfg(2)).nominal_counts == (930, 853)

    def test_voltage_to_code_rounds_half_up_and_clamps(self):
        c = cfg(9)
        assert voltage_to_code(c, 0.0) == 0
        assert voltage_to_code(c, 5.0) == 1023
        assert voltage_to_code(c, 6.0) == 1023
        assert voltage_to_code(c, -1.0) == 0
        # With vref = full scale, 1 V is exactly 1 count, so x.5 volts are
        # exact midpoints and must round up.
        c_unit = cfg(9, vref_volts=1023.0)
        assert voltage_to_code(c_unit, 0.5) == 1
        assert voltage_to_code(c_unit, 1.5) == 2
        assert voltage_to_code(c_unit, 0.4999) == 0


class TestBoundaries:
    def test_frozen_boundaries(self):
        assert build_thresholds(cfg(9)).boundaries == BOUNDS_N9
        assert build_thresholds(cfg(6)).boundaries == BOUNDS_N6

    def test_boundary_code_goes_to_higher_index(self):
        t = build_thresholds(cfg(9))
        for k in range(1, 9):
            assert decode_button(t, t.boundaries[k]) == k + 1
            assert decode_button(t, t.boundaries[k] + 1) == k

    def test_no_press_band(self):
        t = build_thresholds(cfg(9))
        assert decode_button(t, 0) is None
        assert decode_button(t, t.boundaries[9]) is None
        assert decode_button(t, t.boundaries[9] + 1) == 9

    def test_nominal_codes_decode_to_their_buttons(self):
        t = build_thresholds(cfg(9))
        for k, code in enumerate(t.nominal_counts, start=1):
            assert decode_button(t, code) == k

    def test_full_scale_decodes_to_button_one(self):
        t = build_thresholds(cfg(9))
        assert decode_button(t, 1023) == 1


class TestValidation:
    def test_rejects_separation_ratio_below_five(self):
        with pytest.raises(ConfigInvalid):
            cfg(9, r_ladder_ohms=10_000.0, r_pulldown_ohms=49_000.0)

    def test_accepts_ratio_of_exactly_five(self):
        cfg(9, r_ladder_ohms=10_000.0, r_pulldown_ohms=50_000.0)

    def test_rejects_nonpositive_electricals(self):
        for kw in (
            {"vcc_volts": 0.0},
            {"vref_volts": -1.0},
            {"r_ladder_ohms": 0.0},
            {"r_pulldown_ohms": -5.0},
        ):
            with pytest.raises(ConfigInvalid):
                cfg(9, **kw)

    def test_rejects_bad_button_counts(self):
        with pytest.raises(ConfigInvalid):
            cfg(0)
        with pytest.raises(ConfigInvalid):
            cfg(25)

    def test_rejects_unresolvable_table(self):
        # A huge pull-down squeezes all taps against the supply; at 8 bits
        # buttons 2 and 3 land on the same code.
        with pytest.raises(ConfigInvalid):
            build_thresholds(
                cfg(3, adc_bits=8, r_ladder_ohms=1000.0, r_pulldown_ohms=1_000_000.0)
            )

    def test_rejects_saturated_reference(self):
        # vref below the top tap voltages clamps several buttons to full scale.
        with pytest.raises(ConfigInvalid):
            build_thresholds(cfg(9, vref_volts=2.5))


@settings(max_examples=200, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=24),
    ratio=st.integers(min_value=5, max_value=40),
    code_offset=st.integers(min_value=-1023, max_value=1023),
)
def test_decode_total_and_consistent(n, ratio, code_offset):
    """Every in-range code decodes to the band whose nominal code is nearest
    (ties to the higher index), and decode never raises."""
    c = cfg(n, r_ladder_ohms=1000.0, r_pulldown_ohms=1000.0 * ratio)
    try:
        t = build_thresholds(c)
    except ConfigInvalid:
        return
    code = max(0, min(1023, 512 + code_offset))
    got = decode_button(t, code)
    # Reference decode: nearest nominal code, half-way goes to higher index,
    # with the no-press band below half of the last button's code.
    best = None
    for k, nominal in enumerate(t.nominal_counts, start=1):
        if best is None:
            best = k
            continue
        d_new = abs(code - nominal)
        d_old = abs(code - t.nominal_counts[best - 1])
        if d_new < d_old or (d_new == d_old and nominal < t.nominal_counts[best - 1]):
            best = k
    if code <= t.nominal_counts[-1] // 2:
        best = None
    assert got == best


@pytest.mark.parametrize("n", range(1, 25))
def test_decode_is_monotone_partition(n):
    """Scanning codes top-down walks bands 1, 2, ..., n, None in order."""
    t = build_thresholds(cfg(n))
    seen = []
    for code in range(1023, -1, -1):
        b = decode_button(t, code)
        if not seen or seen[-1] != b:
            seen.append(b)
    assert seen == list(range(1, n + 1)) + [None]


def test_format_threshold_table_contents():
    text = format_threshold_table(cfg(9))
    lines = text.splitlines()
    assert "4.5455" in lines[2] and "930" in lines[2]
    assert "2.6316" in lines[10] and "538" in lines[10]
    assert lines[-1].strip().startswith("none")
    assert "0..269" in lines[-1]
