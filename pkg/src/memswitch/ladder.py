"""Resistor-ladder button network: electrical model and ADC decode tables.

All panel buttons share one analog pin. Button k taps the supply through k
series rungs into a pull-down, so each button lands the pin on a distinct
divider voltage. The decode tables here are derived analytically from the
divider formula instead of being hand-measured, so they are reproducible
bit-exactly for a given configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigInvalid

# Keep adjacent nominal codes >= 2 counts apart for chains up to 24 buttons
# at 10-bit resolution.
MIN_PULLDOWN_RATIO = 5.0

MAX_BUTTONS = 24


@dataclass(frozen=True)
class LadderConfig:
    """Electrical description of the single-pin button ladder."""

    vcc_volts: float
    vref_volts: float
    n_buttons: int
    adc_bits: int = 10
    r_ladder_ohms: float = 10_000.0
    r_pulldown_ohms: float = 100_000.0

    def __post_init__(self):
        if self.vcc_volts <= 0:
            raise ConfigInvalid("vcc_volts must be > 0")
        if self.vref_volts <= 0:
            raise ConfigInvalid("vref_volts must be > 0")
        if not 8 <= self.adc_bits <= 16:
            raise ConfigInvalid("adc_bits must be in 8..16")
        if self.r_ladder_ohms <= 0 or self.r_pulldown_ohms <= 0:
            raise ConfigInvalid("resistances must be > 0")
        if self.r_pulldown_ohms / self.r_ladder_ohms < MIN_PULLDOWN_RATIO:
            raise ConfigInvalid(
                "r_pulldown/r_ladder < %g: adjacent buttons too close to decode"
                % MIN_PULLDOWN_RATIO
            )
        if not 1 <= self.n_buttons <= MAX_BUTTONS:
            raise ConfigInvalid("n_buttons must be in 1..%d" % MAX_BUTTONS)

    @property
    def full_scale(self) -> int:
        return (1 << self.adc_bits) - 1


@dataclass(frozen=True)
class ThresholdTable:
    """Nominal ADC codes per button plus the band boundaries between them.

    nominal_counts[k-1] is button k's code, strictly decreasing (button 1
    sits nearest the supply).  boundaries has one extra entry: boundaries[0]
    is full scale, boundaries[k] for 0 < k < N is the floor-midpoint between
    buttons k and k+1, and boundaries[N] separates button N from the
    no-press band at the bottom.  A code exactly on a boundary belongs to
    the band below it (the higher button index, or no-press).
    """

    nominal_counts: tuple[int, ...]
    boundaries: tuple[int, ...]


def nominal_voltage(cfg: LadderConfig, button: int) -> float:
    """Divider voltage seen on the analog pin while button k is held."""
    return (
        cfg.vcc_volts
        * cfg.r_pulldown_ohms
        / (cfg.r_pulldown_ohms + button * cfg.r_ladder_ohms)
    )


def voltage_to_code(cfg: LadderConfig, volts: float) -> int:
    """Ideal ADC conversion, round-half-up, clamped to the code range."""
    x = Fraction(volts) / Fraction(cfg.vref_volts) * cfg.full_scale
    code = int((x + Fraction(1, 2)).__floor__())
    return min(max(code, 0), cfg.full_scale)


def _nominal_code(cfg: LadderConfig, button: int) -> int:
    # Exact rational arithmetic end to end so the half-up rule is not at the
    # mercy of float midpoints (5/6 of full scale is exactly 852.5 and must
    # round to 853 every time).
    v = (
        Fraction(cfg.vcc_volts)
        * Fraction(cfg.r_pulldown_ohms)
        / (Fraction(cfg.r_pulldown_ohms) + button * Fraction(cfg.r_ladder_ohms))
    )
    x = v / Fraction(cfg.vref_volts) * cfg.full_scale
    code = int((x + Fraction(1, 2)).__floor__())
    return min(max(code, 0), cfg.full_scale)


def build_thresholds(cfg: LadderConfig) -> ThresholdTable:
    """Derive the decode table for a ladder configuration.

    Raises ConfigInvalid when two adjacent buttons land on the same or
    inverted ADC codes (ladder too long for the ADC resolution, or the
    divider saturates the reference).
    """
    n = cfg.n_buttons
    counts = tuple(_nominal_code(cfg, k) for k in range(1, n + 1))
    for k in range(n - 1):
        if counts[k] <= counts[k + 1]:
            raise ConfigInvalid(
                "buttons %d and %d decode to codes %d and %d: not separable"
                % (k + 1, k + 2, counts[k], counts[k + 1])
            )
    if counts[-1] <= 0:
        raise ConfigInvalid("button %d code is 0: not separable from no-press" % n)

    boundaries = [cfg.full_scale]
    for k in range(n - 1):
        boundaries.append((counts[k] + counts[k + 1]) // 2)
    boundaries.append(counts[-1] // 2)
    return ThresholdTable(nominal_counts=counts, boundaries=tuple(boundaries))


def decode_button(table: ThresholdTable, code: int) -> int | None:
    """Map an ADC code to a button index, or None for the no-press band.

    Total over the code range; a code exactly on a boundary decodes to the
    lower-voltage (higher-index) band.
    """
    n = len(table.nominal_counts)
    for k in range(1, n + 1):
        if code > table.boundaries[k]:
            return k
    return None


def format_threshold_table(cfg: LadderConfig) -> str:
    """Human-readable nominal voltage / ADC code / decode band table."""
    table = build_thresholds(cfg)
    lines = [
        "vcc=%.3f V  vref=%.3f V  adc=%d-bit  r_ladder=%g ohm  r_pulldown=%g ohm"
        % (
            cfg.vcc_volts,
            cfg.vref_volts,
            cfg.adc_bits,
            cfg.r_ladder_ohms,
            cfg.r_pulldown_ohms,
        ),
        "button   volts  code  band",
    ]
    for k in range(1, cfg.n_buttons + 1):
        lines.append(
            "%6d  %6.4f  %4d  %d..%d"
            % (
                k,
                nominal_voltage(cfg, k),
                table.nominal_counts[k - 1],
                table.boundaries[k] + 1,
                table.boundaries[k - 1],
            )
        )
    lines.append("  none  0.0000     0  0..%d" % table.boundaries[cfg.n_buttons])
    return "\n".join(lines) + "\n"
