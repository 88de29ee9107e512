"""Per-link per-class buffer budgets.

The budget for a class on a link is y * D * T: a dimensionless constant y
(default 2), the allocated load D in bits/s, and the class frame duration T.
The canonical unit is bits; with a 200 Mb/s link split 70/20/10 across frames
of 1/5/10 ms and y = 2 the budgets come out 280,000 / 400,000 / 400,000 bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigurationError
from .framing import NS_PER_SEC, TrafficClass


@dataclass(frozen=True)
class BufferBudget:
    link_id: str
    class_id: int
    y: Fraction
    load_bps: Fraction   # allocated load D on the link for this class
    frame_ns: int
    budget_bits: int

    @property
    def kilobits(self) -> Fraction:
        """Budget in kilobits, the unit conventional buffer tables print."""
        return Fraction(self.budget_bits, 1000)


def buffer_size_bits(y, load_bps, frame_ns: int) -> int:
    """y * load * frame, converted to bits.

    Exact rational arithmetic; a non-integer result (possible only for exotic
    y or loads) is floored, which errs on the safe side for overflow checks.
    """
    if y < 0 or load_bps < 0 or frame_ns < 0:
        raise ConfigurationError("buffer_size_bits arguments must be >= 0")
    exact = Fraction(y) * Fraction(load_bps) * Fraction(frame_ns, NS_PER_SEC)
    return int(exact) if exact.denominator == 1 else int(exact // 1)


def budgets_for_link(
    link_id: str,
    capacity_bps: int,
    classes: list[TrafficClass],
    y_of: dict[int, Fraction] | Fraction,
) -> dict[int, BufferBudget]:
    """Budgets for every class on one link, loads taken as the class's
    allocated bandwidth fraction of the link capacity."""
    budgets = {}
    for cls in classes:
        y = y_of[cls.class_id] if isinstance(y_of, dict) else y_of
        if y < 1:
            raise ConfigurationError(
                f"buffer constant y must be >= 1, got {y} for class {cls.class_id}"
            )
        load = cls.bandwidth_fraction * capacity_bps
        budgets[cls.class_id] = BufferBudget(
            link_id=link_id,
            class_id=cls.class_id,
            y=Fraction(y),
            load_bps=load,
            frame_ns=cls.frame_ns,
            budget_bits=buffer_size_bits(y, load, cls.frame_ns),
        )
    return budgets
