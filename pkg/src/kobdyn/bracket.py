"""Certified interval brackets for metric quantities.

A :class:`MetricBracket` encloses a nonnegative metric quantity between a
certified lower and upper bound.  Every producer tags its bounds so a bracket
records *how* it was obtained; refinement may only shrink a bracket.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class MetricBracket:
    """Certified enclosure [lower, upper] of a nonnegative quantity."""

    lower: float
    upper: float
    method_tags: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not (self.lower <= self.upper + 1e-12):
            raise ValueError(f"bracket crossed: [{self.lower}, {self.upper}]")
        if self.lower < 0.0:
            object.__setattr__(self, "lower", max(0.0, self.lower))
        if self.upper < self.lower:  # tiny crossings from float noise
            object.__setattr__(self, "upper", self.lower)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def tagged(self, *tags) -> "MetricBracket":
        return replace(self, method_tags=self.method_tags + tags)

    def hull(self, other: "MetricBracket") -> "MetricBracket":
        return MetricBracket(
            min(self.lower, other.lower),
            max(self.upper, other.upper),
            self.method_tags + other.method_tags,
        )

    def intersect(self, other: "MetricBracket") -> "MetricBracket":
        """Tightest enclosure consistent with both; never widens either."""
        lo = max(self.lower, other.lower)
        hi = min(self.upper, other.upper)
        if lo > hi:  # inconsistent certificates; keep the sound hull
            return self.hull(other).tagged("inconsistent-intersect")
        return MetricBracket(lo, hi, self.method_tags + other.method_tags)

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def overlaps(self, other: "MetricBracket", slack: float = 0.0) -> bool:
        return self.lower <= other.upper + slack and other.lower <= self.upper + slack

    def __add__(self, other):
        if isinstance(other, MetricBracket):
            return MetricBracket(self.lower + other.lower, self.upper + other.upper,
                                 self.method_tags + other.method_tags)
        return MetricBracket(self.lower + other, self.upper + other, self.method_tags)

    def __sub__(self, other):
        """Interval subtraction; the result may touch zero from below."""
        if isinstance(other, MetricBracket):
            lo = self.lower - other.upper
            hi = self.upper - other.lower
            return MetricBracket(max(lo, min(hi, lo)), hi,
                                 self.method_tags + other.method_tags) if lo <= hi else self.hull(other)
        return MetricBracket(self.lower - other, self.upper - other, self.method_tags)

    def scale(self, a: float) -> "MetricBracket":
        if a < 0:
            raise ValueError("scale factor must be nonnegative")
        return MetricBracket(self.lower * a, self.upper * a, self.method_tags)

    def __repr__(self):
        return f"MetricBracket({self.lower:.9g}, {self.upper:.9g})"


def exact(value: float, *tags) -> MetricBracket:
    return MetricBracket(value, value, tags)


def bracket_min(brs) -> MetricBracket:
    brs = list(brs)
    if not brs:
        raise ValueError("empty bracket collection")
    return MetricBracket(min(b.lower for b in brs), min(b.upper for b in brs),
                         ("min",))


def bracket_max(brs) -> MetricBracket:
    brs = list(brs)
    if not brs:
        raise ValueError("empty bracket collection")
    return MetricBracket(max(b.lower for b in brs), max(b.upper for b in brs),
                         ("max",))


def signed_interval_sub(a: MetricBracket, b: MetricBracket):
    """a - b as a plain (lo, hi) pair; may be negative (Gromov products)."""
    return a.lower - b.upper, a.upper - b.lower
