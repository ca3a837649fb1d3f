"""Bigraded Tate-twist arithmetic and closed-form twist evaluation.

Twists (x)[y] form the rank-2 free abelian group Z^2; all arithmetic is
exact integers (the target group is torsion free, so no reduction ever
happens).  The evaluators below compute, from Witt indices alone, the
twist value of the affine-quadric generator e^q and of det(Q) at an
extension of the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass

from .forms import ProjectiveQuadric, QuadraticForm


@dataclass(frozen=True, order=True)
class TateTwist:
    x: int = 0
    y: int = 0

    def __add__(self, other: "TateTwist") -> "TateTwist":
        return TateTwist(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "TateTwist") -> "TateTwist":
        return TateTwist(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "TateTwist":
        return TateTwist(-self.x, -self.y)

    def __rmul__(self, scalar: int) -> "TateTwist":
        return TateTwist(scalar * self.x, scalar * self.y)

    def __bool__(self) -> bool:
        return (self.x, self.y) != (0, 0)

    def render(self) -> str:
        return f"({self.x})[{self.y}]"

    __str__ = render

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y}

    @staticmethod
    def from_json(data: dict) -> "TateTwist":
        return TateTwist(int(data["x"]), int(data["y"]))


ZERO_TWIST = TateTwist(0, 0)


def split_quadric_sum(m: int, j: int) -> TateTwist:
    """Sum over l < j of (m - 2l)[2m - 4l + 1] for a quadric of dimension m."""
    total = ZERO_TWIST
    for l in range(j):
        total = total + TateTwist(m - 2 * l, 2 * m - 4 * l + 1)
    return total


def phi_affine(q: QuadraticForm, extension, model) -> TateTwist:
    """Twist value of the generator e^q at an extension.

    With P, P' the quadrics of q and q' and j_P, j_P' their Witt indices,
    the value is the difference of the two split sums over P' and P.
    """
    token = extension if isinstance(extension, str) else extension.token
    cache = model._twist_cache
    key = ("affine", q.key, token)
    value = cache.get(key)
    if value is None:
        q_prime = model.prime_of(q)
        j_p = model.witt_index(q, token)
        j_pp = model.witt_index(q_prime, token)
        value = split_quadric_sum(q_prime.dim - 2, j_pp) - split_quadric_sum(
            q.dim - 2, j_p
        )
        cache[key] = value
    return value


def phi_det(quadric: ProjectiveQuadric, extension, model) -> TateTwist:
    """Twist value of det(Q) at an extension: the split sum at i_W(Q_E)."""
    if quadric.is_empty:
        return ZERO_TWIST
    token = extension if isinstance(extension, str) else extension.token
    cache = model._twist_cache
    key = ("det", quadric.key, token)
    value = cache.get(key)
    if value is None:
        j = model.witt_index(quadric.canonical_form, token)
        value = split_quadric_sum(quadric.dim, j)
        cache[key] = value
    return value


def phi_ratio_summand(summand, extension, model) -> TateTwist:
    """Twist ratio of an indecomposable summand at an extension.

    Upper Tate constituents T(l)[2l] contribute (l)[2l]; lower ones divide
    out as (l)[2l-1].  Invariant under Tate shifts of the summand.
    """
    from .decomp import tate_counts

    upper, lower = tate_counts(summand, extension, model)
    total = ZERO_TWIST
    for l in upper:
        total = total + TateTwist(l, 2 * l)
    for l in lower:
        total = total - TateTwist(l, 2 * l - 1)
    return total


class PhiFingerprint:
    """Twist values over every extension of a fixed lattice, base included."""

    __slots__ = ("entries",)

    def __init__(self, entries: dict[str, TateTwist]):
        self.entries = dict(entries)

    def tokens(self) -> list[str]:
        return sorted(self.entries)

    def __getitem__(self, token: str) -> TateTwist:
        return self.entries[token]

    def __eq__(self, other) -> bool:
        return isinstance(other, PhiFingerprint) and self.entries == other.entries

    def __add__(self, other: "PhiFingerprint") -> "PhiFingerprint":
        if self.tokens() != other.tokens():
            raise ValueError("fingerprints over different lattices")
        return PhiFingerprint(
            {t: self.entries[t] + other.entries[t] for t in self.entries}
        )

    def __sub__(self, other: "PhiFingerprint") -> "PhiFingerprint":
        if self.tokens() != other.tokens():
            raise ValueError("fingerprints over different lattices")
        return PhiFingerprint(
            {t: self.entries[t] - other.entries[t] for t in self.entries}
        )

    def __rmul__(self, scalar: int) -> "PhiFingerprint":
        return PhiFingerprint({t: scalar * v for t, v in self.entries.items()})

    def is_constant(self) -> TateTwist | None:
        values = set(self.entries.values())
        return values.pop() if len(values) == 1 else None

    def constant_difference(self, other: "PhiFingerprint") -> TateTwist | None:
        return (self - other).is_constant()

    def render(self) -> str:
        return "; ".join(f"{t}: {self.entries[t].render()}" for t in self.tokens())

    def to_json(self) -> dict:
        return {t: self.entries[t].to_json() for t in self.tokens()}

    @staticmethod
    def from_json(data: dict) -> "PhiFingerprint":
        return PhiFingerprint({t: TateTwist.from_json(v) for t, v in data.items()})
