"""Exact algebra of nondegenerate quadratic forms.

Real-backend forms are stored as signature pairs (pos, neg): over a
real-closed base field the signature is a complete invariant, and every
formula downstream consumes only dimensions and Witt indices.  Declared
forms are opaque tokens whose Witt behaviour lives in a declared model
table.

Sign conventions: -q swaps (p, m) -> (m, p); <1> adds (1, 0).  This makes
prime(q) = <1> + (-q) a map with prime(prime(q)) = q + hyperbolic plane.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ModelError

REAL = "real"
DECLARED = "declared"


@dataclass(frozen=True, order=True)
class QuadraticForm:
    """A nondegenerate quadratic form: real signature or declared token."""

    kind: str
    pos: int = 0
    neg: int = 0
    ident: str = ""
    declared_dim: int = 0

    @staticmethod
    def real(pos: int, neg: int) -> "QuadraticForm":
        if pos < 0 or neg < 0 or pos + neg < 1:
            raise ValueError(f"invalid signature ({pos},{neg})")
        return QuadraticForm(REAL, pos=pos, neg=neg)

    @staticmethod
    def declared(ident: str, dim: int) -> "QuadraticForm":
        if not ident:
            raise ValueError("declared form needs a nonempty id")
        if dim < 1:
            raise ValueError(f"declared form {ident!r} needs dim >= 1")
        return QuadraticForm(DECLARED, ident=ident, declared_dim=dim)

    @property
    def is_real(self) -> bool:
        return self.kind == REAL

    @property
    def dim(self) -> int:
        return self.pos + self.neg if self.is_real else self.declared_dim

    @property
    def key(self) -> str:
        """Stable identifier: "(p,m)" for real forms, the token otherwise."""
        return f"({self.pos},{self.neg})" if self.is_real else self.ident

    def negated(self) -> "QuadraticForm":
        if not self.is_real:
            raise ModelError(f"cannot negate declared form {self.key}")
        return QuadraticForm.real(self.neg, self.pos)

    def __repr__(self) -> str:
        return f"QuadraticForm[{self.key}]"


def real_form_from_key(key: str) -> QuadraticForm:
    """Parse "(p,m)" back into a real form."""
    body = key.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise ValueError(f"not a real form literal: {key!r}")
    try:
        p, m = (int(part) for part in body[1:-1].split(","))
    except Exception as exc:
        raise ValueError(f"not a real form literal: {key!r}") from exc
    return QuadraticForm.real(p, m)


def orthogonal_sum(a: QuadraticForm, b: QuadraticForm) -> QuadraticForm:
    """Orthogonal sum; real signatures add componentwise.

    >>> orthogonal_sum(QuadraticForm.real(2, 1), QuadraticForm.real(1, 1))
    QuadraticForm[(3,2)]

    Declared forms would need a declared sum registered in the model, and
    the declared model schema provides none, so any declared operand is an
    error.
    """
    if a.is_real and b.is_real:
        return QuadraticForm.real(a.pos + b.pos, a.neg + b.neg)
    raise ModelError(
        f"no declared orthogonal sum for {a.key} + {b.key}; "
        "declared models carry no sum table"
    )


def prime(q: QuadraticForm) -> QuadraticForm:
    """q' = <1> + (-q); on real signatures (p, m) -> (m+1, p).

    >>> prime(QuadraticForm.real(0, 2))
    QuadraticForm[(3,0)]
    >>> prime(prime(QuadraticForm.real(1, 1)))   # adds one hyperbolic plane
    QuadraticForm[(2,2)]

    Declared forms resolve their prime through the model's prime links
    (ExtensionLattice.prime_of).
    """
    if not q.is_real:
        raise ModelError(
            f"prime of declared form {q.key} must come from the model's prime link"
        )
    return QuadraticForm.real(q.neg + 1, q.pos)


def pfister_real(r: int) -> QuadraticForm:
    """The r-fold Pfister form <<-1,...,-1>> over the real base: 2^r * <1>.

    >>> pfister_real(3)
    QuadraticForm[(8,0)]
    """
    if r < 1:
        raise ValueError(f"Pfister fold must be >= 1, got {r}")
    return QuadraticForm.real(2**r, 0)


HYPERBOLIC_PLANE = QuadraticForm.real(1, 1)


@dataclass(frozen=True, order=True)
class ProjectiveQuadric:
    """The smooth projective quadric {q = 0}; dim = dim(q) - 2.

    {q = 0} and {-q = 0} are the same variety, so the identity of a real
    quadric is the sign-canonical signature (larger coordinate first).
    Dimension-1 forms give the empty quadric (dim -1).
    """

    form: QuadraticForm

    @property
    def dim(self) -> int:
        return self.form.dim - 2

    @property
    def is_empty(self) -> bool:
        return self.dim < 0

    @property
    def canonical_form(self) -> QuadraticForm:
        q = self.form
        if q.is_real and q.neg > q.pos:
            return q.negated()
        return q

    @property
    def key(self) -> str:
        return self.canonical_form.key

    def __repr__(self) -> str:
        return f"Quadric[{self.key}]"


@dataclass(frozen=True, order=True)
class Grassmannian:
    """G(Q, n): n-dimensional projective subspaces on the quadric Q."""

    quadric: ProjectiveQuadric
    planes: int

    def __post_init__(self) -> None:
        if self.planes < 0 or 2 * self.planes > self.quadric.dim:
            raise ValueError(
                f"G({self.quadric.key},{self.planes}): plane level out of range"
            )

    @property
    def key(self) -> tuple[str, int]:
        return (self.quadric.key, self.planes)

    def __repr__(self) -> str:
        return f"G[{self.quadric.key},{self.planes}]"


@dataclass(frozen=True)
class GWClass:
    """Witt-decomposed presentation q = anisotropic + rank * hyperbolic.

    The rank may be negative for formal Grothendieck-Witt classes; the
    normalizer below only produces nonnegative ranks.
    """

    anisotropic: QuadraticForm | None
    hyperbolic_rank: int

    @property
    def anisotropic_dim(self) -> int:
        return self.anisotropic.dim if self.anisotropic is not None else 0


def gw_normalize(q: QuadraticForm, model, extension) -> GWClass:
    """Witt decomposition of q over the given extension of the model."""
    return GWClass(
        anisotropic=model.anisotropic_part(q, extension),
        hyperbolic_rank=model.witt_index(q, extension),
    )
