"""Indecomposable summand classes and motivic decompositions of quadrics.

Summand classes are keyed by the quadratic Grassmannian of the lowest Tate
constituent and identified up to Tate shift; two keys name the same class
exactly when their Grassmannians are stably birational.  Canonical
representatives come from a union-find over that oracle with the smallest
key as root, so class ids are reproducible across runs.

Real quadrics decompose by the excellent-form recursion: strip the base
hyperbolic part as Tate pairs, then peel Pfister-neighbour blocks of rank-2
summands (kind rost:r, the two constituents sitting at T and
T(2^(r-1)-1)[2^r-2]), recursing on the complementary dimension.  The
recursion is not assumed correct: the Witt-consistency invariant ties it to
the level model at every extension and is part of the test suite.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import ModelError
from .forms import (
    DECLARED,
    REAL,
    Grassmannian,
    ProjectiveQuadric,
    QuadraticForm,
    pfister_real,
)
from .twists import TateTwist

ROST = "rost"
DECLARED_KIND = "declared"


@dataclass(frozen=True, order=True)
class ClassKey:
    """(quadric id, plane level) naming a quadratic Grassmannian."""

    quadric: str
    planes: int

    @property
    def sort_key(self) -> tuple:
        return (len(self.quadric), self.quadric, self.planes)

    def render(self) -> str:
        return f"{self.quadric}#{self.planes}"

    def to_json(self) -> dict:
        return {"quadric": self.quadric, "planes": self.planes}

    @staticmethod
    def from_json(data: dict) -> "ClassKey":
        return ClassKey(data["quadric"], int(data["planes"]))


@dataclass(frozen=True)
class IndecomposableClass:
    """A stable-birational class, held by its canonical representative."""

    key: ClassKey

    def render(self) -> str:
        return self.key.render()


def _find(model, key: ClassKey) -> ClassKey:
    parents = model.class_parents
    root = key
    while parents.get(root, root) != root:
        root = parents[root]
    while parents.get(key, key) != key:
        parents[key], key = root, parents[key]
    return root


def _union(model, a: ClassKey, b: ClassKey) -> ClassKey:
    ra, rb = _find(model, a), _find(model, b)
    if ra == rb:
        return ra
    keep, drop = (ra, rb) if ra.sort_key < rb.sort_key else (rb, ra)
    model.class_parents[drop] = keep
    return keep


def _grassmannian(model, key: ClassKey) -> Grassmannian:
    return Grassmannian(ProjectiveQuadric(model.form(key.quadric)), key.planes)


def canonical_class(model, key: ClassKey) -> IndecomposableClass:
    """Resolve a Grassmannian key to its canonical class in this model.

    New keys are compared against every existing root through the
    stable-birational oracle (smallest-key roots win the merge).
    """
    parents = model.class_parents
    if key not in parents:
        roots = sorted(
            {r for r in (_find(model, k) for k in list(parents)) if r != key},
            key=lambda k: k.sort_key,
        )
        parents.setdefault(key, key)
        mine = _grassmannian(model, key)
        for root in roots:
            if model.stably_birational(mine, _grassmannian(model, root)):
                _union(model, key, root)
                break
    return IndecomposableClass(_find(model, key))


@dataclass(frozen=True, order=True)
class Summand:
    """One indecomposable anisotropic summand instance: class, shift, kind."""

    cls: ClassKey
    shift: int
    kind: str

    @property
    def rost_degree(self) -> int | None:
        if self.kind.startswith(f"{ROST}:"):
            return int(self.kind.split(":", 1)[1])
        return None

    def to_json(self) -> dict:
        return {"class": self.cls.to_json(), "shift": self.shift, "kind": self.kind}

    @staticmethod
    def from_json(data: dict) -> "Summand":
        return Summand(ClassKey.from_json(data["class"]), int(data["shift"]), data["kind"])


@dataclass(frozen=True)
class Decomposition:
    """Tate summands plus anisotropic rank-2 summands of one quadric motive."""

    quadric: str
    tates: tuple[TateTwist, ...]
    summands: tuple[Summand, ...]

    @staticmethod
    def make(quadric: str, tates, summands) -> "Decomposition":
        return Decomposition(quadric, tuple(sorted(tates)), tuple(sorted(summands)))

    def expected_rank(self, form_dim: int) -> int:
        return form_dim if form_dim % 2 == 0 else form_dim - 1

    def rank(self) -> int:
        return 2 * len(self.summands) + len(self.tates)

    def to_json(self) -> dict:
        return {
            "tates": [t.to_json() for t in self.tates],
            "summands": [s.to_json() for s in self.summands],
        }

    @staticmethod
    def from_json(quadric: str, data: dict) -> "Decomposition":
        return Decomposition.make(
            quadric,
            [TateTwist.from_json(t) for t in data.get("tates", [])],
            [Summand.from_json(s) for s in data.get("summands", [])],
        )


def _rost_class(model, r: int) -> IndecomposableClass:
    key = ClassKey(ProjectiveQuadric(pfister_real(r)).key, 0)
    return canonical_class(model, key)


def _excellent_blocks(model, dim: int, shift: int) -> list[Summand]:
    """Rost blocks of an anisotropic definite form of the given dimension."""
    out = []
    while dim >= 2:
        r = (dim - 1).bit_length()
        first_witt = dim - (1 << (r - 1))
        cls = _rost_class(model, r).key
        for i in range(first_witt):
            out.append(Summand(cls, shift + i, f"{ROST}:{r}"))
        shift += first_witt
        dim = (1 << r) - dim
    return out


def decompose_real(q: QuadraticForm, model) -> Decomposition:
    """Decompose the motive of the real quadric {q = 0}; registers the result.

    Registration is idempotent per quadric; reads of the registry are safe
    alongside registration.
    """
    if model.backend != REAL:
        raise ModelError(
            "no canonical decomposition outside the real backend; "
            "use declare_decomposition with explicit summand data"
        )
    if not q.is_real or q.dim < 2:
        raise ModelError(f"decompose_real needs a real form of dim >= 2, got {q.key}")
    quadric = ProjectiveQuadric(q)
    existing = model.decompositions.get(quadric.key)
    if existing is not None:
        return existing
    base_witt = model.witt_index(q, model.base)
    m = quadric.dim
    tates = []
    for i in range(base_witt):
        tates.append(TateTwist(i, 2 * i))
        tates.append(TateTwist(m - i, 2 * (m - i)))
    summands = _excellent_blocks(model, q.dim - 2 * base_witt, base_witt)
    result = Decomposition.make(quadric.key, tates, summands)
    _check_rank(result, q.dim)
    model.decompositions[quadric.key] = result
    return result


def _check_rank(dec: Decomposition, form_dim: int) -> None:
    expected = dec.expected_rank(form_dim)
    if dec.rank() != expected:
        raise ModelError(
            f"decomposition of {dec.quadric} covers rank {dec.rank()}, "
            f"motive has rank {expected}"
        )


def declare_decomposition(q: QuadraticForm, data, model) -> Decomposition:
    """Register externally supplied summand data for a declared quadric.

    Classes are resolved through the stable-birational oracle; the rank
    bookkeeping must close exactly.  Redeclaring with identical data is a
    no-op, conflicting data is an error.
    """
    if model.backend != DECLARED:
        raise ModelError("declare_decomposition is for declared models")
    quadric = ProjectiveQuadric(q)
    dec = data if isinstance(data, Decomposition) else Decomposition.from_json(quadric.key, data)
    resolved = []
    for s in dec.summands:
        if s.cls.quadric not in model.form_keys():
            raise ModelError(f"summand class over unknown quadric {s.cls.quadric!r}")
        resolved.append(Summand(canonical_class(model, s.cls).key, s.shift, s.kind))
    result = Decomposition.make(quadric.key, dec.tates, resolved)
    _check_rank(result, q.dim)
    existing = model.decompositions.get(quadric.key)
    if existing is not None:
        if existing != result:
            raise ModelError(f"conflicting decomposition redeclared for {quadric.key}")
        return existing
    model.decompositions[quadric.key] = result
    return result


def registered_decomposition(quadric: ProjectiveQuadric, model) -> Decomposition:
    """Fetch (or, on the real backend, compute) the decomposition of M(Q)."""
    if quadric.is_empty:
        return Decomposition.make(quadric.key, [], [])
    existing = model.decompositions.get(quadric.key)
    if existing is not None:
        return existing
    if model.backend == REAL:
        return decompose_real(quadric.canonical_form, model)
    raise ModelError(f"no declared decomposition registered for {quadric.key}")


def tate_counts(summand: Summand, extension, model) -> tuple[list[int], list[int]]:
    """Upper and lower Tate positions split off a summand at an extension.

    A rost:r block splits exactly when the r-fold definite Pfister form is
    hyperbolic there; the two constituents then sit at shift + 2^(r-1) - 1
    (upper) and shift (lower).  Declared summands carry no constituent
    gradings, so they have no computable counts.
    """
    r = summand.rost_degree
    if r is None:
        raise ModelError(
            f"summand {summand.cls.render()} has no constituent grading data"
        )
    if model.backend != REAL:
        raise ModelError("rost summand counts need the real backend")
    split = model.witt_index(pfister_real(r), extension) == 2 ** (r - 1)
    if not split:
        return ([], [])
    return ([summand.shift + 2 ** (r - 1) - 1], [summand.shift])


def class_vector(decs) -> Counter:
    """Multiset of (canonical class, kind) over anisotropic summands."""
    counts: Counter = Counter()
    for dec in decs:
        for s in dec.summands:
            counts[(s.cls, s.kind)] += 1
    return counts


def t_equivalent(a, b, model=None) -> bool:
    """Tate-shift equivalence: same multiset of summand classes, Tates ignored."""
    va, vb = class_vector(a), class_vector(b)
    if model is not None:
        va = Counter({(_find(model, cls), kind): n for (cls, kind), n in va.items()})
        vb = Counter({(_find(model, cls), kind): n for (cls, kind), n in vb.items()})
    return va == vb
