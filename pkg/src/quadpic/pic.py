"""Normal forms and algorithms on the Picard subgroup.

Elements are formal words in the generators e^q (plus, on declared models,
atomic det(Q) generators) together with an explicit Tate twist.  Two
independent equality routes exist:

* det-vector route (exact): the class vector of the word over
  indecomposable summand classes decides equality modulo Tate twists, and
  the base fingerprint entry then pins the twist itself.
* fingerprint route (model-relative for equality, exact for inequality):
  pointwise twist values over the lattice, plus a formal closure value
  computed from dimensions alone.

Real-backend algorithms that need a separating lattice (relations, the
motivic-equivalence criterion, the real basis) first materialize the full
generic splitting towers of every form involved; in the level model those
towers isolate each Rost class at its splitting level.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .decomp import (
    _find,
    class_vector,
    registered_decomposition,
    t_equivalent,
)
from .errors import DisagreementError, ModelError
from .forms import (
    REAL,
    Grassmannian,
    ProjectiveQuadric,
    QuadraticForm,
    pfister_real,
)
from .twists import PhiFingerprint, TateTwist, ZERO_TWIST, phi_affine, phi_det, split_quadric_sum

GEN_E = "e"
GEN_DET = "det"

Atom = tuple[str, str]


def _atom_sort_key(atom: Atom):
    gen, key = atom
    return (gen, len(key), key)


def _form_sort_key(key: str):
    return (len(key), key)


class PicElement:
    """An element of the Picard subgroup, bound to one lattice."""

    __slots__ = ("model", "tate", "word", "_fp_cache")

    def __init__(self, model, tate: TateTwist = ZERO_TWIST, word=()):
        self.model = model
        self.tate = tate
        items = dict(word)
        self.word = tuple(
            sorted(((a, c) for a, c in items.items() if c != 0), key=lambda ac: _atom_sort_key(ac[0]))
        )
        self._fp_cache = None

    # ------------------------------------------------------------- algebra

    def _require_same_model(self, other: "PicElement") -> None:
        if self.model is not other.model:
            raise ModelError("elements over different lattices cannot be combined")

    def __mul__(self, other: "PicElement") -> "PicElement":
        self._require_same_model(other)
        merged = Counter(dict(self.word))
        merged.update(dict(other.word))
        return PicElement(self.model, self.tate + other.tate, merged)

    def __pow__(self, k: int) -> "PicElement":
        return PicElement(
            self.model, k * self.tate, {a: k * c for a, c in self.word}
        )

    def inverse(self) -> "PicElement":
        return self**-1

    def is_identity_word(self) -> bool:
        return not self.word and not self.tate

    # -------------------------------------------------------------- values

    def _atom_value(self, atom: Atom, token: str) -> TateTwist:
        gen, key = atom
        if gen == GEN_E:
            return phi_affine(self.model.form(key), token, self.model)
        return phi_det(ProjectiveQuadric(self.model.form(key)), token, self.model)

    def _atom_closure(self, atom: Atom) -> TateTwist:
        gen, key = atom
        n = self.model.form(key).dim
        if gen == GEN_E:
            return TateTwist(n // 2, n)
        return split_quadric_sum(n - 2, n // 2)

    def value_at(self, token: str) -> TateTwist:
        total = self.tate
        for atom, coeff in self.word:
            total = total + coeff * self._atom_value(atom, token)
        return total

    def base_value(self) -> TateTwist:
        return self.value_at(self.model.base)

    def closure_value(self) -> TateTwist:
        """Formal twist value over the algebraic closure (all forms split)."""
        total = self.tate
        for atom, coeff in self.word:
            total = total + coeff * self._atom_closure(atom)
        return total

    def fingerprint(self) -> PhiFingerprint:
        tokens = tuple(self.model.extension_tokens())
        if self._fp_cache is not None and self._fp_cache[0] == tokens:
            return self._fp_cache[1]
        fp = PhiFingerprint({t: self.value_at(t) for t in tokens})
        self._fp_cache = (tokens, fp)
        return fp

    # ---------------------------------------------------------- det vector

    def _atom_class_vector(self, atom: Atom) -> Counter | None:
        gen, key = atom
        form = self.model.form(key)
        try:
            if gen == GEN_DET:
                return class_vector([registered_decomposition(ProjectiveQuadric(form), self.model)])
            plus = class_vector(
                [registered_decomposition(ProjectiveQuadric(self.model.prime_of(form)), self.model)]
            )
            minus = class_vector([registered_decomposition(ProjectiveQuadric(form), self.model)])
            plus.subtract(minus)
            return plus
        except ModelError:
            return None

    def det_vector(self) -> Counter | None:
        """Z-vector over (canonical class, kind), or None if data is missing."""
        total: Counter = Counter()
        for atom, coeff in self.word:
            vec = self._atom_class_vector(atom)
            if vec is None:
                return None
            for cls_kind, n in vec.items():
                total[cls_kind] += coeff * n
        return Counter(
            {(_find(self.model, cls), kind): n for (cls, kind), n in total.items() if n != 0}
        )

    # ------------------------------------------------------------ equality

    def equality(self, other: "PicElement") -> "EqualityVerdict":
        self._require_same_model(other)
        diff = self * other**-1
        vec = diff.det_vector()
        if vec is not None:
            if vec:
                return EqualityVerdict(False, True, "class vectors differ")
            if diff.base_value():
                return EqualityVerdict(False, True, "Tate parts differ at the base")
            return EqualityVerdict(True, True, "class vector and base twist agree")
        if diff.closure_value():
            return EqualityVerdict(False, True, "closure twist values differ")
        for token in self.model.extension_tokens():
            if diff.value_at(token):
                return EqualityVerdict(False, True, f"twist values differ at {token}")
        return EqualityVerdict(
            True, False, "fingerprints agree on every registered extension"
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, PicElement):
            return NotImplemented
        return self.equality(other).equal

    __hash__ = None

    # --------------------------------------------------------------- views

    def render(self) -> str:
        parts = []
        if self.tate or not self.word:
            parts.append(f"T{self.tate.render()}")
        for (gen, key), coeff in self.word:
            power = "" if coeff == 1 else f"^{coeff}"
            parts.append(f"{gen}[{key}]{power}")
        return " * ".join(parts)

    def __repr__(self) -> str:
        return f"Pic({self.render()})"

    def to_json(self) -> dict:
        return {
            "tate": self.tate.to_json(),
            "word": [
                {"gen": gen, "form": key, "coeff": coeff}
                for (gen, key), coeff in self.word
            ],
        }


@dataclass(frozen=True)
class EqualityVerdict:
    equal: bool
    exact: bool
    reason: str

    @property
    def model_relative(self) -> bool:
        return not self.exact


def fingerprint(x: PicElement) -> PhiFingerprint:
    """Twist values of x at every extension of its lattice, base included."""
    return x.fingerprint()


# ---------------------------------------------------------------- builders


def identity(model) -> PicElement:
    return PicElement(model)


def tate_element(model, twist: TateTwist) -> PicElement:
    return PicElement(model, tate=twist)


def generator_e(q: QuadraticForm, model) -> PicElement:
    """The generator e^q (the shifted reduced motive of {q = 1})."""
    if q.is_real:
        model.register_form(q)
    elif q.key not in model.form_keys():
        raise ModelError(f"declared form {q.key} is not registered")
    return PicElement(model, word={(GEN_E, q.key): 1})


def _step_generator(upper: QuadraticForm, drop_pos: bool) -> QuadraticForm:
    """Generator of the affine complement of one flag step below `upper`."""
    if drop_pos:
        return QuadraticForm.real(upper.neg, upper.pos - 1)
    return QuadraticForm.real(upper.pos, upper.neg - 1)


def _default_drop(form: QuadraticForm) -> bool:
    """Flag rule: larger signature coordinate first, ties toward positive."""
    if form.pos == 0:
        return False
    if form.neg == 0:
        return True
    return form.pos >= form.neg


def det(quadric: ProjectiveQuadric, model, flag=None) -> PicElement:
    """det(Q): product of step generators along a complete flag of subquadrics.

    The real backend expands through an explicit flag (the default one
    decrements the larger signature coordinate first); any valid flag yields
    the same element.  Declared quadrics carry no subform structure, so
    their det stays an atomic generator.
    """
    form = quadric.form
    if not form.is_real:
        if flag is not None:
            raise ModelError("declared quadrics admit no flag data")
        if form.key not in model.form_keys():
            raise ModelError(f"declared form {form.key} is not registered")
        return PicElement(model, word={(GEN_DET, form.key): 1})
    if quadric.is_empty:
        if flag:
            raise ModelError("the empty quadric admits no flag")
        return identity(model)
    chain = list(flag) if flag is not None else None
    if chain is not None:
        _validate_flag(form, chain)
    word: Counter = Counter()
    current = form
    step = 0
    while current.dim >= 2:
        if chain is not None and step < len(chain):
            lower = chain[step]
            drop_pos = lower.pos == current.pos - 1
        else:
            drop_pos = _default_drop(current)
        gen = _step_generator(current, drop_pos)
        model.register_form(gen)
        word[(GEN_E, gen.key)] += 1
        current = (
            QuadraticForm.real(current.pos - 1, current.neg)
            if drop_pos
            else QuadraticForm.real(current.pos, current.neg - 1)
        )
        step += 1
    return PicElement(model, word=word)


def _validate_flag(top: QuadraticForm, chain) -> None:
    current = top
    for entry in chain:
        if not entry.is_real:
            raise ModelError("flags are chains of real subforms")
        ok_pos = (entry.pos, entry.neg) == (current.pos - 1, current.neg)
        ok_neg = (entry.pos, entry.neg) == (current.pos, current.neg - 1)
        if not (ok_pos or ok_neg):
            raise ModelError(
                f"flag entry {entry.key} is not a codimension-1 subform of {current.key}"
            )
        current = entry
    if current.dim < 1:
        raise ModelError("flag descends below dimension 1")
    if current.dim > 2:
        raise ModelError(
            f"flag is not complete: it stops at dimension {current.dim}"
        )


def all_flags(form: QuadraticForm):
    """Every complete signature-decrement flag below a real form (as chains)."""
    if form.dim <= 1:
        yield []
        return
    if form.pos > 0:
        lower = QuadraticForm.real(form.pos - 1, form.neg)
        for rest in all_flags(lower):
            yield [lower] + rest
    if form.neg > 0:
        lower = QuadraticForm.real(form.pos, form.neg - 1)
        for rest in all_flags(lower):
            yield [lower] + rest


# ------------------------------------------------------------- inverse law


@dataclass(frozen=True)
class InverseCheckReport:
    form: str
    expected: TateTwist
    failures: tuple[tuple[str, TateTwist], ...]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "form": self.form,
            "expected": self.expected.to_json(),
            "ok": self.ok,
            "failures": [
                {"extension": t, "value": v.to_json()} for t, v in self.failures
            ],
        }


def inverse_identity_check(q: QuadraticForm, model) -> InverseCheckReport:
    """Verify e^q * e^{q'} is the constant Tate twist (n)[2n+1], n = dim(q)."""
    q_prime = model.prime_of(q)
    product = generator_e(q, model) * generator_e(q_prime, model)
    expected = TateTwist(q.dim, 2 * q.dim + 1)
    failures = []
    for token in model.extension_tokens():
        value = product.value_at(token)
        if value != expected:
            failures.append((token, value))
    return InverseCheckReport(q.key, expected, tuple(failures))


# ---------------------------------------------------------- independence


@dataclass(frozen=True)
class CertificateStep:
    form: str
    witness: str
    twist: TateTwist

    def to_json(self) -> dict:
        return {"form": self.form, "witness": self.witness, "twist": self.twist.to_json()}


@dataclass(frozen=True)
class Certificate:
    steps: tuple[CertificateStep, ...]

    @property
    def independent(self) -> bool:
        return True

    @property
    def order(self) -> tuple[str, ...]:
        return tuple(s.form for s in self.steps)

    def to_json(self) -> dict:
        return {"independent": True, "order": [s.to_json() for s in self.steps]}


@dataclass(frozen=True)
class Refusal:
    reasons: tuple[str, ...]
    pairs: tuple[tuple[str, str], ...]

    @property
    def independent(self) -> bool:
        return False

    def to_json(self) -> dict:
        return {
            "independent": False,
            "refused": True,
            "reasons": list(self.reasons),
            "pairs": [list(p) for p in self.pairs],
        }


def independent(qs, model):
    """Certify linear independence of {e^q} or refuse with the violated
    hypothesis.

    Preconditions are checked, never assumed: every prime must be
    anisotropic over the base, and the primes must be pairwise not stably
    birational (compared through their anisotropic kernels, so degenerate
    families such as {q, q + hyperbolic} name the offending pair).  A
    refusal is not a judgement of dependence.
    """
    forms = list(qs)
    reasons: list[str] = []
    pairs: list[tuple[str, str]] = []
    primes = [model.prime_of(q) for q in forms]
    kernels = [model.anisotropic_part(p, model.base) for p in primes]
    for q, p in zip(forms, primes):
        if model.witt_index(p, model.base) > 0:
            reasons.append(f"prime {p.key} of {q.key} is isotropic over the base")
    for i in range(len(forms)):
        for j in range(i + 1, len(forms)):
            if _kernels_equivalent(model, kernels[i], kernels[j]):
                pairs.append((forms[i].key, forms[j].key))
                reasons.append(
                    f"primes of {forms[i].key} and {forms[j].key} are stably birational"
                )
    if reasons:
        return Refusal(tuple(reasons), tuple(pairs))

    witness = {
        q.key: model.extend_by_function_field(model.base, ProjectiveQuadric(p))
        for q, p in zip(forms, primes)
    }
    edges: dict[str, set[str]] = {q.key: set() for q in forms}
    by_key = {q.key: (q, p) for q, p in zip(forms, primes)}
    for qi in forms:
        for qj in forms:
            if qi.key == qj.key:
                continue
            if model.witt_index(by_key[qj.key][1], witness[qi.key]) > 0:
                edges[qi.key].add(qj.key)

    remaining = set(edges)
    steps = []
    while remaining:
        sinks = sorted(
            (k for k in remaining if not (edges[k] & (remaining - {k}))),
            key=_form_sort_key,
        )
        if not sinks:
            return Refusal(
                (f"rational-map graph has a cycle among {sorted(remaining)}",), ()
            )
        key = sinks[0]
        q = by_key[key][0]
        twist = phi_affine(q, witness[key], model) - phi_affine(q, model.base, model)
        if not twist:
            raise DisagreementError(
                f"witness {witness[key]} fails to move e^{key}: broken model"
            )
        steps.append(CertificateStep(key, witness[key], twist))
        remaining.discard(key)
    return Certificate(tuple(steps))


def _kernels_equivalent(model, a: QuadraticForm | None, b: QuadraticForm | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    qa, qb = ProjectiveQuadric(a), ProjectiveQuadric(b)
    if qa.key == qb.key:
        return True
    if a.dim < 2 or b.dim < 2:
        return False
    # synthetic kernels of isotropic declared forms have no function field in
    # the table; their isotropy is already a named violation on its own
    for kernel in (a, b):
        if not kernel.is_real and kernel.key not in model.form_keys():
            return False
    return model.stably_birational(Grassmannian(qa, 0), Grassmannian(qb, 0))


# ---------------------------------------------------------------- relations


@dataclass(frozen=True)
class RelationsVerdict:
    fingerprint_equal_mod_tate: bool
    tate_equivalent: bool

    @property
    def agree(self) -> bool:
        return self.fingerprint_equal_mod_tate == self.tate_equivalent

    def to_json(self) -> dict:
        return {
            "fingerprint_equal_mod_tate": self.fingerprint_equal_mod_tate,
            "tate_equivalent": self.tate_equivalent,
        }


def _ensure_towers(model, forms) -> None:
    if model.backend == REAL:
        for q in forms:
            model.ensure_splitting_tower(q)


def det_product(quadrics, model) -> PicElement:
    out = identity(model)
    for quadric in quadrics:
        out = out * det(quadric, model)
    return out


def relations_check(ps, qs, model) -> RelationsVerdict:
    """Cross-check the two relation criteria for det-products.

    (1) fingerprint equality modulo one constant Tate twist, the constant
    also matching the formal closure values; (2) Tate-shift equivalence of
    the registered decompositions.  The two verdicts must agree; if they do
    not, the model or a decomposition is broken and that is a hard error.
    """
    ps, qs = list(ps), list(qs)
    decs_p = [registered_decomposition(P, model) for P in ps]
    decs_q = [registered_decomposition(Q, model) for Q in qs]
    _ensure_towers(model, [P.canonical_form for P in ps + qs])
    x = det_product(ps, model)
    y = det_product(qs, model)
    constant = x.fingerprint().constant_difference(y.fingerprint())
    fp_verdict = constant is not None and (
        x.closure_value() - y.closure_value() == constant
    )
    tequiv = t_equivalent(decs_p, decs_q, model)
    if fp_verdict != tequiv:
        raise DisagreementError(
            "relation criteria disagree "
            f"(fingerprints: {fp_verdict}, summand classes: {tequiv}); "
            "the model or a registered decomposition is broken"
        )
    return RelationsVerdict(fp_verdict, tequiv)


# ---------------------------------------------------- motivic equivalence


def motivically_equivalent(p: ProjectiveQuadric, q: ProjectiveQuadric, model) -> bool:
    """Same motive: identical Witt profiles, cross-checked against det equality."""
    _ensure_towers(model, [p.canonical_form, q.canonical_form])
    witt_route = p.dim == q.dim and all(
        model.witt_index(p.canonical_form, t) == model.witt_index(q.canonical_form, t)
        for t in model.extension_tokens()
    )
    det_route = det(p, model).equality(det(q, model)).equal
    if witt_route != det_route:
        raise DisagreementError(
            f"equivalence criteria disagree for {p.key} vs {q.key} "
            f"(profiles: {witt_route}, det: {det_route})"
        )
    return witt_route


# ------------------------------------------------------------- real basis


@dataclass(frozen=True)
class BasisExpansion:
    """Coordinates over the definite Pfister generators, plus a Tate twist."""

    coords: tuple[tuple[int, int], ...]
    tate: TateTwist

    def coefficient(self, r: int) -> int:
        return dict(self.coords).get(r, 0)

    def to_json(self) -> dict:
        return {
            "coords": [{"fold": r, "coeff": c} for r, c in self.coords],
            "tate": self.tate.to_json(),
        }


def basis_real(x: PicElement, maxr: int) -> BasisExpansion:
    """Expand x over {e^(2^r * <1>)}, r <= maxr, by size-descending elimination.

    The largest Pfister degree present in the class vector is peeled with
    the corresponding generator; the result is verified by exact fingerprint
    equality (after materializing the splitting towers involved), so a wrong
    expansion cannot be returned.
    """
    model = x.model
    if model.backend != REAL:
        raise ModelError("the Pfister basis exists over the real backend")
    vec = x.det_vector()
    if vec is None:
        raise ModelError("missing decompositions for the basis expansion")
    degrees: dict[int, int] = {}
    for (cls, kind), n in vec.items():
        if not kind.startswith("rost:"):
            raise ModelError(f"non-Rost class {cls.render()} in a real element")
        degrees[int(kind.split(":", 1)[1])] = n

    coords: dict[int, int] = {}
    generators: dict[int, PicElement] = {}
    while degrees:
        r = max(degrees)
        if r > maxr:
            raise ModelError(
                f"insufficient maxr: class of fold {r} present, maxr = {maxr}"
            )
        gen = generator_e(pfister_real(r), model)
        generators[r] = gen
        gen_degrees = {
            int(kind.split(":", 1)[1]): n for (cls, kind), n in gen.det_vector().items()
        }
        lead = gen_degrees[r]
        if degrees[r] % lead != 0:
            raise DisagreementError(f"non-integral elimination at fold {r}")
        c = degrees[r] // lead
        coords[r] = c
        for rr, n in gen_degrees.items():
            degrees[rr] = degrees.get(rr, 0) - c * n
        degrees = {rr: n for rr, n in degrees.items() if n != 0}

    expanded = identity(model)
    for r in sorted(coords):
        expanded = expanded * generators[r] ** coords[r]
    atom_forms = [model.form(key) for (_, key), _ in x.word]
    _ensure_towers(model, atom_forms)
    _ensure_towers(model, [model.prime_of(f) for f in atom_forms])
    _ensure_towers(model, [pfister_real(r) for r in range(1, maxr + 1)])
    twist = x.base_value() - expanded.base_value()
    reexpanded = expanded * tate_element(model, twist)
    if x.fingerprint() != reexpanded.fingerprint():
        raise DisagreementError("basis expansion fails the fingerprint round-trip")
    return BasisExpansion(tuple(sorted(coords.items())), twist)
