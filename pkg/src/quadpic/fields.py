"""Finite extension lattices with Witt-index, rational-point and
stable-birational oracles.

Two backends share one interface:

* real level model -- every extension carries a *level* (a power of two, or
  infinity for the formally real base).  The Witt index of a signature
  (p, m) at level s is computed from the balanced representative of
  p - m mod 2s in (-s, s]: i_W = (p + m - |w|) / 2.  Extending by the
  function field of an anisotropic quadric of dimension d drops the level
  to min(s, 2^(r-1)) where 2^(r-1) < d <= 2^r; isotropic quadrics are
  rational, so their function fields are purely transcendental and keep
  the level.  Joins take the minimum of the constituent levels.

* declared model -- Witt indices come from an explicit table; extensions
  must pre-exist.  Tables are checked by validate() against four invariant
  families (monotonicity, ceiling, codimension-1 step, self-isotropy).

Oracles are pure given a frozen lattice; the real backend grows its node
set append-only and memoizes Witt indices (idempotent writes, safe for
concurrent readers).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ModelError
from .forms import (
    DECLARED,
    REAL,
    Grassmannian,
    ProjectiveQuadric,
    QuadraticForm,
    prime,
    real_form_from_key,
)

INFINITE_LEVEL = float("inf")

CONSTRUCTION_BASE = "base"


@dataclass(frozen=True)
class Extension:
    """A node of the lattice.

    construction is one of:
      "base"                       -- the ground field
      "ff:<form-id>"               -- function field of the quadric {form = 0}
      "gff:<form-id>:<n>"          -- function field of the Grassmannian G(Q, n)
      "join:<tok>|<tok>|..."       -- function field of a product
    """

    token: str
    parent: str | None
    construction: str


def _balanced(value: int, level) -> int:
    """Representative of value mod 2*level in the interval (-level, level]."""
    if level == INFINITE_LEVEL:
        return value
    modulus = 2 * int(level)
    r = value % modulus
    if r > level:
        r -= modulus
    return r


def _power_of_two_below(d: int) -> int:
    """The 2^(r-1) with 2^(r-1) < d <= 2^r, for d >= 2."""
    return 1 << ((d - 1).bit_length() - 1)


@dataclass(frozen=True)
class Violation:
    family: str
    form: str
    extension: str
    detail: str

    def render(self) -> str:
        return f"[{self.family}] form {self.form} at {self.extension}: {self.detail}"

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "form": self.form,
            "extension": self.extension,
            "detail": self.detail,
        }


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __iter__(self):
        return iter(self.violations)

    def render(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(v.render() for v in self.violations)

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_json() for v in self.violations]}


class ExtensionLattice:
    """Finite poset of field extensions with a Witt-index oracle."""

    def __init__(self, backend: str):
        if backend not in (REAL, DECLARED):
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        self._extensions: dict[str, Extension] = {}
        self._levels: dict[str, float] = {}
        self._witt: dict[tuple[str, str], int] = {}
        self._forms: dict[str, QuadraticForm] = {}
        self._prime_links: dict[str, str] = {}
        self._base: str | None = None
        self._witt_cache: dict[tuple[str, str], int] = {}
        self._twist_cache: dict[tuple, object] = {}
        self._ancestor_cache: dict[str, frozenset[str]] = {}
        # registries used by the decomposition layer (see decomp.py)
        self.decompositions: dict[str, object] = {}
        self.class_parents: dict = {}

    # ----------------------------------------------------------- structure

    @property
    def base(self) -> str:
        if self._base is None:
            raise ModelError("lattice has no base extension")
        return self._base

    def add_extension(self, ext: Extension, level=None) -> str:
        if "|" in ext.token:
            raise ModelError(f"extension token {ext.token!r} may not contain '|'")
        existing = self._extensions.get(ext.token)
        if existing is not None:
            if existing != ext:
                raise ModelError(f"extension token {ext.token!r} redeclared differently")
            return ext.token
        if ext.construction == CONSTRUCTION_BASE:
            if self._base is not None:
                raise ModelError("lattice already has a base extension")
            if ext.parent is not None:
                raise ModelError("base extension cannot have a parent")
            self._base = ext.token
        elif ext.parent is not None and ext.parent not in self._extensions:
            raise ModelError(f"unknown parent extension {ext.parent!r}")
        self._extensions[ext.token] = ext
        if self.backend == REAL:
            if level is None:
                raise ModelError("real-backend extension needs a level")
            self._levels[ext.token] = level
        return ext.token

    def extension(self, token: str) -> Extension:
        try:
            return self._extensions[token]
        except KeyError:
            raise ModelError(f"unknown extension {token!r}") from None

    def extension_tokens(self) -> list[str]:
        return sorted(self._extensions)

    def level(self, token: str):
        if self.backend != REAL:
            raise ModelError("levels exist only in the real backend")
        self.extension(token)
        return self._levels[token]

    def register_form(self, q: QuadraticForm, with_prime: bool = True) -> str:
        if self.backend == REAL and not q.is_real:
            raise ModelError(f"declared form {q.key} in a real lattice")
        if self.backend == DECLARED and q.is_real:
            raise ModelError(f"real form {q.key} in a declared lattice")
        self._forms.setdefault(q.key, q)
        if with_prime and q.is_real:
            self._forms.setdefault(prime(q).key, prime(q))
        return q.key

    def form(self, key: str) -> QuadraticForm:
        got = self._forms.get(key)
        if got is None and self.backend == REAL:
            return real_form_from_key(key)
        if got is None:
            raise ModelError(f"unknown form {key!r}")
        return got

    def form_keys(self) -> list[str]:
        return sorted(self._forms)

    def prime_of(self, q: QuadraticForm) -> QuadraticForm:
        if q.is_real:
            return prime(q)
        link = self._prime_links.get(q.key)
        if link is None:
            raise ModelError(f"declared form {q.key} has no prime link")
        return self.form(link)

    def ancestors(self, token: str) -> frozenset[str]:
        """Strict ancestors: parents and join constituents, transitively."""
        cached = self._ancestor_cache.get(token)
        if cached is not None:
            return cached
        ext = self.extension(token)
        parents: set[str] = set()
        if ext.parent is not None:
            parents.add(ext.parent)
        if ext.construction.startswith("join:"):
            parents.update(ext.construction[len("join:"):].split("|"))
        out: set[str] = set()
        for p in parents:
            out.add(p)
            out |= self.ancestors(p)
        result = frozenset(out)
        self._ancestor_cache[token] = result
        return result

    # -------------------------------------------------------------- oracle

    def witt_index(self, q: QuadraticForm, extension) -> int:
        token = extension.token if isinstance(extension, Extension) else extension
        self.extension(token)
        if self.backend == REAL and not q.is_real:
            raise ModelError(f"declared form {q.key} has no real signature")
        if self.backend == DECLARED and q.is_real:
            raise ModelError(f"real form {q.key} is not in the declared table")
        key = (q.key, token)
        cached = self._witt_cache.get(key)
        if cached is not None:
            return cached
        if self.backend == REAL:
            w = _balanced(q.pos - q.neg, self._levels[token])
            result = (q.dim - abs(w)) // 2
        else:
            try:
                result = self._witt[(q.key, token)]
            except KeyError:
                raise ModelError(
                    f"no declared Witt index for form {q.key} at {token}"
                ) from None
        self._witt_cache[key] = result
        return result

    def anisotropic_part(self, q: QuadraticForm, extension) -> QuadraticForm | None:
        """Anisotropic kernel of q over the extension (None for split forms)."""
        token = extension.token if isinstance(extension, Extension) else extension
        if self.backend == REAL:
            if not q.is_real:
                raise ModelError(f"declared form {q.key} has no real signature")
            w = _balanced(q.pos - q.neg, self._levels[self.extension(token).token])
            if w == 0:
                return None
            return QuadraticForm.real(w, 0) if w > 0 else QuadraticForm.real(0, -w)
        hyperbolic = self.witt_index(q, token)
        if hyperbolic == 0:
            return q
        remaining = q.dim - 2 * hyperbolic
        if remaining == 0:
            return None
        return QuadraticForm.declared(f"{q.key}.anis@{token}", remaining)

    # -------------------------------------------------- derived extensions

    def extend_by_function_field(self, extension, quadric: ProjectiveQuadric) -> str:
        """Extension by the function field of a quadric.

        Real backend: creates (or reuses) the node; the level follows the
        level rule above.  Declared backend: the node must pre-exist.
        """
        token = extension.token if isinstance(extension, Extension) else extension
        self.extension(token)
        if quadric.is_empty:
            raise ModelError("cannot take the function field of the empty quadric")
        construction = f"ff:{quadric.key}"
        if self.backend == DECLARED:
            found = self._find_constructed(token, construction)
            if found is None:
                raise ModelError(
                    f"declared model has no extension {construction} over {token}"
                )
            return found
        child = f"{token}/{quadric.key}"
        if child in self._extensions:
            return child
        form = quadric.canonical_form
        self.register_form(form, with_prime=False)
        if self.witt_index(form, token) > 0:
            level = self._levels[token]
        else:
            level = min(self._levels[token], _power_of_two_below(form.dim))
        return self.add_extension(Extension(child, token, construction), level=level)

    def extend_by_join(self, tokens) -> str:
        parts = sorted(tokens)
        if not parts:
            raise ModelError("join of nothing")
        for t in parts:
            self.extension(t)
        construction = "join:" + "|".join(parts)
        if self.backend == DECLARED:
            found = self._find_constructed(None, construction)
            if found is None:
                raise ModelError(f"declared model has no extension {construction}")
            return found
        child = "join(" + "*".join(parts) + ")"
        if child in self._extensions:
            return child
        level = min(self._levels[t] for t in parts)
        return self.add_extension(Extension(child, parts[0], construction), level=level)

    def _find_constructed(self, parent: str | None, construction: str) -> str | None:
        for tok in sorted(self._extensions):
            ext = self._extensions[tok]
            if ext.construction == construction and (
                parent is None or ext.parent == parent
            ):
                return tok
        return None

    def extend_by_grassmannian(self, extension, grass: Grassmannian) -> str:
        """Function field of G(Q, n), via the stably equivalent flag tower.

        G(Q, n) is stably birational to the flag variety F(Q, n), which is an
        iterated quadric fibration; each non-rational fiber is the quadric of
        the current anisotropic kernel.
        """
        token = extension.token if isinstance(extension, Extension) else extension
        form = grass.quadric.canonical_form
        if self.backend == DECLARED:
            construction = (
                f"ff:{form.key}" if grass.planes == 0 else f"gff:{form.key}:{grass.planes}"
            )
            found = self._find_constructed(token, construction)
            if found is None:
                found = self._find_constructed(None, construction)
            if found is None:
                raise ModelError(
                    f"declared model has no extension {construction} for {grass!r}"
                )
            return found
        cur = token
        for t in range(grass.planes + 1):
            if self.witt_index(form, cur) > t:
                continue
            kernel = self.anisotropic_part(form, cur)
            cur = self.extend_by_function_field(cur, ProjectiveQuadric(kernel))
        return cur

    def ensure_splitting_tower(self, q: QuadraticForm) -> list[str]:
        """Generic splitting tower of q from the base; returns its tokens.

        Real backend only (declared lattices are frozen).
        """
        if self.backend != REAL:
            raise ModelError("splitting towers can only be built in the real backend")
        tower = [self.base]
        cur = self.base
        while True:
            kernel = self.anisotropic_part(q, cur)
            if kernel is None or kernel.dim < 2:
                return tower
            cur = self.extend_by_function_field(cur, ProjectiveQuadric(kernel))
            tower.append(cur)

    # ------------------------------------------------------ point oracles

    def has_rational_point(self, quadric: ProjectiveQuadric, n: int, extension) -> bool:
        """Point-existence oracle for the Grassmannian G(Q, n)."""
        if quadric.is_empty or n < 0 or 2 * n > quadric.dim:
            raise ModelError(
                f"G({quadric.key},{n}): plane level out of range for dim {quadric.dim}"
            )
        return self.witt_index(quadric.canonical_form, extension) > n

    def stably_birational(self, x: Grassmannian, y: Grassmannian) -> bool:
        """Mutual rational points over each other's function field."""
        ex = self.extend_by_grassmannian(self.base, x)
        ey = self.extend_by_grassmannian(self.base, y)
        return self.has_rational_point(y.quadric, y.planes, ex) and self.has_rational_point(
            x.quadric, x.planes, ey
        )

    # ---------------------------------------------------------- validation

    def validate(self) -> ValidationReport:
        """Check the four invariant families at every (form, extension)."""
        report = ValidationReport()
        forms = [self._forms[k] for k in self.form_keys()]
        tokens = self.extension_tokens()

        table: dict[tuple[str, str], int] = {}
        for q in forms:
            for tok in tokens:
                try:
                    table[(q.key, tok)] = self.witt_index(q, tok)
                except ModelError as exc:
                    report.violations.append(
                        Violation("table", q.key, tok, str(exc))
                    )
        if not report.ok:
            return report

        for q in forms:
            ceiling = q.dim // 2
            for tok in tokens:
                value = table[(q.key, tok)]
                if value < 0 or value > ceiling:
                    report.violations.append(
                        Violation(
                            "ceiling", q.key, tok,
                            f"i_W = {value} outside [0, {ceiling}]",
                        )
                    )

        for tok in tokens:
            below = self.ancestors(tok)
            for anc in below:
                for q in forms:
                    lo, hi = table[(q.key, anc)], table[(q.key, tok)]
                    if lo > hi:
                        report.violations.append(
                            Violation(
                                "monotonicity", q.key, tok,
                                f"i_W drops from {lo} at {anc} to {hi}",
                            )
                        )

        for q in forms:
            q_prime = self._registered_prime(q)
            if q_prime is None:
                continue
            for tok in tokens:
                low, high = table[(q.key, tok)], table[(q_prime.key, tok)]
                if not (low <= high <= low + 1):
                    report.violations.append(
                        Violation(
                            "codim-1-step", q.key, tok,
                            f"i_W({q.key}) = {low} vs i_W({q_prime.key}) = {high}",
                        )
                    )

        for tok in tokens:
            ext = self._extensions[tok]
            payload = _construction_payload(ext.construction)
            if payload is None:
                continue
            form_key, planes = payload
            try:
                form = self.form(form_key)
                value = self.witt_index(form, tok)
            except (ModelError, ValueError) as exc:
                report.violations.append(
                    Violation("self-isotropy", form_key, tok, f"unresolvable: {exc}")
                )
                continue
            if form.dim < 2:
                continue
            if value <= planes:
                report.violations.append(
                    Violation(
                        "self-isotropy", form.key, tok,
                        f"i_W = {value} over its own function field (need > {planes})",
                    )
                )
        return report

    def _registered_prime(self, q: QuadraticForm) -> QuadraticForm | None:
        if q.is_real:
            q_prime = prime(q)
            return q_prime if q_prime.key in self._forms else None
        link = self._prime_links.get(q.key)
        return self._forms.get(link) if link is not None else None


def _construction_payload(construction: str) -> tuple[str, int] | None:
    if construction.startswith("ff:"):
        return construction[3:], 0
    if construction.startswith("gff:"):
        body, _, n = construction[4:].rpartition(":")
        return body, int(n)
    return None


# ------------------------------------------------------------ real builder


def real_lattice(forms=(), depth: int = 3, base_token: str = "base") -> ExtensionLattice:
    """Joint generic-splitting lattice of the given real forms.

    Nodes are added breadth-first: below each existing node, one function
    field per distinct anisotropic kernel quadric of a registered form, up
    to the given tower depth.
    """
    model = ExtensionLattice(REAL)
    model.add_extension(Extension(base_token, None, CONSTRUCTION_BASE), level=INFINITE_LEVEL)
    for q in forms:
        model.register_form(q)
    frontier = [base_token]
    for _ in range(depth):
        next_frontier = []
        round_keys = model.form_keys()
        for token in frontier:
            for key in round_keys:
                kernel = model.anisotropic_part(model.form(key), token)
                if kernel is None or kernel.dim < 2:
                    continue
                quadric = ProjectiveQuadric(kernel)
                child = f"{token}/{quadric.key}"
                fresh = child not in model._extensions
                child = model.extend_by_function_field(token, quadric)
                if fresh:
                    next_frontier.append(child)
        frontier = next_frontier
    return model


# --------------------------------------------------------- declared models


def declared_lattice_from_data(data: dict, check: bool = True) -> ExtensionLattice:
    """Build a declared lattice from parsed JSON data.

    Structural defects (bad ids, parent cycles, non-total table) are
    rejection errors; with check=True the four Witt invariant families are
    also enforced, rejecting on any violation.
    """
    model = ExtensionLattice(DECLARED)
    forms = data.get("forms", [])
    extensions = data.get("extensions", [])
    witt = data.get("witt", [])

    for item in forms:
        q = QuadraticForm.declared(item["id"], int(item["dim"]))
        if q.key in model._forms:
            raise ModelError(f"duplicate form id {q.key!r}")
        model.register_form(q, with_prime=False)
    for item in forms:
        link = item.get("prime")
        if link is None:
            continue
        if link not in model._forms:
            raise ModelError(f"form {item['id']!r} links to unknown prime {link!r}")
        expected = model._forms[item["id"]].dim + 1
        if model._forms[link].dim != expected:
            raise ModelError(
                f"prime link {item['id']!r} -> {link!r} must raise dim by one"
            )
        model._prime_links[item["id"]] = link

    pending = {item["id"]: item for item in extensions}
    if len(pending) != len(extensions):
        raise ModelError("duplicate extension ids")
    placed: set[str] = set()
    while pending:
        progressed = False
        for token in sorted(pending):
            item = pending[token]
            parent = item.get("parent")
            if parent is not None and parent not in placed:
                continue
            model.add_extension(Extension(token, parent, item["construction"]))
            placed.add(token)
            del pending[token]
            progressed = True
        if not progressed:
            raise ModelError(f"parent graph has a cycle through {sorted(pending)}")
    if model._base is None:
        raise ModelError("declared model has no base extension")
    for token in model.extension_tokens():
        construction = model.extension(token).construction
        if construction.startswith("join:"):
            for part in construction[len("join:"):].split("|"):
                if part not in model._extensions:
                    raise ModelError(f"join {token!r} references unknown {part!r}")

    seen: set[tuple[str, str]] = set()
    for item in witt:
        fk, tok, value = item["form"], item["extension"], int(item["index"])
        if fk not in model._forms:
            raise ModelError(f"witt entry for unknown form {fk!r}")
        model.extension(tok)
        if value < 0:
            raise ModelError(f"negative Witt index for {fk} at {tok}")
        if (fk, tok) in seen:
            raise ModelError(f"duplicate witt entry for {fk} at {tok}")
        seen.add((fk, tok))
        model._witt[(fk, tok)] = value
    for fk in model.form_keys():
        for tok in model.extension_tokens():
            if (fk, tok) not in model._witt:
                raise ModelError(f"witt table misses {fk} at {tok}")

    if check:
        report = model.validate()
        if not report.ok:
            raise ModelError("declared model rejected:\n" + report.render())
    return model


def lattice_to_data(model: ExtensionLattice) -> dict:
    """Canonical plain-data snapshot of a lattice's declared content.

    Works for both backends; real lattices export their computed table,
    which is how valid declared fixtures are produced.
    """
    forms = []
    for key in model.form_keys():
        q = model._forms[key]
        entry = {"id": key, "dim": q.dim}
        if q.is_real:
            p_key = prime(q).key
            if p_key in model._forms:
                entry["prime"] = p_key
        elif key in model._prime_links:
            entry["prime"] = model._prime_links[key]
        forms.append(entry)
    extensions = []
    for token in model.extension_tokens():
        ext = model._extensions[token]
        entry = {"id": token, "construction": ext.construction}
        if ext.parent is not None:
            entry["parent"] = ext.parent
        extensions.append(entry)
    witt = [
        {"form": fk, "extension": tok, "index": model.witt_index(model.form(fk), tok)}
        for fk in model.form_keys()
        for tok in model.extension_tokens()
    ]
    return {"forms": forms, "extensions": extensions, "witt": witt}


def serialize_model(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def parse_model(text: str) -> dict:
    return json.loads(text)
