import pytest
from hypothesis import given, settings, strategies as st

from quadpic import (
    DisagreementError,
    ModelError,
    ProjectiveQuadric,
    QuadraticForm,
    TateTwist,
    all_flags,
    basis_real,
    declare_decomposition,
    declared_lattice_from_data,
    det,
    generator_e,
    identity,
    independent,
    inverse_identity_check,
    motivically_equivalent,
    pfister_real,
    phi_det,
    prime,
    real_lattice,
    relations_check,
    tate_element,
)

real = QuadraticForm.real
signatures = st.tuples(st.integers(0, 6), st.integers(0, 6)).filter(
    lambda pm: pm[0] + pm[1] >= 1
)


def quadric(p, m):
    return ProjectiveQuadric(real(p, m))


def rich_lattice(extra=(), depth=2):
    forms = [real(p, n - p) for n in range(1, 9) for p in range(n + 1)]
    return real_lattice(forms + list(extra), depth=depth)


# ------------------------------------------------------------- generators


def test_generator_everywhere_anisotropic_has_zero_fingerprint():
    # a lattice whose only level drop (8) keeps (0,5) and (6,0) anisotropic
    model = real_lattice([real(16, 0)], depth=1)
    fp = generator_e(real(0, 5), model).fingerprint()
    assert fp.is_constant() == TateTwist(0, 0)
    assert len(fp.tokens()) >= 2


def test_generator_of_split_form_is_the_split_twist():
    model = rich_lattice()
    for n in (2, 3, 6, 7):
        q = real((n + 1) // 2, n // 2)
        fp = generator_e(q, model).fingerprint()
        assert fp.is_constant() == TateTwist(n // 2, n)


@given(signatures)
@settings(deadline=None, max_examples=20)
def test_adding_a_hyperbolic_plane_twists_by_one(pm):
    p, m = pm
    model = real_lattice([real(p, m), real(p + 1, m + 1)], depth=2)
    a = generator_e(real(p, m), model).fingerprint()
    b = generator_e(real(p + 1, m + 1), model).fingerprint()
    assert b.constant_difference(a) == TateTwist(1, 2)


def test_group_laws():
    model = rich_lattice()
    a = generator_e(real(2, 1), model)
    b = generator_e(real(1, 1), model)
    assert (a * a.inverse()).equality(identity(model)).equal
    assert a.inverse().word == (((("e", "(2,1)")), -1),)
    assert (a * b).fingerprint() == (b * a).fingerprint()
    assert ((a * b) ** 2).fingerprint() == 2 * (a * b).fingerprint()
    with pytest.raises(ModelError):
        a * generator_e(real(2, 1), rich_lattice())


def test_free_abelian_no_torsion_on_representations():
    model = rich_lattice()
    x = generator_e(real(0, 3), model) * generator_e(real(0, 2), model).inverse()
    for k in (2, 3, 5):
        power = x**k
        assert not power.equality(identity(model)).equal
    assert (x * x.inverse()).equality(identity(model)).equal


# ------------------------------------------------------------ inverse law


def test_inverse_law_hyperbolic_plane():
    model = rich_lattice()
    report = inverse_identity_check(real(1, 1), model)
    assert report.ok and report.expected == TateTwist(2, 5)


def test_inverse_law_every_small_form():
    model = rich_lattice()
    for key in list(model.form_keys()):
        q = model.form(key)
        assert inverse_identity_check(q, model).ok


def test_pfister_generator_inverts_the_pure_part_mod_tate():
    model = rich_lattice()
    for r in (1, 2, 3):
        product = generator_e(pfister_real(r), model) * generator_e(
            real(0, 2**r - 1), model
        )
        constant = product.fingerprint().is_constant()
        assert constant == TateTwist(2**r - 1, 2 * (2**r - 1) + 1)


# --------------------------------------------------------------------- det


def test_det_word_and_telescoping():
    model = rich_lattice()
    element = det(quadric(2, 1), model)
    assert element.word == ((("e", "(1,0)"), 1), (("e", "(1,1)"), 1))
    for token in model.extension_tokens():
        assert element.value_at(token) == phi_det(quadric(2, 1), token, model)


def test_det_flag_invariance_explicit():
    model = rich_lattice()
    q = real(3, 1)
    default = det(ProjectiveQuadric(q), model)
    chains = list(all_flags(q))
    assert len(chains) == 4
    for chain in chains:
        verdict = default.equality(det(ProjectiveQuadric(q), model, flag=chain))
        assert verdict.equal and verdict.exact


def test_det_of_empty_quadric_is_identity():
    model = rich_lattice()
    element = det(quadric(1, 0), model)
    assert element.is_identity_word()


def test_invalid_flags_rejected():
    model = rich_lattice()
    with pytest.raises(ModelError):
        det(quadric(3, 1), model, flag=[real(1, 1)])
    with pytest.raises(ModelError):
        det(quadric(1, 0), model, flag=[real(1, 0)])
    with pytest.raises(ModelError):
        det(quadric(3, 1), model, flag=[real(3, 0)])  # stops at dimension 3


def test_pfister_det_identities():
    model = rich_lattice([pfister_real(4)])
    for r in (1, 2, 3):
        x = det(ProjectiveQuadric(pfister_real(r)), model)
        pure_step = generator_e(real(0, 2**r - 1), model) ** (2 ** (r - 1))
        verdict = x.equality(pure_step)
        assert verdict.equal and verdict.exact
        # mod Tate, det is the -2^(r-1) power of the Pfister generator
        mixed = x * generator_e(pfister_real(r), model) ** (2 ** (r - 1))
        assert mixed.fingerprint().is_constant() is not None


def test_det_class_vector_telescopes_to_the_quadric_classes():
    from quadpic import decompose_real
    from quadpic.decomp import class_vector

    model = rich_lattice()
    for pm in [(3, 1), (5, 0), (4, 2), (6, 1)]:
        element = det(quadric(*pm), model)
        direct = class_vector([decompose_real(real(*pm), model)])
        assert element.det_vector() == direct


def test_fingerprint_tate_part_shifts_every_entry():
    model = rich_lattice()
    x = generator_e(real(2, 1), model)
    shifted = x * tate_element(model, TateTwist(1, 5))
    diff = shifted.fingerprint().constant_difference(x.fingerprint())
    assert diff == TateTwist(1, 5)


# ---------------------------------------------------------- independence


def test_independent_pfister_pure_family():
    model = rich_lattice()
    family = [real(0, 1), real(0, 2), real(0, 4), real(0, 8)]
    cert = independent(family, model)
    assert cert.independent
    assert cert.order == ("(0,8)", "(0,4)", "(0,2)", "(0,1)")
    assert all(step.twist for step in cert.steps)
    assert [prime(q).key for q in family] == ["(2,0)", "(3,0)", "(5,0)", "(9,0)"]


def test_singleton_certificate():
    model = rich_lattice()
    cert = independent([real(0, 4)], model)
    assert cert.independent and len(cert.steps) == 1
    assert cert.steps[0].witness.endswith("(5,0)")


def test_refusal_names_the_degenerate_pair():
    model = rich_lattice()
    refusal = independent([real(0, 2), real(1, 3)], model)
    assert not refusal.independent
    assert ("(0,2)", "(1,3)") in refusal.pairs
    assert any("isotropic" in reason for reason in refusal.reasons)


def test_refusal_on_isotropic_prime_alone():
    model = rich_lattice()
    refusal = independent([real(1, 0)], model)  # prime (1,1) is split
    assert not refusal.independent
    assert any("isotropic" in reason for reason in refusal.reasons)


def test_duplicate_forms_are_refused():
    model = rich_lattice()
    refusal = independent([real(0, 2), real(0, 2)], model)
    assert not refusal.independent and refusal.pairs


def test_declared_certificates_break_sink_ties_deterministically():
    # two declared classes with no rational maps either way: both are sinks
    # at once, and the elimination picks the smaller form id first
    data = {
        "forms": [
            {"id": "a", "dim": 2, "prime": "ap"},
            {"id": "ap", "dim": 3},
            {"id": "b", "dim": 2, "prime": "bp"},
            {"id": "bp", "dim": 3},
        ],
        "extensions": [
            {"id": "k", "construction": "base"},
            {"id": "k(ap)", "parent": "k", "construction": "ff:ap"},
            {"id": "k(bp)", "parent": "k", "construction": "ff:bp"},
        ],
        "witt": [
            {"form": f, "extension": e, "index": i}
            for (f, e, i) in [
                ("a", "k", 0), ("ap", "k", 0), ("b", "k", 0), ("bp", "k", 0),
                ("a", "k(ap)", 1), ("ap", "k(ap)", 1), ("b", "k(ap)", 0), ("bp", "k(ap)", 0),
                ("a", "k(bp)", 0), ("ap", "k(bp)", 0), ("b", "k(bp)", 1), ("bp", "k(bp)", 1),
            ]
        ],
    }
    from quadpic import declared_lattice_from_data

    model = declared_lattice_from_data(data)
    cert = independent([model.form("a"), model.form("b")], model)
    assert cert.independent
    assert cert.order == ("a", "b")
    assert [s.witness for s in cert.steps] == ["k(ap)", "k(bp)"]


# -------------------------------------------------------------- relations


def test_relations_examples():
    model = rich_lattice()
    verdict = relations_check([quadric(3, 1)], [quadric(2, 0)], model)
    assert verdict.fingerprint_equal_mod_tate and verdict.tate_equivalent
    verdict = relations_check([quadric(3, 0)], [quadric(2, 0)], model)
    assert not verdict.fingerprint_equal_mod_tate and not verdict.tate_equivalent


def test_relations_pfister_power_identity():
    model = rich_lattice()
    pf = quadric(8, 0)
    pure = quadric(0, 7)
    verdict = relations_check([pf] + [pure] * 4, [pf] * 4, model)
    assert verdict.fingerprint_equal_mod_tate and verdict.tate_equivalent


def test_relations_reflexive_on_products():
    model = rich_lattice()
    sides = [quadric(4, 2), quadric(3, 0)]
    verdict = relations_check(sides, list(reversed(sides)), model)
    assert verdict.fingerprint_equal_mod_tate and verdict.tate_equivalent


def test_relations_edge_cases():
    model = rich_lattice()
    verdict = relations_check([], [], model)
    assert verdict.fingerprint_equal_mod_tate and verdict.tate_equivalent
    # det of a split quadric is a pure Tate element: equal mod Tate to nothing
    verdict = relations_check([quadric(1, 1)], [], model)
    assert verdict.fingerprint_equal_mod_tate and verdict.tate_equivalent
    verdict = relations_check([quadric(3, 0)], [], model)
    assert not verdict.fingerprint_equal_mod_tate and not verdict.tate_equivalent


# ------------------------------------------------------------ equivalence


def test_motivic_equivalence_examples():
    model = rich_lattice()
    assert motivically_equivalent(quadric(4, 0), quadric(4, 0), model)
    assert motivically_equivalent(quadric(4, 0), quadric(0, 4), model)
    assert not motivically_equivalent(quadric(4, 0), quadric(3, 1), model)
    assert not motivically_equivalent(quadric(4, 0), quadric(5, 0), model)


def twin_declared_model():
    data = {
        "forms": [
            {"id": "P", "dim": 5, "prime": "Pp"},
            {"id": "Pp", "dim": 6},
            {"id": "Q", "dim": 5, "prime": "Qp"},
            {"id": "Qp", "dim": 6},
        ],
        "extensions": [
            {"id": "k", "construction": "base"},
            {"id": "k(P)", "parent": "k", "construction": "ff:P"},
            {"id": "k(Q)", "parent": "k", "construction": "ff:Q"},
            {"id": "k(G(P,1))", "parent": "k", "construction": "gff:P:1"},
            {"id": "k(G(Q,1))", "parent": "k", "construction": "gff:Q:1"},
        ],
        "witt": [
            {"form": f, "extension": e, "index": i}
            for f in ("P", "Pp", "Q", "Qp")
            for e, i in (
                ("k", 0),
                ("k(P)", 1),
                ("k(Q)", 1),
                ("k(G(P,1))", 2),
                ("k(G(Q,1))", 2),
            )
        ],
    }
    return declared_lattice_from_data(data)


def test_declared_twins_are_equivalent_with_equal_det():
    model = twin_declared_model()
    P, Q = ProjectiveQuadric(model.form("P")), ProjectiveQuadric(model.form("Q"))
    assert motivically_equivalent(P, Q, model)
    verdict = det(P, model).equality(det(Q, model))
    assert verdict.equal and verdict.model_relative
    # different dimensions are separated even on a poor lattice
    data_dim = {
        "forms": [{"id": "A", "dim": 4}, {"id": "B", "dim": 6}],
        "extensions": [{"id": "k", "construction": "base"}],
        "witt": [
            {"form": "A", "extension": "k", "index": 0},
            {"form": "B", "extension": "k", "index": 0},
        ],
    }
    poor = declared_lattice_from_data(data_dim)
    A, B = ProjectiveQuadric(poor.form("A")), ProjectiveQuadric(poor.form("B"))
    assert not motivically_equivalent(A, B, poor)


def test_declared_relations_need_decompositions():
    model = twin_declared_model()
    P, Q = ProjectiveQuadric(model.form("P")), ProjectiveQuadric(model.form("Q"))
    with pytest.raises(ModelError):
        relations_check([P], [Q], model)
    for name in ("P", "Q"):
        declare_decomposition(
            model.form(name),
            {
                "tates": [],
                "summands": [
                    {"class": {"quadric": name, "planes": 0}, "shift": 0, "kind": "declared"},
                    {"class": {"quadric": name, "planes": 1}, "shift": 1, "kind": "declared"},
                ],
            },
            model,
        )
    verdict = relations_check([P], [Q], model)
    assert verdict.fingerprint_equal_mod_tate and verdict.tate_equivalent


# ------------------------------------------------------------------ basis


def test_basis_unit_vectors_and_pfister_coordinates():
    model = rich_lattice([pfister_real(4)])
    for r in (1, 2, 3, 4):
        unit = basis_real(generator_e(pfister_real(r), model), maxr=4)
        assert unit.coords == ((r, 1),) and unit.tate == TateTwist(0, 0)
        expansion = basis_real(det(ProjectiveQuadric(pfister_real(r)), model), maxr=4)
        assert expansion.coords == ((r, -(2 ** (r - 1))),)


def test_basis_expansion_of_a_mixed_generator():
    model = rich_lattice()
    expansion = basis_real(generator_e(real(0, 4), model), maxr=4)
    assert expansion.coords == ((2, 1), (3, -1))


def test_basis_rejects_insufficient_maxr():
    model = rich_lattice()
    with pytest.raises(ModelError):
        basis_real(det(quadric(8, 0), model), maxr=2)


@given(st.tuples(st.integers(0, 10), st.integers(0, 10)).filter(lambda pm: sum(pm) >= 2))
@settings(deadline=None, max_examples=25)
def test_basis_round_trip_reproduces_fingerprints(pm):
    model = real_lattice([real(*pm)], depth=1)
    element = det(ProjectiveQuadric(real(*pm)), model)
    expansion = basis_real(element, maxr=4)  # verification happens inside
    rebuilt = identity(model)
    for r, c in expansion.coords:
        rebuilt = rebuilt * generator_e(pfister_real(r), model) ** c
    rebuilt = rebuilt * tate_element(model, expansion.tate)
    assert rebuilt.fingerprint() == element.fingerprint()


# ----------------------------------------------- equality route agreement


@given(
    st.lists(st.tuples(signatures, st.integers(-2, 2)), min_size=1, max_size=3),
    st.lists(st.tuples(signatures, st.integers(-2, 2)), min_size=1, max_size=3),
)
@settings(deadline=None, max_examples=20)
def test_class_vector_and_fingerprint_equality_agree(lhs, rhs):
    # over a lattice holding the splitting towers of everything involved,
    # the exact route (class vector + base twist) and the fingerprint route
    # (pointwise values + closure) must reach the same verdict
    model = real_lattice([], depth=0)
    x = identity(model)
    for pm, c in lhs:
        x = x * generator_e(real(*pm), model) ** c
    y = identity(model)
    for pm, c in rhs:
        y = y * generator_e(real(*pm), model) ** c
    for pm, _ in lhs + rhs:
        model.ensure_splitting_tower(real(*pm))
        model.ensure_splitting_tower(prime(real(*pm)))
    exact = x.equality(y)
    assert exact.exact
    fingerprint_equal = (
        x.fingerprint() == y.fingerprint()
        and x.closure_value() == y.closure_value()
    )
    assert exact.equal == fingerprint_equal


# ----------------------------------------------------- disagreement guard


def test_broken_declared_decomposition_trips_the_cross_check():
    model = twin_declared_model()
    P, Q = ProjectiveQuadric(model.form("P")), ProjectiveQuadric(model.form("Q"))
    declare_decomposition(
        model.form("P"),
        {
            "tates": [],
            "summands": [
                {"class": {"quadric": "P", "planes": 0}, "shift": 0, "kind": "declared"},
                {"class": {"quadric": "P", "planes": 1}, "shift": 1, "kind": "declared"},
            ],
        },
        model,
    )
    declare_decomposition(
        model.form("Q"),
        {
            "tates": [{"x": 0, "y": 0}, {"x": 4, "y": 8}],
            "summands": [
                {"class": {"quadric": "Q", "planes": 1}, "shift": 1, "kind": "declared"},
            ],
        },
        model,
    )
    with pytest.raises(DisagreementError):
        relations_check([P], [Q], model)
