import itertools

import pytest
from hypothesis import given, settings, strategies as st

from quadpic import (
    Grassmannian,
    ModelError,
    ProjectiveQuadric,
    QuadraticForm,
    declared_lattice_from_data,
    lattice_to_data,
    parse_model,
    prime,
    real_lattice,
    serialize_model,
)

real = QuadraticForm.real
signatures = st.tuples(st.integers(0, 8), st.integers(0, 8)).filter(
    lambda pm: pm[0] + pm[1] >= 1
)


def quadric(p, m):
    return ProjectiveQuadric(real(p, m))


# ----------------------------------------------------------- Witt indices


def test_witt_index_at_the_base_is_min_of_signature():
    model = real_lattice([real(3, 2)], depth=0)
    assert model.witt_index(real(3, 2), model.base) == 2


def test_witt_index_of_pfister_neighbour_at_level_four():
    # first Witt index of the 5-dimensional sum of squares is 5 - 4 = 1
    model = real_lattice([], depth=0)
    level4 = model.extend_by_function_field(model.base, quadric(5, 0))
    assert model.level(level4) == 4
    assert model.witt_index(real(5, 0), level4) == 1
    # the ambient 3-fold definite Pfister form splits completely there
    assert model.witt_index(real(8, 0), level4) == 4


def test_function_field_levels():
    model = real_lattice([], depth=0)
    assert model.level(model.extend_by_function_field(model.base, quadric(2, 0))) == 1
    conic = model.extend_by_function_field(model.base, quadric(3, 0))
    assert model.level(conic) == 2
    # isotropic quadrics are rational: purely transcendental, level kept
    again = model.extend_by_function_field(conic, quadric(3, 0))
    assert model.level(again) == 2


@given(st.integers(2, 16))
@settings(deadline=None, max_examples=15)
def test_first_witt_index_of_definite_forms(d):
    # a d-dimensional definite form is a neighbour of the 2^r-dimensional
    # definite Pfister form, so over its own function field exactly
    # d - 2^(r-1) hyperbolic planes split off
    model = real_lattice([], depth=0)
    own = model.extend_by_function_field(model.base, quadric(d, 0))
    half = 1 << (d - 1).bit_length() - 1
    assert model.witt_index(real(d, 0), own) == d - half


def test_empty_quadric_has_no_function_field():
    model = real_lattice([], depth=0)
    with pytest.raises(ModelError):
        model.extend_by_function_field(model.base, quadric(1, 0))


def test_join_takes_minimum_level():
    model = real_lattice([], depth=0)
    a = model.extend_by_function_field(model.base, quadric(5, 0))
    b = model.extend_by_function_field(model.base, quadric(3, 0))
    joined = model.extend_by_join([a, b])
    assert model.level(joined) == 2
    assert set(model.ancestors(joined)) >= {a, b}


def test_unknown_extension_is_an_error():
    model = real_lattice([], depth=0)
    with pytest.raises(ModelError):
        model.witt_index(real(1, 0), "nowhere")


# ----------------------------------------------------------- rational points


def test_has_rational_point_examples():
    model = real_lattice([], depth=0)
    assert model.has_rational_point(quadric(2, 2), 0, model.base)
    assert not model.has_rational_point(quadric(5, 0), 0, model.base)
    own = model.extend_by_function_field(model.base, quadric(5, 0))
    assert model.has_rational_point(quadric(5, 0), 0, own)
    with pytest.raises(ModelError):
        model.has_rational_point(quadric(5, 0), 2, model.base)


def test_stably_birational_examples():
    model = real_lattice([], depth=0)
    g30 = Grassmannian(quadric(3, 0), 0)
    g50 = Grassmannian(quadric(5, 0), 0)
    g60 = Grassmannian(quadric(6, 0), 0)
    assert model.stably_birational(g50, g50)
    assert not model.stably_birational(g30, g50)
    # both are neighbours of the 3-fold definite Pfister form
    assert model.stably_birational(g50, g60)


@settings(deadline=None, max_examples=30)
@given(st.lists(st.integers(2, 9), min_size=3, max_size=3))
def test_stably_birational_is_transitive(dims):
    model = real_lattice([], depth=0)
    gs = [Grassmannian(quadric(d, 0), 0) for d in dims]
    for a, b, c in itertools.permutations(gs, 3):
        if model.stably_birational(a, b) and model.stably_birational(b, c):
            assert model.stably_birational(a, c)


def test_grassmannian_function_field_reaches_deeper_splitting():
    model = real_lattice([], depth=0)
    token = model.extend_by_grassmannian(model.base, Grassmannian(quadric(8, 0), 1))
    # over k(G(Q,1)) the form has at least two hyperbolic planes
    assert model.witt_index(real(8, 0), token) >= 2


# ------------------------------------------------------------- splitting


@given(signatures)
@settings(deadline=None, max_examples=40)
def test_full_splitting_tower_reaches_maximal_witt_index(pm):
    q = real(*pm)
    model = real_lattice([q], depth=0)
    tower = model.ensure_splitting_tower(q)
    assert model.witt_index(q, tower[-1]) == q.dim // 2


@given(signatures, signatures)
@settings(deadline=None, max_examples=30)
def test_witt_monotone_along_ancestors(pm, other):
    model = real_lattice([real(*pm), real(*other)], depth=2)
    q = real(*pm)
    for token in model.extension_tokens():
        for ancestor in model.ancestors(token):
            assert model.witt_index(q, ancestor) <= model.witt_index(q, token)


def test_levels_never_increase_down_a_tower():
    model = real_lattice([real(p, n - p) for n in range(1, 9) for p in range(n + 1)], depth=3)
    for token in model.extension_tokens():
        for ancestor in model.ancestors(token):
            assert model.level(token) <= model.level(ancestor)


# ------------------------------------------------------------- validation


@settings(deadline=None, max_examples=15)
@given(st.lists(signatures, min_size=1, max_size=4), st.integers(0, 3))
def test_real_lattices_always_validate(sigs, depth):
    model = real_lattice([real(*pm) for pm in sigs], depth=depth)
    assert model.validate().ok


def declared_fixture():
    return lattice_to_data(real_lattice([real(3, 0), real(2, 1)], depth=2))


@settings(deadline=None, max_examples=15)
@given(st.lists(signatures, min_size=1, max_size=3), st.integers(0, 2))
def test_lattice_snapshot_round_trip(sigs, depth):
    source = real_lattice([real(*pm) for pm in sigs], depth=depth)
    data = lattice_to_data(source)
    rebuilt = declared_lattice_from_data(data)
    assert rebuilt.extension_tokens() == source.extension_tokens()
    for key in source.form_keys():
        for token in source.extension_tokens():
            assert rebuilt.witt_index(rebuilt.form(key), token) == source.witt_index(
                source.form(key), token
            )


def test_declared_fixture_validates_and_round_trips():
    data = declared_fixture()
    text = serialize_model(data)
    assert parse_model(serialize_model(parse_model(text))) == parse_model(text)
    assert serialize_model(parse_model(text)) == text
    model = declared_lattice_from_data(data)
    assert model.validate().ok
    assert model.prime_of(model.form("(3,0)")).key == "(1,3)"


def _set_index(data, form, ext, value):
    for entry in data["witt"]:
        if entry["form"] == form and entry["extension"] == ext:
            entry["index"] = value
            return
    raise KeyError((form, ext))


def test_monotonicity_violation_reported():
    # i_W of (3,0) decreasing up the tower base -> base/(3,0) -> deeper
    data = declared_fixture()
    deeper = next(
        e["id"] for e in data["extensions"] if e.get("parent") not in (None, "base")
    )
    _set_index(data, "(3,0)", deeper, 0)
    model = declared_lattice_from_data(data, check=False)
    report = model.validate()
    assert any(v.family == "monotonicity" for v in report.violations)


def test_step_violation_reported():
    data = declared_fixture()
    _set_index(data, "(1,3)", "base", 2)  # j_P' = j_P + 2 at the base
    model = declared_lattice_from_data(data, check=False)
    report = model.validate()
    assert any(v.family == "codim-1-step" for v in report.violations)


def test_ceiling_violation_reported():
    data = declared_fixture()
    _set_index(data, "(2,1)", "base", 2)
    model = declared_lattice_from_data(data, check=False)
    assert any(v.family == "ceiling" for v in model.validate().violations)


def test_checked_loading_rejects_invalid_tables():
    data = declared_fixture()
    _set_index(data, "(2,1)", "base", 2)
    with pytest.raises(ModelError):
        declared_lattice_from_data(data)


# -------------------------------------------------------- ingestion errors


def test_ingestion_rejects_structural_defects():
    good = declared_fixture()

    bad = parse_model(serialize_model(good))
    bad["forms"].append({"id": "(3,0)", "dim": 3})
    with pytest.raises(ModelError):
        declared_lattice_from_data(bad)

    bad = parse_model(serialize_model(good))
    bad["extensions"][0]["construction"] = "ff:(3,0)"  # no base left
    with pytest.raises(ModelError):
        declared_lattice_from_data(bad)

    bad = parse_model(serialize_model(good))
    bad["extensions"].append({"id": "loop", "parent": "loop", "construction": "ff:(3,0)"})
    with pytest.raises(ModelError):
        declared_lattice_from_data(bad)

    bad = parse_model(serialize_model(good))
    bad["witt"].pop()
    with pytest.raises(ModelError):
        declared_lattice_from_data(bad)

    bad = parse_model(serialize_model(good))
    for f in bad["forms"]:
        if f["id"] == "(3,0)":
            f["prime"] = "(3,0)"
    with pytest.raises(ModelError):
        declared_lattice_from_data(bad)


def test_declared_extensions_must_preexist():
    model = declared_lattice_from_data(declared_fixture())
    q30 = model.form("(3,0)")
    token = model.extend_by_function_field("base", ProjectiveQuadric(q30))
    assert model.extension(token).construction == "ff:(3,0)"
    with pytest.raises(ModelError):
        model.extend_by_function_field(token, ProjectiveQuadric(q30))


def test_prime_tracks_the_declared_link():
    model = declared_lattice_from_data(declared_fixture())
    with pytest.raises(ModelError):
        model.prime_of(model.form("(1,3)"))  # no link registered for the prime


def test_concurrent_oracle_reads_match_serial_results():
    # frozen lattice: concurrent (form, extension) evaluation must be safe
    # and the memo cache behaviorally invisible
    from concurrent.futures import ThreadPoolExecutor

    from quadpic import phi_affine

    forms = [real(p, n - p) for n in range(1, 9) for p in range(n + 1)]
    model = real_lattice(forms, depth=2)
    jobs = [
        (q, token) for q in forms for token in model.extension_tokens()
    ]
    serial = [(model.witt_index(q, t), phi_affine(q, t, model)) for q, t in jobs]

    fresh = real_lattice(forms, depth=2)

    def probe(job):
        q, t = job
        return (fresh.witt_index(q, t), phi_affine(q, t, fresh))

    with ThreadPoolExecutor(max_workers=8) as pool:
        concurrent = list(pool.map(probe, jobs))
    assert concurrent == serial
