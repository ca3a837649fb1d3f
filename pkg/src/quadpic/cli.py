"""Command-line front end: model ingestion, command dispatch, JSON output.

Form literals are signature pairs "(p,m)" for the real backend; with
--model they are declared form ids.  Exit codes: 0 for success or true
verdicts, 1 for false verdicts or reported property failures, 2 for
invalid input or a broken model.  Identical invocations produce
bit-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys

from .decomp import declare_decomposition, registered_decomposition
from .errors import DisagreementError, ModelError, QuadPicError
from .fields import declared_lattice_from_data, parse_model, real_lattice
from .forms import ProjectiveQuadric, QuadraticForm, real_form_from_key
from .pic import (
    basis_real,
    det,
    generator_e,
    identity,
    independent,
    inverse_identity_check,
    motivically_equivalent,
    relations_check,
    tate_element,
)
from .tower import active_index, build_tower, twist_readoff
from .twists import TateTwist, phi_affine

DEFAULT_SEED = 20260810

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_INVALID = 2


def _parse_form(literal: str, declared) -> QuadraticForm:
    """Signature literal on the real backend, a form id when --model is set."""
    literal = literal.strip()
    if declared is not None:
        return declared.form(literal)
    if literal.startswith("("):
        return real_form_from_key(literal)
    raise ModelError(f"declared form id {literal!r} needs --model")


def _parse_form_list(text: str, declared) -> list[QuadraticForm]:
    parts = [p for p in (s.strip() for s in text.split(";")) if p]
    if not parts:
        raise ModelError("empty form list")
    return [_parse_form(p, declared) for p in parts]


def _load_declared(args, check: bool = True):
    """The declared lattice named by --model (with --decomps applied), or None."""
    if args.model is None:
        if args.decomps is not None:
            raise ModelError("--decomps needs --model")
        return None
    with open(args.model, "r", encoding="utf-8") as handle:
        model = declared_lattice_from_data(parse_model(handle.read()), check=check)
    if args.decomps is not None:
        with open(args.decomps, "r", encoding="utf-8") as handle:
            table = json.loads(handle.read())
        for form_id in sorted(table):
            declare_decomposition(model.form(form_id), table[form_id], model)
    return model


def _lattice_for(args, declared, forms):
    if declared is not None:
        return declared
    return real_lattice(forms, depth=args.lattice_depth)


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(human)


# ---------------------------------------------------------------- commands


def _cmd_phi(args) -> int:
    declared = _load_declared(args)
    q = _parse_form(args.form, declared)
    model = _lattice_for(args, declared, [q])
    values = {}
    if args.route in ("sum", "both"):
        values["sum"] = phi_affine(q, args.ext, model)
    if args.route in ("tower", "both"):
        tower = build_tower(q, model)
        slot = active_index(tower, args.ext, model)
        values["tower"] = twist_readoff(slot, q.dim, tower.prime_quadric_dim)
    if len(values) == 2 and values["sum"] != values["tower"]:
        raise DisagreementError(
            f"evaluation routes disagree for {q.key} at {args.ext}: "
            f"{values['sum'].render()} vs {values['tower'].render()}"
        )
    value = next(iter(values.values()))
    _emit(args, {"command": "phi", "form": q.key, "extension": args.ext,
                 "route": args.route, "value": value.to_json()}, value.render())
    return EXIT_OK


def _element_payload(name: str, element, model) -> dict:
    return {
        "command": name,
        "element": element.to_json(),
        "fingerprint": element.fingerprint().to_json(),
    }


def _cmd_e(args) -> int:
    declared = _load_declared(args)
    q = _parse_form(args.form, declared)
    model = _lattice_for(args, declared, [q])
    element = generator_e(q, model)
    _emit(args, _element_payload("e", element, model),
          element.render() + "\n" + element.fingerprint().render())
    return EXIT_OK


def _cmd_det(args) -> int:
    declared = _load_declared(args)
    q = _parse_form(args.form, declared)
    model = _lattice_for(args, declared, [q])
    flag = None
    if args.flag:
        flag = _parse_form_list(args.flag, declared)
    element = det(ProjectiveQuadric(q), model, flag=flag)
    _emit(args, _element_payload("det", element, model),
          element.render() + "\n" + element.fingerprint().render())
    return EXIT_OK


def _cmd_inverse_check(args) -> int:
    declared = _load_declared(args)
    q = _parse_form(args.form, declared)
    model = _lattice_for(args, declared, [q])
    report = inverse_identity_check(q, model)
    payload = {"command": "inverse-check", **report.to_json()}
    if report.ok:
        _emit(args, payload, f"pass: constant {report.expected.render()}")
        return EXIT_OK
    token, value = report.failures[0]
    _emit(args, payload, f"fail at {token}: {value.render()} != {report.expected.render()}")
    return EXIT_FALSE


def _cmd_independent(args) -> int:
    declared = _load_declared(args)
    forms = _parse_form_list(args.forms, declared)
    model = _lattice_for(args, declared, forms)
    result = independent(forms, model)
    payload = {"command": "independent", **result.to_json()}
    if result.independent:
        lines = ["independent"]
        for step in result.steps:
            lines.append(f"  eliminate e[{step.form}] via {step.witness}: {step.twist.render()}")
        _emit(args, payload, "\n".join(lines))
        return EXIT_OK
    lines = ["refused"] + [f"  {r}" for r in result.reasons]
    _emit(args, payload, "\n".join(lines))
    return EXIT_FALSE


def _cmd_equiv(args) -> int:
    declared = _load_declared(args)
    left = _parse_form(args.left, declared)
    right = _parse_form(args.right, declared)
    model = _lattice_for(args, declared, [left, right])
    verdict = motivically_equivalent(
        ProjectiveQuadric(left), ProjectiveQuadric(right), model
    )
    _emit(args, {"command": "equiv", "left": left.key, "right": right.key,
                 "equivalent": verdict}, "equivalent" if verdict else "not equivalent")
    return EXIT_OK if verdict else EXIT_FALSE


def _cmd_decompose(args) -> int:
    declared = _load_declared(args)
    q = _parse_form(args.form, declared)
    model = _lattice_for(args, declared, [q])
    decomposition = registered_decomposition(ProjectiveQuadric(q), model)
    payload = {"command": "decompose", "quadric": decomposition.quadric,
               "decomposition": decomposition.to_json()}
    tates = ", ".join(t.render() for t in decomposition.tates) or "none"
    summands = ", ".join(
        f"{s.kind}@{s.shift} [{s.cls.render()}]" for s in decomposition.summands
    ) or "none"
    _emit(args, payload, f"tates: {tates}\nsummands: {summands}")
    return EXIT_OK


def _cmd_relations(args) -> int:
    declared = _load_declared(args)
    lhs = _parse_form_list(args.lhs, declared)
    rhs = _parse_form_list(args.rhs, declared)
    model = _lattice_for(args, declared, lhs + rhs)
    verdict = relations_check(
        [ProjectiveQuadric(q) for q in lhs],
        [ProjectiveQuadric(q) for q in rhs],
        model,
    )
    payload = {"command": "relations", **verdict.to_json()}
    human = (
        f"fingerprints equal mod Tate: {verdict.fingerprint_equal_mod_tate}\n"
        f"Tate-equivalent decompositions: {verdict.tate_equivalent}"
    )
    _emit(args, payload, human)
    return EXIT_OK if verdict.fingerprint_equal_mod_tate else EXIT_FALSE


def _parse_expression(text: str, model):
    """Products of det(p,m), e(p,m) and T(x)[y] factors with integer powers."""
    element = identity(model)
    for raw in text.split("*"):
        term = raw.strip()
        if not term:
            raise ModelError(f"empty factor in expression {text!r}")
        power = 1
        if "^" in term:
            term, _, exponent = term.rpartition("^")
            power = int(exponent)
        term = term.strip()
        if term.startswith("det"):
            q = _parse_form(term[3:].strip(), model)
            factor = det(ProjectiveQuadric(q), model)
        elif term.startswith("e"):
            factor = generator_e(_parse_form(term[1:].strip(), model), model)
        elif term.startswith("T"):
            body = term[1:].strip()
            x_part, _, y_part = body.partition("[")
            twist = TateTwist(int(x_part.strip("() ")), int(y_part.strip("] ")))
            factor = tate_element(model, twist)
        else:
            raise ModelError(f"cannot parse factor {raw.strip()!r}")
        element = element * factor**power
    return element


def _expression_forms(text: str) -> list[QuadraticForm]:
    forms = []
    for raw in text.split("*"):
        term = raw.strip()
        if "^" in term:
            term = term.rpartition("^")[0].strip()
        if term.startswith("det"):
            forms.append(real_form_from_key(term[3:].strip()))
        elif term.startswith("e"):
            forms.append(real_form_from_key(term[1:].strip()))
    return forms


def _cmd_basis(args) -> int:
    if args.model is not None:
        raise ModelError("the Pfister basis exists over the real backend")
    model = _lattice_for(args, None, _expression_forms(args.expr))
    element = _parse_expression(args.expr, model)
    expansion = basis_real(element, args.maxr)
    payload = {"command": "basis", "expr": args.expr, "maxr": args.maxr,
               **expansion.to_json()}
    lines = [f"r={r}: {c}" for r, c in expansion.coords] or ["all coordinates zero"]
    lines.append(f"tate: {expansion.tate.render()}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def _cmd_validate(args) -> int:
    if args.model is not None:
        with open(args.model, "r", encoding="utf-8") as handle:
            model = declared_lattice_from_data(parse_model(handle.read()), check=False)
    else:
        forms = _parse_form_list(args.forms, None) if args.forms else []
        model = real_lattice(forms, depth=args.lattice_depth)
    report = model.validate()
    payload = {"command": "validate", **report.to_json()}
    _emit(args, payload, report.render())
    return EXIT_OK if report.ok else EXIT_FALSE


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadpic",
        description="Exact computation in the Picard subgroup generated by "
        "reduced motives of affine quadrics.",
    )
    parser.add_argument("--json", action="store_true", help="emit JSON output")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="seed for randomized drivers (fixed default)")
    parser.add_argument("--lattice-depth", type=int, default=3,
                        help="generic-splitting tower depth for the real backend")
    parser.add_argument("--model", default=None,
                        help="declared model file (JSON)")
    parser.add_argument("--decomps", default=None,
                        help="declared decompositions file (JSON map form id -> decomposition)")
    sub = parser.add_subparsers(dest="command", required=True)

    cmd = sub.add_parser("phi", help="twist value of e^q at an extension")
    cmd.add_argument("--form", required=True)
    cmd.add_argument("--ext", default="base")
    cmd.add_argument("--route", choices=("sum", "tower", "both"), default="sum",
                     help="closed-form sum, projector-tower read-off, or both (cross-checked)")
    cmd.set_defaults(handler=_cmd_phi)

    cmd = sub.add_parser("e", help="the generator e^q and its fingerprint")
    cmd.add_argument("--form", required=True)
    cmd.set_defaults(handler=_cmd_e)

    cmd = sub.add_parser("det", help="det(Q) along a flag, with fingerprint")
    cmd.add_argument("--form", required=True, help="the form of the quadric")
    cmd.add_argument("--flag", default=None,
                     help="optional flag chain: subforms separated by ';'")
    cmd.set_defaults(handler=_cmd_det)

    cmd = sub.add_parser("inverse-check", help="verify e^q * e^q' = T(n)[2n+1]")
    cmd.add_argument("--form", required=True)
    cmd.set_defaults(handler=_cmd_inverse_check)

    cmd = sub.add_parser("independent", help="independence certificate or refusal")
    cmd.add_argument("--forms", required=True, help="forms separated by ';'")
    cmd.set_defaults(handler=_cmd_independent)

    cmd = sub.add_parser("equiv", help="motivic equivalence of two quadrics")
    cmd.add_argument("--left", required=True)
    cmd.add_argument("--right", required=True)
    cmd.set_defaults(handler=_cmd_equiv)

    cmd = sub.add_parser("decompose", help="motivic decomposition of a quadric")
    cmd.add_argument("--form", required=True)
    cmd.set_defaults(handler=_cmd_decompose)

    cmd = sub.add_parser("relations", help="compare two det-products")
    cmd.add_argument("--lhs", required=True, help="quadric forms separated by ';'")
    cmd.add_argument("--rhs", required=True)
    cmd.set_defaults(handler=_cmd_relations)

    cmd = sub.add_parser("basis", help="expand an expression in the Pfister basis")
    cmd.add_argument("--expr", required=True,
                     help='e.g. "det (8,0)" or "e(0,3)^2 * det(4,0)"')
    cmd.add_argument("--maxr", type=int, required=True)
    cmd.set_defaults(handler=_cmd_basis)

    cmd = sub.add_parser("validate", help="check the model invariant families")
    cmd.add_argument("--forms", default=None, help="real forms separated by ';'")
    cmd.set_defaults(handler=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (QuadPicError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
