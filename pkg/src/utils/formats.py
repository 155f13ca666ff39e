"""
JSON documents read and written by the CLI and the HTTP API.

Output is deterministic: keys sorted, two-space indentation, terms in
lexicographic exponent order.
"""

import json
from fractions import Fraction
from math import lcm
from typing import Any, Dict, List, Sequence

from src.services.realization_service import (
    ConstraintBlock,
    NormalRealization,
    PortBinding,
    VarDecl,
    VarKind,
)
from src.services.sumproduct_service import Message
from src.services.wam_service import HWAMatrix, WAMatrix
from src.utils.algebra import CycloRat, state_labels
from src.utils.errors import FormatError, RealizationError
from src.utils.linear_code import LinearCode


def dumps(document: Any) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"not valid JSON: {e}")


def rational_to_str(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rational_from_str(text: Any) -> Fraction:
    if isinstance(text, bool):
        raise FormatError(f"'{text}' is not a rational number")
    try:
        return Fraction(text) if isinstance(text, int) else Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"'{text}' is not a rational number")


def cyclo_to_json(value: CycloRat) -> Dict[str, Any]:
    """Numerators over a common positive denominator."""
    den = lcm(*[c.denominator for c in value.coeffs]) if value.coeffs else 1
    return {
        "den": str(den),
        "num": [str(c.numerator * (den // c.denominator)) for c in value.coeffs],
    }


def cyclo_from_json(p: int, document: Any) -> CycloRat:
    if not isinstance(document, dict):
        return CycloRat.rational(p, rational_from_str(document))
    try:
        den = int(document["den"])
        nums = [int(x) for x in document["num"]]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed cyclotomic value {document!r}: {e}")
    if den <= 0:
        raise FormatError(f"denominator must be positive, got {den}")
    if len(nums) != p - 1:
        raise FormatError(f"a value over Z_{p} has {p - 1} numerators, got {len(nums)}")
    return CycloRat(p, tuple(Fraction(x, den) for x in nums))


def realization_to_dict(realization: NormalRealization) -> Dict[str, Any]:
    document = {
        "p": int(realization.p),
        "vars": [
            {"id": v.id, "kind": v.kind.value, "dim": v.dim} for v in realization.vars
        ],
        "constraints": [
            {
                "id": block.id,
                "generators": block.code.to_digit_strings(),
                "ports": [{"var": port.var, "sign": port.sign} for port in block.ports],
            }
            for block in realization.constraints
        ],
    }
    if realization.fragment:
        document["fragment"] = True
    return document


def realization_from_dict(document: Any) -> NormalRealization:
    """
    Build a realization from its JSON form.

    Raises:
        FormatError: Missing keys, wrong types or generators that do not match
            the ports' total length.
    """
    if not isinstance(document, dict):
        raise FormatError("a realization document must be an object")
    try:
        p = int(document["p"])
        vars_ = []
        for v in document["vars"]:
            vars_.append(VarDecl(str(v["id"]), VarKind(v["kind"]), p, int(v["dim"])))
        dims = {v.id: v.dim for v in vars_}
        blocks = []
        for c in document["constraints"]:
            ports = tuple(
                PortBinding(str(port["var"]), int(port.get("sign", 1)))
                for port in c["ports"]
            )
            length = sum(dims.get(port.var, 0) for port in ports)
            code = LinearCode.from_digit_strings(p, list(c["generators"]), n=length)
            blocks.append(ConstraintBlock(str(c["id"]), code, ports))
        fragment = bool(document.get("fragment", False))
        return NormalRealization(p, tuple(vars_), tuple(blocks), fragment=fragment)
    except FormatError:
        raise
    except RealizationError as e:
        raise FormatError(f"invalid realization document: {e}")
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"invalid realization document: missing or bad field {e}")


def wam_to_dict(wam: WAMatrix) -> Dict[str, Any]:
    return {
        "p": int(wam.p),
        "symbols": wam.n_symbols,
        "kind": "cwam",
        "domain": wam.domain,
        "rows": state_labels(wam.p, wam.left_dim),
        "cols": state_labels(wam.p, wam.right_dim),
        "entries": [
            [
                [{"exps": list(exps), "coeff": cyclo_to_json(c)} for exps, c in e.terms]
                for e in row
            ]
            for row in wam.entries
        ],
    }


def hwam_to_dict(hwam: HWAMatrix) -> Dict[str, Any]:
    return {
        "p": int(hwam.p),
        "symbols": hwam.n_symbols,
        "kind": "hwam",
        "domain": hwam.domain,
        "rows": state_labels(hwam.p, hwam.left_dim),
        "cols": state_labels(hwam.p, hwam.right_dim),
        "entries": [
            [[rational_to_str(c) for c in entry] for entry in row]
            for row in hwam.entries
        ],
    }


def message_to_dict(message: Message) -> Dict[str, Any]:
    values = [
        rational_to_str(v.to_fraction()) if v.is_rational() else cyclo_to_json(v)
        for v in message.values
    ]
    return {"group": {"p": int(message.p), "dim": message.dim}, "values": values}


def message_from_dict(document: Any) -> Message:
    try:
        p = int(document["group"]["p"])
        dim = int(document["group"]["dim"])
        values = [cyclo_from_json(p, v) for v in document["values"]]
        return Message(p, dim, tuple(values))
    except FormatError:
        raise
    except RealizationError as e:
        raise FormatError(f"invalid message document: {e}")
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"invalid message document: {e}")


def report_to_dict(outcome: Dict[str, Any]) -> Dict[str, Any]:
    """Verification outcome of ``WamService.verify_realization`` as JSON."""
    constraints = []
    for report in outcome["constraints"]:
        item = {
            "constraint": report.label,
            "cwam": "PASS" if report.passed else "FAIL",
            "hwam": "PASS" if report.hwam_passed else "FAIL",
            "dual_size": report.dual_size,
        }
        if report.error:
            item["error"] = report.error
        if report.difference is not None:
            i, j, a, b = report.difference
            item["first_difference"] = {
                "row": i,
                "col": j,
                "transformed": a.render("W"),
                "direct": b.render("W"),
            }
        if report.hwam_difference is not None:
            i, j, a, b = report.hwam_difference
            item["hwam_difference"] = {"row": i, "col": j, "identity": a, "direct": b}
        constraints.append(item)
    return {
        "result": "PASS" if outcome["passed"] else "FAIL",
        "constraints": constraints,
        "duality": outcome["duality"],
    }


def behavior_to_dict(behavior, realization: NormalRealization) -> Dict[str, Any]:
    configs = []
    for row in range(len(behavior)):
        assignment = behavior.assignment(row)
        configs.append({var_id: str(assignment[var_id]) for var_id in behavior.var_ids})
    return {"p": int(realization.p), "size": len(behavior), "configs": configs}


def code_to_dict(code: LinearCode) -> Dict[str, Any]:
    return {
        "p": int(code.p),
        "n": code.n,
        "k": code.dimension,
        "generators": code.to_digit_strings(),
    }


def parse_messages(documents: Sequence[Any]) -> List[Message]:
    return [message_from_dict(d) for d in documents]
