import logging

from flask import Blueprint, current_app, jsonify, request

from src.services.realization_service import Closure, RealizationService, Section
from src.services.sumproduct_service import SumProductService
from src.services.wam_service import WamService
from src.utils import formats
from src.utils.cache import cache_verification, cache_wam_result
from src.utils.dparse import parse_matrix
from src.utils.errors import FormatError, RealizationError

logger = logging.getLogger(__name__)

api_bp = Blueprint("api", __name__, url_prefix="/api")


def _budget() -> int:
    return int(current_app.config["NR_ENUMERATION_BUDGET"])


def _payload() -> dict:
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise FormatError("request body must be a JSON object")
    return data


def _require(data: dict, key: str):
    if key not in data:
        raise FormatError(f"'{key}' not provided")
    return data[key]


def _integer(data: dict, key: str, default=None) -> int:
    value = data.get(key, default) if default is not None else _require(data, key)
    if isinstance(value, bool):
        raise FormatError(f"'{key}' must be an integer")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise FormatError(f"'{key}' must be an integer, got {value!r}")


def _section(realization, constraint_id):
    if constraint_id is None:
        if not realization.constraints:
            raise FormatError("the realization has no constraints")
        constraint_id = realization.constraints[0].id
    return Section.from_block(realization, constraint_id)


@api_bp.errorhandler(RealizationError)
def handle_realization_error(e):
    return jsonify({"error": str(e), "type": type(e).__name__}), e.http_status


@api_bp.route("/build", methods=["POST"])
def build():
    """Trellis realization from a D-transform generator matrix."""
    data = _payload()
    matrix = parse_matrix(str(_require(data, "generators")), _integer(data, "p"))
    closure = str(data.get("closure", Closure.SECTION.value))
    if closure not in {c.value for c in Closure}:
        raise FormatError(f"unknown closure '{closure}'")
    realization = RealizationService(budget=_budget()).build_trellis(
        matrix, _integer(data, "sections", 1), Closure(closure)
    )
    return jsonify(formats.realization_to_dict(realization))


@api_bp.route("/dual", methods=["POST"])
def dual_realization():
    data = _payload()
    service = RealizationService(budget=_budget())
    realization = formats.realization_from_dict(_require(data, "realization"))
    dualized = service.dualize(realization)
    return jsonify(
        {
            "realization": formats.realization_to_dict(dualized),
            "sign_inverters": service.sign_inverter_summary(realization, dualized),
        }
    )


@api_bp.route("/wam", methods=["POST"])
def weight_adjacency_matrix():
    """CWAM or HWAM of one constraint in the requested domain."""
    data = _payload()
    document = {
        "realization": _require(data, "realization"),
        "constraint": data.get("constraint"),
        "kind": data.get("kind", "cwam"),
        "domain": data.get("domain", "primal"),
        "budget": _budget(),
    }
    return jsonify(_cached_wam(formats.dumps(document)))


@cache_wam_result(expire=3600)
def _cached_wam(canonical_request: str) -> dict:
    document = formats.loads(canonical_request)
    service = WamService(budget=document["budget"])
    realization = formats.realization_from_dict(document["realization"])
    section = _section(realization, document["constraint"])
    matrix = service.wam_for_domain(section, document["domain"])
    if document["kind"] == "hwam":
        return formats.hwam_to_dict(service.hwam(matrix))
    if document["kind"] != "cwam":
        raise FormatError(f"unknown WAM kind '{document['kind']}'")
    return formats.wam_to_dict(matrix)


@api_bp.route("/verify", methods=["POST"])
def verify():
    data = _payload()
    document = {
        "realization": _require(data, "realization"),
        "constraint": data.get("constraint"),
        "against": data.get("against"),
        "budget": _budget(),
    }
    report = _cached_verification(formats.dumps(document))
    return jsonify(report), 200 if report["result"] == "PASS" else 422


@cache_verification(expire=3600)
def _cached_verification(canonical_request: str) -> dict:
    document = formats.loads(canonical_request)
    service = WamService(budget=document["budget"])
    realization = formats.realization_from_dict(document["realization"])
    against = None
    if document["against"] is not None:
        against = formats.realization_from_dict(document["against"])
    ids = [document["constraint"]] if document["constraint"] else None
    outcome = service.verify_realization(realization, ids, against)
    return formats.report_to_dict(outcome)


@api_bp.route("/spa", methods=["POST"])
def sum_product():
    data = _payload()
    service = SumProductService(budget=_budget())
    realization = formats.realization_from_dict(_require(data, "realization"))
    section = _section(realization, data.get("constraint"))
    m = formats.message_from_dict(_require(data, "message"))
    fs = formats.parse_messages(data.get("weights", []))
    path = data.get("path", "direct")

    if path == "both":
        comparison = service.compare_paths(section, m, fs)
        return jsonify(
            {
                "direct": formats.message_to_dict(comparison.direct),
                "dual": formats.message_to_dict(comparison.dual),
                "equal": comparison.equal,
                "direct_muls": comparison.direct_muls,
                "dual_muls": comparison.dual_muls,
            }
        )
    if path == "direct":
        return jsonify(formats.message_to_dict(service.spa_update(section, m, fs)))
    if path == "dual":
        return jsonify(formats.message_to_dict(service.spa_via_dual(section, m, fs)))
    raise FormatError(f"unknown path '{path}'")


@api_bp.route("/behavior", methods=["POST"])
def behavior():
    data = _payload()
    service = RealizationService(budget=_budget())
    realization = formats.realization_from_dict(_require(data, "realization"))
    if data.get("emit", "code") == "behavior":
        return jsonify(
            formats.behavior_to_dict(service.full_behavior(realization), realization)
        )
    return jsonify(formats.code_to_dict(service.code_of(realization)))
