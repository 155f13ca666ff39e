"""
Command-line surface: ``python cli.py ...`` or ``flask codes ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 enumeration budget exceeded.
"""

import logging
import sys
from dataclasses import dataclass
from functools import wraps

import click

from src.services.realization_service import Closure, RealizationService, Section
from src.services.sumproduct_service import SumProductService
from src.services.wam_service import WamService
from src.utils import formats
from src.utils.dparse import parse_matrix
from src.utils.errors import RealizationError
from src.utils.linear_code import DEFAULT_BUDGET

logger = logging.getLogger(__name__)

READABLE = click.Path(exists=True, dir_okay=False, allow_dash=True)


@dataclass
class CliSettings:
    budget: int = DEFAULT_BUDGET

    @property
    def realizations(self) -> RealizationService:
        return RealizationService(budget=self.budget)

    @property
    def wams(self) -> WamService:
        return WamService(budget=self.budget)

    @property
    def messages(self) -> SumProductService:
        return SumProductService(budget=self.budget)


def handle_errors(func):
    """Report library errors on stderr and exit with their code."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except RealizationError as e:
            click.echo(f"error: {e}", err=True)
            click.get_current_context().exit(e.exit_code)

    return wrapper


def _read_document(path: str):
    with click.open_file(path, "r", encoding="utf-8") as handle:
        return formats.loads(handle.read())


def _write(text: str, out: str):
    with click.open_file(out, "w", encoding="utf-8") as handle:
        handle.write(text)


def _load_realization(path: str):
    return formats.realization_from_dict(_read_document(path))


def _pick_constraint(realization, constraint_id):
    if constraint_id is None:
        if not realization.constraints:
            raise click.UsageError("the realization has no constraints")
        return realization.constraints[0].id
    return constraint_id


@click.group(name="codes")
@click.option(
    "--budget",
    type=click.IntRange(min=1),
    envvar="NR_ENUMERATION_BUDGET",
    default=DEFAULT_BUDGET,
    show_default=True,
    help="Largest number of tuples any enumeration may touch.",
)
@click.option("--verbose", "-v", is_flag=True, help="Log at DEBUG level.")
@click.pass_context
def cli(ctx, budget, verbose):
    """Normal realizations, their duals, WAMs and sum-product updates."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    ctx.obj = CliSettings(budget=budget)


@cli.command()
@click.option("--p", "p", type=int, required=True, help="Prime alphabet size.")
@click.option(
    "--generators",
    required=True,
    help='D-transform matrix, e.g. "1+D^2, 1+D+D^2".',
)
@click.option("--sections", type=click.IntRange(min=1), default=1, show_default=True)
@click.option(
    "--closure",
    type=click.Choice([c.value for c in Closure]),
    default=Closure.SECTION.value,
    show_default=True,
)
@click.option("--out", default="-", help="Output file (stdout by default).")
@click.pass_obj
@handle_errors
def build(settings, p, generators, sections, closure, out):
    """Build a trellis realization from a generator matrix."""
    matrix = parse_matrix(generators, p)
    realization = settings.realizations.build_trellis(
        matrix, sections, Closure(closure)
    )
    _write(formats.dumps(formats.realization_to_dict(realization)), out)


@cli.command(name="dual")
@click.argument("realization_file", type=READABLE)
@click.option("--out", default="-")
@click.pass_obj
@handle_errors
def dual_command(settings, realization_file, out):
    """Dualize a realization; sign inverters are listed on stderr."""
    service = settings.realizations
    realization = _load_realization(realization_file)
    dualized = service.dualize(realization)
    _write(formats.dumps(formats.realization_to_dict(dualized)), out)
    for item in service.sign_inverter_summary(realization, dualized):
        click.echo(
            f"sign inverter: {item['state']} at {item['constraint']} port "
            f"{item['port']} ({'-' if item['sign'] < 0 else '+'})",
            err=True,
        )


@cli.command()
@click.argument("realization_file", type=READABLE)
@click.option("--constraint", "constraint_id", default=None)
@click.option("--kind", type=click.Choice(["cwam", "hwam"]), default="cwam")
@click.option(
    "--domain",
    type=click.Choice(["primal", "dual-direct", "dual-transform"]),
    default="primal",
)
@click.option(
    "--render",
    type=click.Choice(["json", "gf"]),
    default="json",
    help="gf prints the generating function instead of the matrix.",
)
@click.option("--out", default="-")
@click.pass_obj
@handle_errors
def wam(settings, realization_file, constraint_id, kind, domain, render, out):
    """Weight adjacency matrix of one constraint."""
    realization = _load_realization(realization_file)
    constraint_id = _pick_constraint(realization, constraint_id)
    section = Section.from_block(realization, constraint_id)
    service = settings.wams
    matrix = service.wam_for_domain(section, domain)
    if render == "gf":
        _write(matrix.generating_function() + "\n", out)
    elif kind == "hwam":
        _write(formats.dumps(formats.hwam_to_dict(service.hwam(matrix))), out)
    else:
        _write(formats.dumps(formats.wam_to_dict(matrix)), out)


@cli.command()
@click.argument("realization_file", type=READABLE)
@click.option("--constraint", "constraint_id", default=None)
@click.option(
    "--all", "check_all", is_flag=True, help="Check every constraint (default)."
)
@click.option(
    "--against",
    "against_file",
    type=READABLE,
    default=None,
    help="Claimed dual realization to check instead of the computed one.",
)
@click.pass_obj
@handle_errors
def verify(settings, realization_file, constraint_id, check_all, against_file):
    """Check the MacWilliams identities and the realized-code duality."""
    if constraint_id and check_all:
        raise click.UsageError("--constraint and --all are mutually exclusive")
    realization = _load_realization(realization_file)
    against = _load_realization(against_file) if against_file else None
    ids = [constraint_id] if constraint_id else None
    outcome = settings.wams.verify_realization(realization, ids, against)
    report = formats.report_to_dict(outcome)
    for item in report["constraints"]:
        click.echo(f"{item['constraint']}: CWAM {item['cwam']}, HWAM {item['hwam']}")
        if "first_difference" in item:
            diff = item["first_difference"]
            click.echo(
                f"  first difference at ({diff['row']}, {diff['col']}): "
                f"{diff['transformed']} != {diff['direct']}"
            )
        if "error" in item:
            click.echo(f"  {item['error']}")
    duality = report["duality"]
    if duality.get("checked"):
        verdict = "PASS" if duality["passed"] else "FAIL"
        click.echo(f"realized code duality: {verdict}")
    else:
        click.echo(f"realized code duality: skipped ({duality.get('reason')})")
    click.echo(report["result"])
    if not outcome["passed"]:
        click.get_current_context().exit(1)


@cli.command()
@click.argument("realization_file", type=READABLE)
@click.option("--constraint", "constraint_id", default=None)
@click.option(
    "--message",
    "message_file",
    type=READABLE,
    required=True,
    help="Left-state message file.",
)
@click.option(
    "--weights",
    "weight_files",
    type=READABLE,
    multiple=True,
    help="Weight message file, once per symbol variable in port order.",
)
@click.option(
    "--path", type=click.Choice(["direct", "dual", "both"]), default="direct"
)
@click.pass_obj
@handle_errors
def spa(settings, realization_file, constraint_id, message_file, weight_files, path):
    """One sum-product update through a constraint."""
    realization = _load_realization(realization_file)
    constraint_id = _pick_constraint(realization, constraint_id)
    section = Section.from_block(realization, constraint_id)
    m = formats.message_from_dict(_read_document(message_file))
    fs = [formats.message_from_dict(_read_document(f)) for f in weight_files]
    service = settings.messages

    if path == "both":
        comparison = service.compare_paths(section, m, fs)
        document = {
            "direct": formats.message_to_dict(comparison.direct),
            "dual": formats.message_to_dict(comparison.dual),
            "equal": comparison.equal,
            "direct_muls": comparison.direct_muls,
            "dual_muls": comparison.dual_muls,
        }
        click.echo(formats.dumps(document), nl=False)
        if not comparison.equal:
            click.get_current_context().exit(1)
        return

    update = service.spa_update if path == "direct" else service.spa_via_dual
    click.echo(formats.dumps(formats.message_to_dict(update(section, m, fs))), nl=False)


@cli.command()
@click.argument("realization_file", type=READABLE)
@click.option("--emit", type=click.Choice(["code", "behavior"]), default="code")
@click.option("--out", default="-")
@click.pass_obj
@handle_errors
def behavior(settings, realization_file, emit, out):
    """The realized code, or the whole behavior at desk scale."""
    service = settings.realizations
    realization = _load_realization(realization_file)
    if emit == "code":
        document = formats.code_to_dict(service.code_of(realization))
    else:
        document = formats.behavior_to_dict(
            service.full_behavior(realization), realization
        )
    _write(formats.dumps(document), out)


def main():
    from dotenv import load_dotenv

    load_dotenv()
    cli(prog_name="codes")
