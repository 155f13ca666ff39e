import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.algebra import GroupVector, Prime
from src.utils.dparse import PolyMatrix
from src.utils.errors import (
    DimensionError,
    DomainError,
    ResourceError,
    ValidationError,
)
from src.utils.linear_code import (
    DEFAULT_BUDGET,
    LinearCode,
    canonicalize,
    codeword_array,
    dual,
    negate_coordinates,
    shorten,
)

logger = logging.getLogger(__name__)


class VarKind(str, Enum):
    SYMBOL = "symbol"
    STATE = "state"


class Closure(str, Enum):
    ZERO = "zero"
    TAILBITE = "tailbite"
    SECTION = "section"


@dataclass(frozen=True)
class VarDecl:
    id: str
    kind: VarKind
    p: int
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "kind", VarKind(self.kind))


@dataclass(frozen=True)
class PortBinding:
    var: str
    sign: int = 1


@dataclass(frozen=True)
class ConstraintBlock:
    """A constraint code whose coordinates are dealt to ``ports`` left to right."""

    id: str
    code: LinearCode
    ports: Tuple[PortBinding, ...]

    def __post_init__(self):
        object.__setattr__(self, "ports", tuple(self.ports))


@dataclass(frozen=True)
class NormalRealization:
    """
    Variables and constraint blocks of a normal realization.

    ``fragment`` marks an open single section whose state variables are bound
    once each; such a value is only meaningful to the per-constraint services.
    """

    p: int
    vars: Tuple[VarDecl, ...]
    constraints: Tuple[ConstraintBlock, ...]
    fragment: bool = False

    def __post_init__(self):
        object.__setattr__(self, "p", Prime(self.p))
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "constraints", tuple(self.constraints))

    def var(self, var_id: str) -> VarDecl:
        for decl in self.vars:
            if decl.id == var_id:
                return decl
        raise DomainError(f"unknown variable '{var_id}'")

    def constraint(self, constraint_id: str) -> ConstraintBlock:
        for block in self.constraints:
            if block.id == constraint_id:
                return block
        raise DomainError(f"unknown constraint '{constraint_id}'")

    @property
    def symbol_vars(self) -> List[VarDecl]:
        return [v for v in self.vars if v.kind == VarKind.SYMBOL]

    @property
    def state_vars(self) -> List[VarDecl]:
        return [v for v in self.vars if v.kind == VarKind.STATE]

    def port_positions(self, block: ConstraintBlock) -> List[Tuple[int, ...]]:
        """Code coordinates owned by each port of ``block``."""
        positions = []
        start = 0
        for port in block.ports:
            dim = self.var(port.var).dim
            positions.append(tuple(range(start, start + dim)))
            start += dim
        return positions


@dataclass(frozen=True)
class SectionLayout:
    """Coordinate positions of left state | symbol variables | right state."""

    left: Tuple[int, ...]
    symbols: Tuple[Tuple[int, ...], ...]
    right: Tuple[int, ...]

    @property
    def left_dim(self) -> int:
        return len(self.left)

    @property
    def right_dim(self) -> int:
        return len(self.right)

    @property
    def symbol_dims(self) -> Tuple[int, ...]:
        return tuple(len(s) for s in self.symbols)

    @property
    def symbol_positions(self) -> Tuple[int, ...]:
        return tuple(c for s in self.symbols for c in s)

    @property
    def length(self) -> int:
        return self.left_dim + len(self.symbol_positions) + self.right_dim

    @classmethod
    def contiguous(
        cls, left_dim: int, symbol_dims: Sequence[int], right_dim: int
    ) -> "SectionLayout":
        left = tuple(range(left_dim))
        start = left_dim
        symbols = []
        for dim in symbol_dims:
            symbols.append(tuple(range(start, start + dim)))
            start += dim
        return cls(left, tuple(symbols), tuple(range(start, start + right_dim)))


@dataclass(frozen=True)
class Section:
    """One constraint code read as a (left state, symbols, right state) relation."""

    code: LinearCode
    layout: SectionLayout
    label: str = "C"

    def __post_init__(self):
        if self.layout.length != self.code.n:
            raise DimensionError(
                f"layout covers {self.layout.length} coordinates but {self.label} "
                f"has length {self.code.n}"
            )

    @property
    def p(self) -> int:
        return self.code.p

    @classmethod
    def from_code(
        cls,
        code: LinearCode,
        left_dim: int = 0,
        symbol_dims: Optional[Sequence[int]] = None,
        right_dim: int = 0,
        label: str = "C",
    ) -> "Section":
        if symbol_dims is None:
            symbol_dims = [code.n - left_dim - right_dim]
        return cls(
            code, SectionLayout.contiguous(left_dim, symbol_dims, right_dim), label
        )

    @classmethod
    def from_block(cls, realization: NormalRealization, block_id: str) -> "Section":
        """
        Split a block's ports into leading state ports, symbol ports and
        trailing state ports.
        """
        block = realization.constraint(block_id)
        positions = realization.port_positions(block)
        kinds = [realization.var(port.var).kind for port in block.ports]
        symbol_idx = [i for i, kind in enumerate(kinds) if kind == VarKind.SYMBOL]
        if symbol_idx:
            first, end = symbol_idx[0], symbol_idx[-1] + 1
        else:
            # a pure state constraint splits its ports in half
            first = end = len(kinds) // 2
        if any(kinds[i] != VarKind.SYMBOL for i in range(first, end)):
            raise DimensionError(
                f"constraint {block.id} interleaves state ports between its symbols"
            )
        left = tuple(c for i in range(0, first) for c in positions[i])
        right = tuple(c for i in range(end, len(kinds)) for c in positions[i])
        symbols = tuple(positions[i] for i in symbol_idx)
        return cls(block.code, SectionLayout(left, symbols, right), block.id)

    def with_code(self, code: LinearCode) -> "Section":
        return replace(self, code=code)

    def state_index(self, codewords: np.ndarray, which: str) -> np.ndarray:
        """Canonical indices of the left or right state of each codeword row."""
        cols = self.layout.left if which == "left" else self.layout.right
        if not cols:
            return np.zeros(codewords.shape[0], dtype=np.int64)
        weights = self.p ** np.arange(len(cols), dtype=np.int64)
        return codewords[:, list(cols)] @ weights


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(eq=False)
class Behavior:
    """Configurations as rows of ``configs``; columns follow ``var_ids`` order."""

    p: int
    var_ids: Tuple[str, ...]
    dims: Tuple[int, ...]
    configs: np.ndarray
    offsets: Dict[str, int] = field(init=False)

    def __post_init__(self):
        self.offsets = {}
        start = 0
        for var_id, dim in zip(self.var_ids, self.dims):
            self.offsets[var_id] = start
            start += dim

    def __len__(self) -> int:
        return self.configs.shape[0]

    def columns(self, var_ids: Sequence[str]) -> List[int]:
        dims = dict(zip(self.var_ids, self.dims))
        return [
            self.offsets[v] + j for v in var_ids for j in range(dims[v])
        ]

    def assignment(self, row: int) -> Dict[str, GroupVector]:
        config = self.configs[row]
        return {
            var_id: GroupVector(
                self.p, tuple(config[self.offsets[var_id] : self.offsets[var_id] + dim])
            )
            for var_id, dim in zip(self.var_ids, self.dims)
        }

    def contains(self, assignment: Dict[str, Sequence[int]]) -> bool:
        row = np.concatenate(
            [np.asarray(assignment[v], dtype=np.int64) for v in self.var_ids]
            or [np.zeros(0, dtype=np.int64)]
        )
        return bool((self.configs == row).all(axis=1).any())

    def is_group(self) -> bool:
        """Contains zero and is closed under addition (quadratic check)."""
        rows = {tuple(r) for r in self.configs.tolist()}
        width = self.configs.shape[1]
        if tuple([0] * width) not in rows:
            return False
        for a in rows:
            for b in rows:
                if tuple((x + y) % self.p for x, y in zip(a, b)) not in rows:
                    return False
        return True


class RealizationService:
    """
    Builds, validates, dualizes and enumerates normal realizations.
    """

    def __init__(self, budget: int = DEFAULT_BUDGET):
        self.budget = budget

    def validate(self, realization: NormalRealization) -> ValidationReport:
        """
        Check the normal degree conditions and block shapes.

        Returns:
            ValidationReport: Every violation found; empty when valid.
        """
        violations: List[str] = []
        degrees: Dict[str, int] = {}
        decls: Dict[str, VarDecl] = {}
        for decl in realization.vars:
            if decl.id in decls:
                violations.append(f"duplicate variable id: {decl.id}")
            decls[decl.id] = decl
            degrees[decl.id] = 0
            if decl.dim < 1:
                violations.append(f"dimension {decl.dim} < 1: {decl.id}")
            if decl.p != realization.p:
                violations.append(
                    f"p mismatch: {decl.id} over Z_{decl.p} in a realization over "
                    f"Z_{realization.p}"
                )

        seen_blocks = set()
        for block in realization.constraints:
            if block.id in seen_blocks:
                violations.append(f"duplicate constraint id: {block.id}")
            seen_blocks.add(block.id)
            if block.code.p != realization.p:
                violations.append(
                    f"p mismatch: {block.id} is a code over Z_{block.code.p}"
                )
            total = 0
            for port in block.ports:
                decl = decls.get(port.var)
                if decl is None:
                    violations.append(f"unknown variable {port.var} in {block.id}")
                    continue
                degrees[port.var] += 1
                total += decl.dim
                if port.sign not in (1, -1):
                    violations.append(f"sign {port.sign} on {block.id}.{port.var}")
                elif port.sign == -1 and decl.kind == VarKind.SYMBOL:
                    violations.append(
                        f"sign inverter on symbol port {block.id}.{port.var}"
                    )
            if total != block.code.n:
                violations.append(
                    f"length mismatch: {block.id} has length {block.code.n} but its "
                    f"ports total {total}"
                )

        for var_id, decl in decls.items():
            degree = degrees[var_id]
            if decl.kind == VarKind.SYMBOL and degree != 1:
                violations.append(f"symbol degree {degree}: {var_id}")
            if decl.kind == VarKind.STATE and degree != 2:
                violations.append(f"state degree {degree}: {var_id}")

        report = ValidationReport(tuple(violations))
        if not report.ok:
            logger.debug(f"Validation found {len(violations)} violation(s)")
        return report

    def require_valid(self, realization: NormalRealization):
        if realization.fragment:
            return
        report = self.validate(realization)
        if not report.ok:
            raise ValidationError(report)

    def build_trellis(
        self,
        generators: PolyMatrix,
        sections: int = 1,
        closure: Closure = Closure.SECTION,
    ) -> NormalRealization:
        """
        Conventional trellis realization of a feedforward convolutional code.

        Args:
            generators: k x n polynomial generator matrix G(D).
            sections: Number of trellis sections L.
            closure: How the ends are tied off.

        Returns:
            NormalRealization: One time-invariant section code per section.
        """
        closure = Closure(closure)
        if sections < 1:
            raise DimensionError(
                f"a trellis needs at least one section, got {sections}"
            )
        if closure == Closure.SECTION and sections != 1:
            raise DomainError("single-section closure takes exactly one section")

        p, n = generators.p, generators.n
        section_code = self.section_code(generators)
        nu = (section_code.n - n) // 2

        if closure == Closure.SECTION:
            realization = self._open_section(p, n, nu, section_code)
        elif closure == Closure.TAILBITE:
            realization = self._tailbiting(p, n, nu, sections, section_code)
        else:
            realization = self._zero_boundary(p, n, nu, sections, section_code)

        logger.info(
            f"Built {closure.value} trellis over Z_{p}: L={sections}, "
            f"state dimension {nu}, section code ({section_code.n}, "
            f"{section_code.dimension})"
        )
        return realization

    def section_code(self, generators: PolyMatrix) -> LinearCode:
        """Span of the (state, output, next-state) impulse-response transitions."""
        p, k, n = generators.p, generators.k, generators.n
        degrees = [generators.row_degree(i) for i in range(k)]
        nu = sum(degrees)
        transitions = []
        cell = 0
        for i, degree in enumerate(degrees):
            for j in range(degree + 1):
                row = np.zeros(2 * nu + n, dtype=np.int64)
                if 1 <= j <= degree:
                    row[cell + j - 1] = 1
                row[nu : nu + n] = generators.impulse_response(i, j)
                if j + 1 <= degree:
                    row[nu + n + cell + j] = 1
                transitions.append(row)
            cell += degree
        code = canonicalize(LinearCode.from_rows(p, 2 * nu + n, transitions))
        if code.dimension < k + nu:
            logger.warning(
                f"Section code has dimension {code.dimension} < k + nu = {k + nu}; "
                f"the generator matrix is not delay-free and noncatastrophic"
            )
        return code

    def _open_section(
        self, p: int, n: int, nu: int, code: LinearCode
    ) -> NormalRealization:
        vars_ = [VarDecl("A0", VarKind.SYMBOL, p, n)]
        ports = [PortBinding("A0")]
        if nu:
            vars_ = [
                VarDecl("S0", VarKind.STATE, p, nu),
                vars_[0],
                VarDecl("S1", VarKind.STATE, p, nu),
            ]
            ports = [PortBinding("S0"), PortBinding("A0"), PortBinding("S1")]
        return NormalRealization(
            p, tuple(vars_), (ConstraintBlock("C0", code, tuple(ports)),), fragment=True
        )

    def _tailbiting(
        self, p: int, n: int, nu: int, length: int, code: LinearCode
    ) -> NormalRealization:
        vars_ = []
        blocks = []
        for t in range(length):
            if nu:
                vars_.append(VarDecl(f"S{t}", VarKind.STATE, p, nu))
            vars_.append(VarDecl(f"A{t}", VarKind.SYMBOL, p, n))
        for t in range(length):
            ports = [PortBinding(f"A{t}")]
            if nu:
                ports = [
                    PortBinding(f"S{t}"),
                    PortBinding(f"A{t}"),
                    PortBinding(f"S{(t + 1) % length}"),
                ]
            blocks.append(ConstraintBlock(f"C{t}", code, tuple(ports)))
        return NormalRealization(p, tuple(vars_), tuple(blocks))

    def _zero_boundary(
        self, p: int, n: int, nu: int, length: int, code: LinearCode
    ) -> NormalRealization:
        left_states = list(range(nu))
        right_states = list(range(nu + n, 2 * nu + n))
        vars_ = []
        blocks = []
        for t in range(length):
            if nu and t > 0:
                vars_.append(VarDecl(f"S{t}", VarKind.STATE, p, nu))
            vars_.append(VarDecl(f"A{t}", VarKind.SYMBOL, p, n))
        for t in range(length):
            cut = []
            ports = []
            if nu:
                if t == 0:
                    cut += left_states
                else:
                    ports.append(PortBinding(f"S{t}"))
            ports.append(PortBinding(f"A{t}"))
            if nu:
                if t == length - 1:
                    cut += right_states
                else:
                    ports.append(PortBinding(f"S{t + 1}"))
            block_code = shorten(code, cut) if cut else code
            blocks.append(ConstraintBlock(f"C{t}", block_code, tuple(ports)))
        return NormalRealization(p, tuple(vars_), tuple(blocks))

    def flipped_ports(self, realization: NormalRealization) -> Dict[str, List[int]]:
        """
        Port indices, per constraint, that receive the sign inverter of their edge.

        The first port of each state variable in (constraint order, port index)
        order is flipped. A state bound only once, as in an open section, is
        flipped where it is a trailing port of its block.
        """
        first_seen: Dict[str, Tuple[str, int]] = {}
        degree: Dict[str, int] = {}
        trailing: Dict[str, Tuple[str, int]] = {}
        for block in realization.constraints:
            kinds = [realization.var(port.var).kind for port in block.ports]
            symbol_idx = [i for i, kind in enumerate(kinds) if kind == VarKind.SYMBOL]
            last_symbol = symbol_idx[-1] if symbol_idx else -1
            for i, port in enumerate(block.ports):
                if kinds[i] != VarKind.STATE:
                    continue
                degree[port.var] = degree.get(port.var, 0) + 1
                first_seen.setdefault(port.var, (block.id, i))
                if i > last_symbol:
                    trailing.setdefault(port.var, (block.id, i))

        flipped: Dict[str, List[int]] = {b.id: [] for b in realization.constraints}
        for var_id, count in degree.items():
            if count >= 2:
                block_id, index = first_seen[var_id]
            elif var_id in trailing:
                block_id, index = trailing[var_id]
            else:
                continue
            flipped[block_id].append(index)
        return flipped

    def dualize(self, realization: NormalRealization) -> NormalRealization:
        """
        Replace every constraint code by its orthogonal code and insert one sign
        inverter per state edge, realized by negating the flipped port's
        coordinates in the stored generators.
        """
        self.require_valid(realization)
        flipped = self.flipped_ports(realization)
        blocks = []
        inverters = 0
        for block in realization.constraints:
            positions = realization.port_positions(block)
            indices = flipped[block.id]
            coords = [c for i in indices for c in positions[i]]
            code = canonicalize(negate_coordinates(dual(block.code), coords))
            ports = tuple(
                PortBinding(port.var, -port.sign if i in indices else port.sign)
                for i, port in enumerate(block.ports)
            )
            inverters += len(indices)
            blocks.append(ConstraintBlock(block.id, code, ports))
        logger.info(
            f"Dualized {len(blocks)} constraint(s) with {inverters} sign inverter(s)"
        )
        return replace(realization, constraints=tuple(blocks))

    def sign_inverter_summary(
        self, primal: NormalRealization, dual_realization: NormalRealization
    ) -> List[Dict[str, object]]:
        """Ports whose sign differs between two realizations on the same graph."""
        summary = []
        for before, after in zip(primal.constraints, dual_realization.constraints):
            for i, (a, b) in enumerate(zip(before.ports, after.ports)):
                if a.sign != b.sign:
                    summary.append(
                        {
                            "constraint": after.id,
                            "port": i,
                            "state": b.var,
                            "sign": b.sign,
                        }
                    )
        return summary

    def full_behavior(self, realization: NormalRealization) -> Behavior:
        """
        All configurations satisfying every constraint.

        Constraints are joined in declaration order; each block's codewords are
        indexed by the values of its already-bound variables so only consistent
        extensions are generated. The budget bounds the number of codewords
        scanned plus configurations generated.
        """
        self.require_valid(realization)
        p = realization.p
        var_ids = tuple(v.id for v in realization.vars)
        dims = tuple(v.dim for v in realization.vars)
        offsets = {}
        start = 0
        for var_id, dim in zip(var_ids, dims):
            offsets[var_id] = start
            start += dim
        width = start

        bound = set()
        configs = np.zeros((1, width), dtype=np.int64)
        tally = 0
        for block in realization.constraints:
            positions = realization.port_positions(block)
            if tally + block.code.size > self.budget:
                raise ResourceError(tally + block.code.size, self.budget)
            codewords = codeword_array(block.code, budget=self.budget)
            tally += codewords.shape[0]

            # a variable repeated inside one block must agree with itself
            first_port: Dict[str, int] = {}
            for i, port in enumerate(block.ports):
                if port.var in first_port:
                    same = (
                        codewords[:, list(positions[i])]
                        == codewords[:, list(positions[first_port[port.var]])]
                    ).all(axis=1)
                    codewords = codewords[same]
                else:
                    first_port[port.var] = i

            shared = [v for v in first_port if v in bound]
            cw_cols = [c for v in shared for c in positions[first_port[v]]]
            cfg_cols = [
                offsets[v] + j
                for v in shared
                for j in range(len(positions[first_port[v]]))
            ]

            index: Dict[tuple, List[int]] = {}
            for row, key in enumerate(map(tuple, codewords[:, cw_cols].tolist())):
                index.setdefault(key, []).append(row)

            keys = list(map(tuple, configs[:, cfg_cols].tolist()))
            matches = [index.get(key, []) for key in keys]
            generated = sum(len(m) for m in matches)
            tally += generated
            if tally > self.budget:
                raise ResourceError(tally, self.budget)

            cfg_rows = np.repeat(np.arange(len(keys)), [len(m) for m in matches])
            cw_rows = np.array([r for m in matches for r in m], dtype=np.int64)
            extended = configs[cfg_rows]
            for v, i in first_port.items():
                cols = [offsets[v] + j for j in range(len(positions[i]))]
                extended[:, cols] = codewords[cw_rows][:, list(positions[i])]
            configs = extended
            bound.update(first_port)
            logger.debug(
                f"Joined {block.id}: {codewords.shape[0]} codewords, "
                f"{configs.shape[0]} partial configurations"
            )

        missing = [v for v in var_ids if v not in bound]
        if missing:
            raise ValidationError(
                ValidationReport(tuple(f"unbound variable: {v}" for v in missing))
            )
        if width:
            configs = np.unique(configs, axis=0)
        return Behavior(p, var_ids, dims, configs)

    def code_of(self, realization: NormalRealization) -> LinearCode:
        """Projection of the full behavior onto the symbol variables."""
        behavior = self.full_behavior(realization)
        symbols = [v.id for v in realization.symbol_vars]
        cols = behavior.columns(symbols)
        rows = behavior.configs[:, cols]
        return canonicalize(LinearCode.from_rows(realization.p, len(cols), rows))

    def sections(self, realization: NormalRealization) -> List[Section]:
        return [Section.from_block(realization, b.id) for b in realization.constraints]
