import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.services.realization_service import Section
from src.utils.algebra import CycloRat, inverse_transform_apply, transform_matrix
from src.utils.errors import DimensionError, DomainError
from src.utils.linear_code import DEFAULT_BUDGET, codeword_array, dual

logger = logging.getLogger(__name__)

PRIMAL = "primal"
TRANSFORMED = "transformed"


@dataclass(frozen=True)
class Message:
    """One exact value per element of (Z_p)^dim, in canonical order."""

    p: int
    dim: int
    values: Tuple[CycloRat, ...]
    domain: str = PRIMAL

    def __post_init__(self):
        values = tuple(
            v if isinstance(v, CycloRat) else CycloRat.rational(self.p, Fraction(v))
            for v in self.values
        )
        if len(values) != self.p**self.dim:
            raise DimensionError(
                f"a message on (Z_{self.p})^{self.dim} needs {self.p ** self.dim} "
                f"values, got {len(values)}"
            )
        if self.domain not in (PRIMAL, TRANSFORMED):
            raise DomainError(f"unknown message domain '{self.domain}'")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(
        cls, p: int, dim: int, values: Sequence[Union[int, Fraction, CycloRat]]
    ) -> "Message":
        return cls(p, dim, tuple(values))

    @classmethod
    def zeros(cls, p: int, dim: int) -> "Message":
        return cls(p, dim, (0,) * p**dim)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, index: int) -> CycloRat:
        return self.values[index]

    def is_rational(self) -> bool:
        return all(v.is_rational() for v in self.values)

    def rationals(self) -> List[Fraction]:
        return [v.to_fraction() for v in self.values]


@dataclass(frozen=True)
class PathComparison:
    direct: Message
    dual: Message
    direct_muls: int
    dual_muls: int

    @property
    def equal(self) -> bool:
        return self.direct == self.dual


class MultiplicationCounter:
    def __init__(self):
        self.count = 0

    def add(self, n: int = 1):
        self.count += n


class SumProductService:
    """
    Sum-product update through one constraint code, in the primal domain and
    through the transform of the dual code.
    """

    def __init__(self, budget: int = DEFAULT_BUDGET):
        self.budget = budget

    def _check_inputs(
        self, section: Section, m: Message, fs: Sequence[Message], domain: str
    ):
        layout = section.layout
        for msg in [m, *fs]:
            if msg.domain != domain:
                raise DomainError(f"expected a {domain} message, got {msg.domain}")
            if msg.p != section.p:
                raise DimensionError(
                    f"message over Z_{msg.p} sent into a code over Z_{section.p}"
                )
        if m.dim != layout.left_dim:
            raise DimensionError(
                f"state message has dimension {m.dim}, {section.label} expects "
                f"{layout.left_dim}"
            )
        if len(fs) != len(layout.symbols):
            raise DimensionError(
                f"{section.label} has {len(layout.symbols)} symbol variable(s), "
                f"got {len(fs)} weight message(s)"
            )
        for f, dim in zip(fs, layout.symbol_dims):
            if f.dim != dim:
                raise DimensionError(
                    f"weight message has dimension {f.dim}, expected {dim}"
                )

    def _update(
        self,
        section: Section,
        m: Message,
        fs: Sequence[Message],
        domain: str,
        counter: Optional[MultiplicationCounter],
    ) -> Message:
        p, layout = section.p, section.layout
        codewords = codeword_array(section.code, self.budget)
        lefts = section.state_index(codewords, "left").tolist()
        rights = section.state_index(codewords, "right").tolist()
        symbol_indices = []
        for positions in layout.symbols:
            weights = p ** np.arange(len(positions), dtype=np.int64)
            symbol_indices.append((codewords[:, list(positions)] @ weights).tolist())

        out = [CycloRat.zero(p)] * p**layout.right_dim
        for row, (left, right) in enumerate(zip(lefts, rights)):
            term = m[left]
            for f, indices in zip(fs, symbol_indices):
                term = term * f[indices[row]]
            if counter is not None:
                counter.add(len(fs))
            out[right] = out[right] + term
        return Message(p, layout.right_dim, tuple(out), domain)

    def spa_update(
        self,
        section: Section,
        m: Message,
        fs: Sequence[Message],
        counter: Optional[MultiplicationCounter] = None,
    ) -> Message:
        """
        m'(s') = sum over codewords (s, a, s') of m(s) * prod_i f_i(a_i).

        Args:
            section: The constraint and its state/symbol layout.
            m: Message on the left state.
            fs: One weight message per symbol variable.
            counter: Optional multiplication tally.

        Returns:
            Message: The message on the right state.
        """
        self._check_inputs(section, m, fs, PRIMAL)
        return self._update(section, m, fs, PRIMAL, counter)

    def transform_message(self, m: Message) -> Message:
        if m.domain != PRIMAL:
            raise DomainError("message is already in the transform domain")
        H = transform_matrix(m.p, m.dim)
        return Message(m.p, m.dim, tuple(H.apply(m.values)), TRANSFORMED)

    def inverse_transform_message(self, M: Message) -> Message:
        if M.domain != TRANSFORMED:
            raise DomainError("message is not in the transform domain")
        H = transform_matrix(M.p, M.dim)
        return Message(M.p, M.dim, tuple(inverse_transform_apply(H, M.values)), PRIMAL)

    def dual_spa_update(
        self,
        dual_section: Section,
        M: Message,
        Fs: Sequence[Message],
        counter: Optional[MultiplicationCounter] = None,
    ) -> Message:
        """Plain update over the orthogonal code, keyed by the un-negated state."""
        self._check_inputs(dual_section, M, Fs, TRANSFORMED)
        return self._update(dual_section, M, Fs, TRANSFORMED, counter)

    def spa_via_dual(
        self,
        section: Section,
        m: Message,
        fs: Sequence[Message],
        counter: Optional[MultiplicationCounter] = None,
    ) -> Message:
        """
        Transform the inputs, update through the dual code, and return
        H M' / |C^perp|, which equals spa_update exactly.
        """
        self._check_inputs(section, m, fs, PRIMAL)
        dual_section = section.with_code(dual(section.code))
        M = self.transform_message(m)
        Fs = [self.transform_message(f) for f in fs]
        M_out = self.dual_spa_update(dual_section, M, Fs, counter)
        H = transform_matrix(section.p, section.layout.right_dim)
        scale = dual_section.code.size
        values = tuple(v / scale for v in H.apply(M_out.values))
        return Message(section.p, section.layout.right_dim, values, PRIMAL)

    def compare_paths(
        self, section: Section, m: Message, fs: Sequence[Message]
    ) -> PathComparison:
        direct_counter = MultiplicationCounter()
        dual_counter = MultiplicationCounter()
        direct = self.spa_update(section, m, fs, direct_counter)
        via_dual = self.spa_via_dual(section, m, fs, dual_counter)
        comparison = PathComparison(
            direct, via_dual, direct_counter.count, dual_counter.count
        )
        logger.info(
            f"SPA through {section.label}: direct {direct_counter.count} "
            f"multiplications, dual {dual_counter.count}, "
            f"{'equal' if comparison.equal else 'DIFFERENT'}"
        )
        return comparison
