from enum import Enum, IntEnum
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Tuple

import numpy as np


class Basis(IntEnum):
    Z = 0
    X = 1


class Bb84State(IntEnum):
    """The four BB84 states, numbered in the order |0>, |+>, |1>, |->.

    With this numbering the basis is ``value % 2`` and the conjugate state
    is ``(value + 2) % 4``, which lets whole key arrays be handled as int8.
    """

    Z0 = 0
    X_PLUS = 1
    Z1 = 2
    X_MINUS = 3

    @property
    def basis(self) -> Basis:
        return Basis(self.value % 2)

    @property
    def conjugate(self) -> "Bb84State":
        return Bb84State((self.value + 2) % 4)


class Origin(IntEnum):
    DIRECT_FROM_ALICE = 0
    FORWARDED_BY_PEER = 1


class Party(str, Enum):
    BOB = "bob"
    CHARLIE = "charlie"

    @property
    def peer(self) -> "Party":
        return Party.CHARLIE if self is Party.BOB else Party.BOB


class Protocol(str, Enum):
    P1 = "p1"
    P1_PRIME = "p1prime"
    P2 = "p2"

    @property
    def family(self) -> "Protocol":
        """P1' shares every security bound with P1."""
        return Protocol.P1 if self is Protocol.P1_PRIME else self


class Role(str, Enum):
    HONEST = "honest"
    REPUDIATE = "repudiate"
    FORGE = "forge"


class Decision(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"


class QubitState(NamedTuple):
    amplitudes: Tuple[complex, complex]

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.amplitudes, dtype=complex)


class TwoQubitState(NamedTuple):
    # Indexed |00>, |01>, |10>, |11>
    amplitudes: Tuple[complex, complex, complex, complex]

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.amplitudes, dtype=complex)


class EliminationRecord(NamedTuple):
    position: int
    message_bit: int
    excluded: Bb84State
    origin: Origin


class ClassicalRecord(NamedTuple):
    position: int
    message_bit: int
    bit: int
    origin: Origin


class CostMatrix(NamedTuple):
    # Rows: state sent, columns: state declared, both in Bb84State order
    entries: np.ndarray

    def entry(self, row: Bb84State, col: Bb84State) -> float:
        return float(self.entries[int(row), int(col)])


class Povm(NamedTuple):
    elements: Tuple[np.ndarray, ...]
    labels: Tuple[Bb84State, ...]


class RecordTable(NamedTuple):
    """Columnar store of the records one recipient holds for one message bit.

    ``values`` holds excluded Bb84State codes for P1/P1' and key bits for P2.
    """

    positions: np.ndarray
    values: np.ndarray
    origins: np.ndarray

    @property
    def size(self) -> int:
        return int(self.positions.size)

    def select(self, origin: Optional[Origin]) -> "RecordTable":
        if origin is None:
            return self
        mask = self.origins == int(origin)
        return RecordTable(self.positions[mask], self.values[mask], self.origins[mask])


class RecipientLedger(NamedTuple):
    owner: Party
    tables: Tuple[RecordTable, RecordTable]
    # Boolean masks of length L: True where the owner forwarded the element
    forwarded: Tuple[np.ndarray, np.ndarray]
    received_counts: Tuple[int, int]
    classical: bool = False

    def kept_mask(self, message_bit: int) -> np.ndarray:
        return ~self.forwarded[message_bit]

    def forwarded_positions(self, message_bit: int) -> FrozenSet[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.forwarded[message_bit]))

    def records(self, message_bit: int) -> List:
        table = self.tables[message_bit]
        if self.classical:
            return [
                ClassicalRecord(int(p), message_bit, int(v), Origin(int(o)))
                for p, v, o in zip(table.positions, table.values, table.origins)
            ]
        return [
            EliminationRecord(int(p), message_bit, Bb84State(int(v)), Origin(int(o)))
            for p, v, o in zip(table.positions, table.values, table.origins)
        ]


class SignaturePair(NamedTuple):
    """Alice's private keys for both messages.

    P1 and P1' fill ``private_keys`` with Bb84State code arrays. P2 fills
    ``keys_b`` and ``keys_c`` with independent bit arrays.
    """

    private_keys: Optional[Tuple[np.ndarray, np.ndarray]] = None
    keys_b: Optional[Tuple[np.ndarray, np.ndarray]] = None
    keys_c: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @property
    def classical(self) -> bool:
        return self.private_keys is None


class Declaration(NamedTuple):
    message_bit: int
    declared_key: Optional[np.ndarray] = None
    declared_key_b: Optional[np.ndarray] = None
    declared_key_c: Optional[np.ndarray] = None

    @property
    def classical(self) -> bool:
        return self.declared_key is None


class Verdict(NamedTuple):
    decision: Decision
    mismatch_count: int
    records_checked: int

    @property
    def accepted(self) -> bool:
        return self.decision is Decision.ACCEPT


class Distribution(NamedTuple):
    bob: RecipientLedger
    charlie: RecipientLedger
    aborted: bool


class BoundReport(NamedTuple):
    protocol: Protocol
    length: int
    s_a: float
    s_v: float
    r: float
    repudiation_bound: float
    forging_bound: float
    abort_bound: float
    K: int
    vacuous: bool


class ThresholdChoice(NamedTuple):
    s_a: float
    s_v: float
    value: float
    repudiation_bound: float
    forging_bound: float


class B92Result(NamedTuple):
    # (alice_pair, bob_outcome) -> probability, pairs named like "0+"
    table: Dict[Tuple[str, str], float]
    p_both_wrong: float
    p_slot2_correct_given_slot1_wrong: float


class CheckReport(NamedTuple):
    name: str
    passed: bool
    value: float
    detail: str


class TrialStats(NamedTuple):
    trials: int
    successes: int
    aborts: int
    rate: float
    ci_low: float
    ci_high: float
    bound: float
    mismatch_histogram: Dict[int, float]
