"""
Exact qubit arithmetic for the BB84 signature states.

Everything here works on plain numpy vectors. Global phases are dropped, so
Pauli corrections on BB84 states reduce to label permutations.
"""

from itertools import product
from typing import NamedTuple, Tuple

import numpy as np

from .errors import InvalidPovmError, NormalizationError
from .models import (
    B92Result,
    Basis,
    Bb84State,
    CostMatrix,
    Povm,
    QubitState,
    TwoQubitState,
)

NORM_TOLERANCE = 1e-9
POVM_TOLERANCE = 1e-10

_H = 1 / np.sqrt(2)

# Rows follow Bb84State numbering: |0>, |+>, |1>, |->
BB84_VECTORS = np.array(
    [
        [1, 0],
        [_H, _H],
        [0, 1],
        [_H, -_H],
    ],
    dtype=complex,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Per-element mismatch cost of declaring column j when row i was sent, order |0>, |+>, |1>, |->
_PRINTED_COST = np.array(
    [
        [0, 1 / 4, 1 / 2, 1 / 4],
        [1 / 4, 0, 1 / 4, 1 / 2],
        [1 / 2, 1 / 4, 0, 1 / 4],
        [1 / 4, 1 / 2, 1 / 4, 0],
    ]
)


class UseOutcome(NamedTuple):
    basis: Basis
    outcome: Bb84State
    excluded: Bb84State


class UseBatch(NamedTuple):
    bases: np.ndarray
    outcomes: np.ndarray
    excluded: np.ndarray


def bb84_qubit(s: Bb84State) -> QubitState:
    a, b = BB84_VECTORS[int(s)]
    return QubitState((complex(a), complex(b)))


def basis_states(basis: Basis) -> Tuple[Bb84State, Bb84State]:
    return Bb84State(int(basis)), Bb84State(int(basis) + 2)


def _check_normalized(vectors: np.ndarray) -> None:
    norms = np.sum(np.abs(vectors) ** 2, axis=-1)
    bad = np.abs(norms - 1) > NORM_TOLERANCE
    if np.any(bad):
        worst = float(np.max(np.abs(norms - 1)))
        raise NormalizationError(f"state is not normalized (|norm^2 - 1| = {worst:.3g})")


def conjugate_state(s: Bb84State) -> Bb84State:
    return s.conjugate


def conjugate_codes(codes: np.ndarray) -> np.ndarray:
    return ((codes + 2) % 4).astype(np.int8)


def outcome_probability(state: QubitState, declared: Bb84State) -> float:
    """Born-rule probability |<declared|state>|^2."""
    overlap = np.vdot(BB84_VECTORS[int(declared)], state.vector)
    return float(abs(overlap) ** 2)


def measure_projective(state: QubitState, basis: Basis, rng: np.random.Generator) -> Bb84State:
    vector = state.vector
    _check_normalized(vector)
    first, second = basis_states(basis)
    p_first = abs(np.vdot(BB84_VECTORS[int(first)], vector)) ** 2
    return first if rng.random() < p_first else second


def use_measure(state: QubitState, rng: np.random.Generator) -> UseOutcome:
    """Unambiguous state elimination: random basis, exclude the outcome's conjugate."""
    basis = Basis(int(rng.integers(2)))
    outcome = measure_projective(state, basis, rng)
    return UseOutcome(basis, outcome, outcome.conjugate)


def use_measure_batch(vectors: np.ndarray, rng: np.random.Generator) -> UseBatch:
    """USE-measure an (n, 2) array of qubit states independently.

    Draws all n bases first, then all n Born-rule coins.
    """
    vectors = np.asarray(vectors, dtype=complex).reshape(-1, 2)
    _check_normalized(vectors)
    n = vectors.shape[0]
    bases = rng.integers(0, 2, size=n).astype(np.int8)
    first = BB84_VECTORS[bases]
    p_first = np.abs(np.sum(first.conj() * vectors, axis=1)) ** 2
    second_drawn = rng.random(n) >= p_first
    outcomes = (bases + 2 * second_drawn).astype(np.int8)
    return UseBatch(bases, outcomes, conjugate_codes(outcomes))


def cost_matrix() -> CostMatrix:
    return CostMatrix(_PRINTED_COST.copy())


def derived_cost_matrix() -> CostMatrix:
    """Cost matrix recomputed from an honest USE on each sent state.

    Entry (i, j) is the chance the USE excludes j when i was sent: the basis
    of j is picked with probability 1/2, then the outcome must be conj(j).
    """
    entries = np.empty((4, 4))
    for i, j in product(Bb84State, repeat=2):
        overlap = np.vdot(BB84_VECTORS[int(j.conjugate)], BB84_VECTORS[int(i)])
        entries[int(i), int(j)] = 0.5 * abs(overlap) ** 2
    return CostMatrix(entries)


def validate_povm(povm: Povm) -> None:
    if len(povm.elements) != len(povm.labels):
        raise InvalidPovmError("each POVM element needs exactly one declaration label")
    total = np.zeros((2, 2), dtype=complex)
    for element in povm.elements:
        element = np.asarray(element, dtype=complex)
        if not np.allclose(element, element.conj().T, atol=POVM_TOLERANCE):
            raise InvalidPovmError("POVM element is not Hermitian")
        if np.min(np.linalg.eigvalsh(element)) < -POVM_TOLERANCE:
            raise InvalidPovmError("POVM element is not positive semidefinite")
        total += element
    if np.max(np.abs(total - np.eye(2))) > POVM_TOLERANCE:
        raise InvalidPovmError("POVM elements do not sum to the identity")


def expected_cost(povm: Povm) -> float:
    """Average mismatch cost, 1/4 * sum_ij C_ij Tr(Pi_j rho_i), over uniform BB84 inputs."""
    validate_povm(povm)
    elements = np.asarray(povm.elements, dtype=complex)[np.newaxis]
    labels = np.asarray([int(label) for label in povm.labels])[np.newaxis]
    return float(expected_costs(elements, labels)[0])


def expected_costs(elements: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Vectorised expected cost for n POVMs given as (n, m, 2, 2) elements and (n, m) labels."""
    # probs[n, m, i] = <i| Pi_m |i>
    probs = np.einsum("id,nmde,ie->nmi", BB84_VECTORS.conj(), elements, BB84_VECTORS).real
    costs = _PRINTED_COST[:, labels]  # (i, n, m)
    return 0.25 * np.einsum("inm,nmi->n", costs, probs)


def min_cost_povm(q: float) -> Povm:
    """Minimum-cost measurement family {q|0><0|, (1-q)|+><+|, q|1><1|, (1-q)|-><-|}."""
    if not 0 <= q <= 1:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    elements = []
    for s in Bb84State:
        weight = q if s.basis is Basis.Z else 1 - q
        v = BB84_VECTORS[int(s)]
        elements.append(weight * np.outer(v, v.conj()))
    return Povm(tuple(elements), tuple(Bb84State))


def conjugate_declarations(povm: Povm) -> Povm:
    return Povm(povm.elements, tuple(label.conjugate for label in povm.labels))


def random_povms(n: int, rng: np.random.Generator, outcomes: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    """Sample n random POVMs with uniformly drawn declaration labels.

    Random positive operators A_m = G G^dagger are normalized as
    S^-1/2 A_m S^-1/2 with S = sum_m A_m.
    """
    g = rng.normal(size=(n, outcomes, 2, 2)) + 1j * rng.normal(size=(n, outcomes, 2, 2))
    a = g @ np.conj(np.swapaxes(g, -1, -2))
    w, u = np.linalg.eigh(a.sum(axis=1))
    inv_sqrt = u @ (w[..., np.newaxis] ** -0.5 * np.conj(np.swapaxes(u, -1, -2)))
    elements = inv_sqrt[:, np.newaxis] @ a @ inv_sqrt[:, np.newaxis]
    labels = rng.integers(0, 4, size=(n, outcomes))
    return elements, labels


def optimal_forging_guess(copy_state: Bb84State, rng: np.random.Generator) -> Bb84State:
    """Measure the copy in a uniformly random basis and declare the outcome."""
    basis = Basis(int(rng.integers(2)))
    return measure_projective(bb84_qubit(copy_state), basis, rng)


def optimal_forging_guesses(copies: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return use_measure_batch(BB84_VECTORS[copies], rng).outcomes


def pauli_correct(a: int, b: int, s: Bb84State) -> Bb84State:
    """Label of X^a Z^b |s>, up to global phase."""
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError(f"Pauli exponents must be bits, got a={a}, b={b}")
    # Z flips the X-basis pair, X flips the Z-basis pair
    if b and s.basis is Basis.X:
        s = s.conjugate
    if a and s.basis is Basis.Z:
        s = s.conjugate
    return s


def pauli_matrix(a: int, b: int) -> np.ndarray:
    return np.linalg.matrix_power(PAULI_X, a) @ np.linalg.matrix_power(PAULI_Z, b)


_KET = {
    "0": BB84_VECTORS[int(Bb84State.Z0)],
    "1": BB84_VECTORS[int(Bb84State.Z1)],
    "+": BB84_VECTORS[int(Bb84State.X_PLUS)],
    "-": BB84_VECTORS[int(Bb84State.X_MINUS)],
}
B92_PAIRS = ("00", "0+", "+0", "++")


def two_qubit(label: str) -> TwoQubitState:
    vector = np.kron(_KET[label[0]], _KET[label[1]])
    return TwoQubitState(tuple(complex(x) for x in vector))  # type: ignore[arg-type]


def _superpose(first: str, second: str) -> np.ndarray:
    return _H * (two_qubit(first).vector + two_qubit(second).vector)


def b92_measurement() -> dict:
    """Bob's joint basis, keyed by the pair he declares on each outcome."""
    return {
        "++": _superpose("01", "10"),
        "+0": _superpose("0-", "1+"),
        "0+": _superpose("+1", "-0"),
        "00": _superpose("+-", "-+"),
    }


def b92_counterexample() -> B92Result:
    """Exact joint statistics for the two-copy B92 collective measurement."""
    basis = b92_measurement()
    table = {}
    p_both_wrong = 0.0
    p_first_wrong = 0.0
    p_first_wrong_second_right = 0.0
    for sent in B92_PAIRS:
        state = two_qubit(sent).vector
        for declared, phi in basis.items():
            p = float(abs(np.vdot(phi, state)) ** 2)
            table[(sent, declared)] = p
            weighted = p / len(B92_PAIRS)
            first_wrong = declared[0] != sent[0]
            second_wrong = declared[1] != sent[1]
            if first_wrong and second_wrong:
                p_both_wrong += weighted
            if first_wrong:
                p_first_wrong += weighted
                if not second_wrong:
                    p_first_wrong_second_right += weighted
    return B92Result(table, p_both_wrong, p_first_wrong_second_right / p_first_wrong)
