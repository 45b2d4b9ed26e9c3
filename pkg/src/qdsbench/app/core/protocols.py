"""
Distribution and messaging stages of protocols P1, P1' and P2.

Channels are ideal: whatever a party sends arrives unchanged. Dishonest
behaviour is injected by the adversaries module through the optional
arguments and the ledger building blocks exposed here.
"""

from itertools import accumulate
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .models import (
    Decision,
    Declaration,
    Distribution,
    Origin,
    Party,
    Protocol,
    QubitState,
    RecipientLedger,
    RecordTable,
    SignaturePair,
    Verdict,
)
from .params import ProtocolParams, ceil_count
from .quantum import BB84_VECTORS, use_measure_batch

StateOverride = Mapping[Party, Sequence[object]]

_PARTY_ROWS = (Party.BOB, Party.CHARLIE)


def p1_generate(params: ProtocolParams, rng: np.random.Generator) -> SignaturePair:
    """Uniform BB84 private keys for k = 0 and k = 1; both recipients get the same copy."""
    keys = tuple(rng.integers(0, 4, size=params.length).astype(np.int8) for _ in range(2))
    return SignaturePair(private_keys=keys)  # type: ignore[arg-type]


def p2_generate(params: ProtocolParams, rng: np.random.Generator) -> SignaturePair:
    """Independent random bit keys for Bob and for Charlie, per message bit."""
    keys = rng.integers(0, 2, size=(2, 2, params.length), dtype=np.int8)
    return SignaturePair(keys_b=(keys[0, 0], keys[0, 1]), keys_c=(keys[1, 0], keys[1, 1]))


def generate(protocol: Protocol, params: ProtocolParams, rng: np.random.Generator) -> SignaturePair:
    if protocol is Protocol.P2:
        return p2_generate(params, rng)
    return p1_generate(params, rng)


def honest_declaration(pair: SignaturePair, message_bit: int) -> Declaration:
    if pair.classical:
        assert pair.keys_b is not None and pair.keys_c is not None
        return Declaration(
            message_bit,
            declared_key_b=pair.keys_b[message_bit].copy(),
            declared_key_c=pair.keys_c[message_bit].copy(),
        )
    assert pair.private_keys is not None
    return Declaration(message_bit, declared_key=pair.private_keys[message_bit].copy())


def message_coin(rng: np.random.Generator) -> int:
    """Uniform message bit from one scalar draw."""
    return int(rng.random() < 0.5)


def coin_flips(length: int, rng: np.random.Generator) -> np.ndarray:
    """Fair keep/forward coin per position; True means forward to the peer."""
    return rng.random(length) < 0.5


def as_vectors(states: object) -> np.ndarray:
    """Accept an (n, 2) amplitude array or a sequence of QubitState."""
    if isinstance(states, np.ndarray):
        return states.astype(complex).reshape(-1, 2)
    qubits: Sequence[QubitState] = states  # type: ignore[assignment]
    return np.array([q.amplitudes for q in qubits], dtype=complex).reshape(-1, 2)


def measure_records(
    vectors: np.ndarray,
    positions: np.ndarray,
    origins: np.ndarray,
    rng: np.random.Generator,
) -> RecordTable:
    """USE-measure the qubits a recipient holds and store what each one excluded."""
    batch = use_measure_batch(vectors, rng)
    return RecordTable(positions.astype(np.int64), batch.excluded, origins.astype(np.int8))


def held_table(
    own_values: np.ndarray,
    own_forward: np.ndarray,
    peer_values: np.ndarray,
    peer_forward: np.ndarray,
) -> RecordTable:
    """Records kept from the owner's own copy plus those the peer forwarded."""
    kept = np.flatnonzero(~own_forward)
    received = np.flatnonzero(peer_forward)
    return RecordTable(
        np.concatenate([kept, received]).astype(np.int64),
        np.concatenate([own_values[kept], peer_values[received]]).astype(np.int8),
        origin_codes(kept.size, received.size),
    )


def origin_codes(kept: int, received: int) -> np.ndarray:
    return np.concatenate(
        [
            np.full(kept, int(Origin.DIRECT_FROM_ALICE), dtype=np.int8),
            np.full(received, int(Origin.FORWARDED_BY_PEER), dtype=np.int8),
        ]
    )


def build_ledger(
    owner: Party,
    tables: Sequence[RecordTable],
    forwarded: Sequence[np.ndarray],
    peer_forwarded: Sequence[np.ndarray],
    classical: bool = False,
) -> RecipientLedger:
    return RecipientLedger(
        owner=owner,
        tables=(tables[0], tables[1]),
        forwarded=(forwarded[0], forwarded[1]),
        received_counts=(int(peer_forwarded[0].sum()), int(peer_forwarded[1].sum())),
        classical=classical,
    )


def is_aborted(params: ProtocolParams, *ledgers: RecipientLedger) -> bool:
    """Abort if any recipient received a count outside the band for either message."""
    low, high = params.abort_band
    return any(not low <= count <= high for ledger in ledgers for count in ledger.received_counts)


def _sent_vectors(
    pair: SignaturePair,
    message_bit: int,
    party: Party,
    override: Optional[StateOverride],
) -> np.ndarray:
    if override is not None and party in override:
        return as_vectors(override[party][message_bit])
    assert pair.private_keys is not None
    return BB84_VECTORS[pair.private_keys[message_bit]]


def _check_override(params: ProtocolParams, override: Optional[StateOverride]) -> None:
    if override is None:
        return
    for party, per_bit in override.items():
        if len(per_bit) != 2:
            raise ValueError(f"override for {party.value} needs one state list per message bit")
        for states in per_bit:
            if as_vectors(states).shape[0] != params.length:
                raise ValueError(f"override for {party.value} must hold {params.length} states")


def _finish(
    params: ProtocolParams,
    tables: Dict[Party, List[RecordTable]],
    forward: Dict[Party, List[np.ndarray]],
    classical: bool = False,
) -> Distribution:
    ledgers = {
        party: build_ledger(party, tables[party], forward[party], forward[party.peer], classical)
        for party in Party
    }
    bob, charlie = ledgers[Party.BOB], ledgers[Party.CHARLIE]
    return Distribution(bob, charlie, is_aborted(params, bob, charlie))


def p1_distribute(
    pair: SignaturePair,
    params: ProtocolParams,
    rng: np.random.Generator,
    alice_states_override: Optional[StateOverride] = None,
) -> Distribution:
    """P1: each recipient decides keep/forward per element, then USE-measures what he holds.

    ``alice_states_override`` replaces the honest BB84 copies per recipient and
    message bit with arbitrary single-qubit states.
    """
    _check_override(params, alice_states_override)
    tables: Dict[Party, List[RecordTable]] = {party: [] for party in Party}
    forward: Dict[Party, List[np.ndarray]] = {party: [] for party in Party}
    for k in (0, 1):
        sent = {party: _sent_vectors(pair, k, party, alice_states_override) for party in Party}
        flips = {party: coin_flips(params.length, rng) for party in Party}
        for party in Party:
            peer = party.peer
            kept = np.flatnonzero(~flips[party])
            received = np.flatnonzero(flips[peer])
            vectors = np.concatenate([sent[party][kept], sent[peer][received]])
            positions = np.concatenate([kept, received])
            tables[party].append(
                measure_records(vectors, positions, origin_codes(kept.size, received.size), rng)
            )
            forward[party].append(flips[party])
    return _finish(params, tables, forward)


def p1prime_distribute(
    pair: SignaturePair,
    params: ProtocolParams,
    rng: np.random.Generator,
    alice_states_override: Optional[StateOverride] = None,
) -> Distribution:
    """P1': each recipient USE-measures his whole copy first, then keeps or forwards outcomes."""
    _check_override(params, alice_states_override)
    tables: Dict[Party, List[RecordTable]] = {party: [] for party in Party}
    forward: Dict[Party, List[np.ndarray]] = {party: [] for party in Party}
    for k in (0, 1):
        excluded = {
            party: use_measure_batch(_sent_vectors(pair, k, party, alice_states_override), rng).excluded
            for party in Party
        }
        flips = {party: coin_flips(params.length, rng) for party in Party}
        for party in Party:
            peer = party.peer
            tables[party].append(held_table(excluded[party], flips[party], excluded[peer], flips[peer]))
            forward[party].append(flips[party])
    return _finish(params, tables, forward)


def p2_distribute(pair: SignaturePair, params: ProtocolParams, rng: np.random.Generator) -> Distribution:
    """P2: Bob holds kept PrivKeyB bits plus PrivKeyC bits Charlie forwarded, and vice versa.

    All four (recipient, message bit) tables are cut from one pass over
    arrays indexed [recipient, message bit, origin, position], Bob first.
    """
    assert pair.keys_b is not None and pair.keys_c is not None
    keys = np.array([pair.keys_b, pair.keys_c], dtype=np.int8)
    forward = rng.random((2, 2, params.length)) < 0.5
    # origin 0: own element kept; origin 1: element the peer forwarded
    held = np.stack([~forward, forward[::-1]], axis=2)
    values = np.stack([keys, keys[::-1]], axis=2)[held]
    _, _, origin, position = np.nonzero(held)
    origins = origin.astype(np.int8)
    bounds = [0, *accumulate(np.count_nonzero(held, axis=(2, 3)).ravel().tolist())]
    sent = forward.sum(axis=2).tolist()

    ledgers = []
    for row, party in enumerate(_PARTY_ROWS):
        cuts = [slice(bounds[2 * row + k], bounds[2 * row + k + 1]) for k in (0, 1)]
        tables = tuple(RecordTable(position[c], values[c], origins[c]) for c in cuts)
        ledgers.append(
            RecipientLedger(
                owner=party,
                tables=tables,  # type: ignore[arg-type]
                forwarded=(forward[row, 0], forward[row, 1]),
                received_counts=(sent[1 - row][0], sent[1 - row][1]),
                classical=True,
            )
        )
    bob, charlie = ledgers
    return Distribution(bob, charlie, is_aborted(params, bob, charlie))


def distribute(
    protocol: Protocol,
    pair: SignaturePair,
    params: ProtocolParams,
    rng: np.random.Generator,
    alice_states_override: Optional[StateOverride] = None,
) -> Distribution:
    if protocol is Protocol.P1:
        return p1_distribute(pair, params, rng, alice_states_override)
    if protocol is Protocol.P1_PRIME:
        return p1prime_distribute(pair, params, rng, alice_states_override)
    return p2_distribute(pair, params, rng)


def _check_kind(decl: Declaration, ledger: RecipientLedger) -> None:
    if decl.classical != ledger.classical:
        raise ValueError("declaration and ledger belong to different protocols")


def _classical_mismatches(decl: Declaration, table: RecordTable, owner: Party) -> np.ndarray:
    """Per-record mismatch flags for P2; own records check the owner's key, received ones the peer's."""
    assert decl.declared_key_b is not None and decl.declared_key_c is not None
    direct = table.origins == int(Origin.DIRECT_FROM_ALICE)
    from_key_b = direct if owner is Party.BOB else ~direct
    declared = np.where(
        from_key_b,
        decl.declared_key_b[table.positions],
        decl.declared_key_c[table.positions],
    )
    return declared != table.values


def count_mismatches(
    decl: Declaration,
    ledger: RecipientLedger,
    origin: Optional[Origin] = None,
) -> Tuple[int, int]:
    """Mismatches between a declaration and the records held for its message bit.

    P1/P1': a record mismatches when the declared state is the one it excluded,
    and a position held twice is checked twice. P2: a record mismatches when
    the declared bit differs; Bob's own records check ``declared_key_b`` and his
    forwarded ones ``declared_key_c``, mirrored for Charlie.
    """
    _check_kind(decl, ledger)
    table = ledger.tables[decl.message_bit].select(origin)
    if table.size == 0:
        return 0, 0
    if ledger.classical:
        mismatches = int(np.count_nonzero(_classical_mismatches(decl, table, ledger.owner)))
    else:
        assert decl.declared_key is not None
        mismatches = int(np.count_nonzero(decl.declared_key[table.positions] == table.values))
    return mismatches, table.size


def within_threshold(mismatches: int, fraction: float, length: int) -> bool:
    """``mismatches < fraction * L``, read as ``mismatches == 0`` when the fraction is zero.

    The product is rounded up with the same slack as the abort band, so
    0.1 * 20 counts as exactly 2.
    """
    if fraction == 0:
        return mismatches == 0
    return mismatches < ceil_count(fraction * length)


def _verdict(accepted: bool, mismatches: int, checked: int) -> Verdict:
    return Verdict(Decision.ACCEPT if accepted else Decision.REJECT, mismatches, checked)


def p1_authenticate(decl: Declaration, ledger: RecipientLedger, params: ProtocolParams) -> Verdict:
    mismatches, checked = count_mismatches(decl, ledger)
    return _verdict(within_threshold(mismatches, params.s_a, params.length), mismatches, checked)


def p1_verify(decl: Declaration, ledger: RecipientLedger, params: ProtocolParams) -> Verdict:
    mismatches, checked = count_mismatches(decl, ledger)
    return _verdict(within_threshold(mismatches, params.s_v, params.length), mismatches, checked)


def p2_bob_accept(decl: Declaration, bob_ledger: RecipientLedger, params: ProtocolParams) -> Verdict:
    """Zero tolerance on Bob's kept PrivKeyB bits and the PrivKeyC bits Charlie sent him."""
    mismatches, checked = count_mismatches(decl, bob_ledger)
    return _verdict(mismatches == 0, mismatches, checked)


def p2_charlie_verify(decl: Declaration, charlie_ledger: RecipientLedger, params: ProtocolParams) -> Verdict:
    """(i) no mismatch on PrivKeyB bits from Bob, (ii) fewer than s_v*L on kept PrivKeyC bits."""
    _check_kind(decl, charlie_ledger)
    table = charlie_ledger.tables[decl.message_bit]
    flags = _classical_mismatches(decl, table, charlie_ledger.owner)
    from_bob = int(np.count_nonzero(flags & (table.origins == int(Origin.FORWARDED_BY_PEER))))
    kept = int(np.count_nonzero(flags)) - from_bob
    accepted = from_bob == 0 and within_threshold(kept, params.s_v, params.length)
    return _verdict(accepted, from_bob + kept, table.size)


def recipient_verdicts(
    protocol: Protocol,
    decl: Declaration,
    dist: Distribution,
    params: ProtocolParams,
) -> Tuple[Verdict, Verdict]:
    """Bob authenticates Alice's message; Charlie verifies it after Bob forwards it."""
    if protocol is Protocol.P2:
        return p2_bob_accept(decl, dist.bob, params), p2_charlie_verify(decl, dist.charlie, params)
    return p1_authenticate(decl, dist.bob, params), p1_verify(decl, dist.charlie, params)
