"""
Canonical dishonest strategies.

Every strategy emits the same message types honest parties do, so the
verifiers in ``protocols`` cannot tell them apart by format.
"""

from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .models import Declaration, Origin, Party, Protocol, RecipientLedger, RecordTable, SignaturePair
from .params import AdversaryConfig, ProtocolParams, ceil_count
from .protocols import (
    build_ledger,
    coin_flips,
    held_table,
    measure_records,
    message_coin,
    origin_codes,
    p1_generate,
    p2_distribute,
    p2_generate,
)
from .quantum import BB84_VECTORS, conjugate_codes, optimal_forging_guesses, use_measure_batch


class ForgedDelivery(NamedTuple):
    """What a forging Bob hands Charlie for one message bit.

    ``forwarded`` marks the positions Bob forwards. ``states`` holds, at
    those positions, Bb84State codes of the qubits sent (P1) or the excluded
    states of the records sent (P1').
    """

    forwarded: np.ndarray
    states: np.ndarray
    declaration: Declaration


class BobView(NamedTuple):
    message_bit: int
    key_b: np.ndarray
    known_c: np.ndarray  # bool mask of PrivKeyC positions Charlie forwarded
    bits_c: np.ndarray  # PrivKeyC values, meaningful where known_c is set


class ForgeryRun(NamedTuple):
    charlie: RecipientLedger
    declaration: Declaration
    aborted: bool


def _tamper_positions(length: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(length)[:count]


def repudiating_alice_p1(
    params: ProtocolParams,
    config: AdversaryConfig,
    rng: np.random.Generator,
) -> Tuple[SignaturePair, Declaration]:
    """Send honest identical copies, then declare conjugates at 2pL positions.

    A conjugate declaration is caught by a measuring recipient with
    probability 1/2, and a recipient holds each position once on average
    (own copy kept or peer's copy received), so ceil(2pL) tampered
    positions give an expected per-recipient mismatch fraction of p.
    """
    pair = p1_generate(params, rng)
    assert pair.private_keys is not None
    message_bit = message_coin(rng)
    fraction = config.aimed_fraction(params)
    tampered = _tamper_positions(params.length, ceil_count(2 * fraction * params.length), rng)
    declared = pair.private_keys[message_bit].copy()
    declared[tampered] = conjugate_codes(declared[tampered])
    return pair, Declaration(message_bit, declared_key=declared)


def repudiating_alice_p2(
    params: ProtocolParams,
    rng: np.random.Generator,
) -> Tuple[SignaturePair, Declaration]:
    """Agree with PrivKeyB everywhere, flip exactly R = ceil(s_v L) bits of PrivKeyC."""
    pair = p2_generate(params, rng)
    assert pair.keys_b is not None and pair.keys_c is not None
    message_bit = message_coin(rng)
    flipped = _tamper_positions(params.length, ceil_count(params.s_v * params.length), rng)
    declared_c = pair.keys_c[message_bit].copy()
    declared_c[flipped] ^= 1
    decl = Declaration(
        message_bit,
        declared_key_b=pair.keys_b[message_bit].copy(),
        declared_key_c=declared_c,
    )
    return pair, decl


def forging_bob_p1(
    params: ProtocolParams,
    bob_copy: np.ndarray,
    charlie_kept: np.ndarray,
    rng: np.random.Generator,
    message_bit: int = 0,
    forward: Optional[np.ndarray] = None,
    knows_kept_set: bool = True,
) -> ForgedDelivery:
    """Individual-optimal forgery against P1.

    With the kept set known, Bob measures his copies only where Charlie kept
    Alice's element and declares the outcome. Everywhere else the declaration
    is free, and whatever he forwards is a fresh qubit in the declared state.
    Without it, Bob forwards his genuine copies and guesses the states he gave away.
    """
    length = params.length
    if forward is None:
        forward = coin_flips(length, rng)
    declared = rng.integers(0, 4, size=length).astype(np.int8)
    if knows_kept_set:
        kept = np.flatnonzero(charlie_kept)
        declared[kept] = optimal_forging_guesses(bob_copy[kept], rng)
        states = declared.copy()
    else:
        own = np.flatnonzero(~forward)
        declared[own] = optimal_forging_guesses(bob_copy[own], rng)
        states = bob_copy.copy()
    return ForgedDelivery(forward, states, Declaration(message_bit, declared_key=declared))


def forging_bob_p1prime(
    params: ProtocolParams,
    bob_copy: np.ndarray,
    rng: np.random.Generator,
    message_bit: int = 0,
    forward: Optional[np.ndarray] = None,
) -> ForgedDelivery:
    """Individual-optimal forgery against P1'.

    Bob measures every copy on arrival and declares the outcomes. The record
    he forwards excludes the conjugate of his declaration, which is also what
    an honest USE record of that outcome says.
    """
    if forward is None:
        forward = coin_flips(params.length, rng)
    declared = optimal_forging_guesses(bob_copy, rng)
    return ForgedDelivery(forward, conjugate_codes(declared), Declaration(message_bit, declared_key=declared))


def forging_bob_p2(params: ProtocolParams, bob_view: BobView, rng: np.random.Generator) -> Declaration:
    """Declare PrivKeyB exactly, copy the PrivKeyC bits Charlie forwarded, guess the rest."""
    guesses = rng.integers(0, 2, size=params.length).astype(np.int8)
    declared_c = np.where(bob_view.known_c, bob_view.bits_c, guesses).astype(np.int8)
    return Declaration(
        bob_view.message_bit,
        declared_key_b=bob_view.key_b.copy(),
        declared_key_c=declared_c,
    )


def bob_view_p2(pair: SignaturePair, bob: RecipientLedger, message_bit: int) -> BobView:
    assert pair.keys_b is not None
    length = pair.keys_b[message_bit].size
    received = bob.tables[message_bit].select(Origin.FORWARDED_BY_PEER)
    known = np.zeros(length, dtype=bool)
    bits = np.zeros(length, dtype=np.int8)
    known[received.positions] = True
    bits[received.positions] = received.values
    return BobView(message_bit, pair.keys_b[message_bit], known, bits)


def forge_run(
    protocol: Protocol,
    params: ProtocolParams,
    config: AdversaryConfig,
    rng: np.random.Generator,
) -> ForgeryRun:
    """Honest Alice and Charlie against a forging Bob; returns Charlie's view."""
    if protocol is Protocol.P2:
        pair = p2_generate(params, rng)
        dist = p2_distribute(pair, params, rng)
        message_bit = message_coin(rng)
        decl = forging_bob_p2(params, bob_view_p2(pair, dist.bob, message_bit), rng)
        return ForgeryRun(dist.charlie, decl, dist.aborted)

    pair = p1_generate(params, rng)
    assert pair.private_keys is not None
    message_bit = message_coin(rng)
    tables: List[RecordTable] = []
    charlie_forward: List[np.ndarray] = []
    bob_forward: List[np.ndarray] = []
    decl = None
    for k in (0, 1):
        key = pair.private_keys[k]
        c_flips = coin_flips(params.length, rng)
        b_flips = coin_flips(params.length, rng)
        if protocol is Protocol.P1:
            delivery = forging_bob_p1(
                params, key, ~c_flips, rng, k, b_flips, config.knows_kept_set
            )
            kept = np.flatnonzero(~c_flips)
            received = np.flatnonzero(b_flips)
            vectors = np.concatenate([BB84_VECTORS[key[kept]], BB84_VECTORS[delivery.states[received]]])
            positions = np.concatenate([kept, received])
            origins = origin_codes(kept.size, received.size)
            tables.append(measure_records(vectors, positions, origins, rng))
        else:
            own = use_measure_batch(BB84_VECTORS[key], rng).excluded
            delivery = forging_bob_p1prime(params, key, rng, k, b_flips)
            tables.append(held_table(own, c_flips, delivery.states, b_flips))
        charlie_forward.append(c_flips)
        bob_forward.append(b_flips)
        if k == message_bit:
            decl = delivery.declaration
    assert decl is not None
    charlie = build_ledger(Party.CHARLIE, tables, charlie_forward, bob_forward)
    # Bob still runs the abort rule on what Charlie forwarded him
    counts = [int(f.sum()) for f in charlie_forward] + list(charlie.received_counts)
    aborted = any(not params.in_band(c) for c in counts)
    return ForgeryRun(charlie, decl, aborted)
