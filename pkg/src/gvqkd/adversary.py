"""Eavesdropping strategies against the delayed-wave-packet link.

The two active strategies span the detection dichotomy the protocol is
built on:

* which-path: measure the one packet present in the channel. Timing is
  untouched, but the collapse destroys the superposition, so the guess is
  a coin flip and the receiver's error rate jumps to 1/2.
* store-forward: hold the leading packet until its partner appears,
  interfere them, learn the bit exactly, re-prepare and forward. Every
  bit is read and none is flipped, but each detection is late by at least
  the storage delay, which the timing test flags.

Eve's own optics and resent packets are ideal; only the honest hardware
carries imperfections.
"""

import math
from dataclasses import dataclass

import numpy as np

from gvqkd.optics import PathState, beam_splitter, collapse_which_path, make_state

KIND_NONE = "none"
KIND_WHICH_PATH = "which-path"
KIND_STORE_FORWARD = "store-forward"

_KINDS = (KIND_NONE, KIND_WHICH_PATH, KIND_STORE_FORWARD)


@dataclass(frozen=True)
class AttackStrategy:
    """Eavesdropping strategy selector; extra_delay_ps applies to store-forward only."""

    kind: str = KIND_NONE
    extra_delay_ps: float = 500.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}; expected one of {_KINDS}")
        if self.extra_delay_ps <= 0:
            raise ValueError("extra_delay_ps must be positive")


NO_ATTACK = AttackStrategy(KIND_NONE)


@dataclass(frozen=True)
class EveRecord:
    """What Eve took from one photon: her bit guess, raw outcome, and added delay."""

    guessed_bit: int | None = None
    measurement_outcome: str | None = None
    timing_perturbation_ps: float = 0.0


def apply_attack(
    strategy: AttackStrategy,
    state: PathState,
    launch_a_ps: float,
    launch_b_ps: float,
    travel_time_ps: float,
    rng: np.random.Generator,
) -> tuple[PathState, float, float, EveRecord]:
    """Pass one photon through the channel under a strategy.

    Returns (state at the receiver, arrival_a, arrival_b, EveRecord).
    """
    if strategy.kind == KIND_NONE:
        return (
            state,
            launch_a_ps + travel_time_ps,
            launch_b_ps + travel_time_ps,
            EveRecord(),
        )

    if strategy.kind == KIND_WHICH_PATH:
        mode, collapsed = collapse_which_path(state, rng)
        # the localized packet is resent on schedule; nothing to learn,
        # the guess is a coin flip
        guess = int(rng.integers(0, 2))
        return (
            collapsed,
            launch_a_ps + travel_time_ps,
            launch_b_ps + travel_time_ps,
            EveRecord(guessed_bit=guess, measurement_outcome=mode),
        )

    # store-forward: Eve reads the packet separation off the launch times
    # she observes, interferes the pair on her own ideal recombiner, and
    # forwards a fresh copy. Holding packet a until b exists costs the
    # separation itself; extra_delay is her processing overhead.
    out = beam_splitter(state)
    p0 = abs(out.amp_a) ** 2
    learned = 0 if rng.random() < p0 else 1
    delay = (launch_b_ps - launch_a_ps) + strategy.extra_delay_ps
    return (
        make_state(learned),
        launch_a_ps + travel_time_ps + delay,
        launch_b_ps + travel_time_ps + delay,
        EveRecord(guessed_bit=learned, timing_perturbation_ps=delay),
    )


def eve_information(eve_records: list[EveRecord], alice_bits: list[int]) -> float:
    """Empirical mutual information (bits) between Eve's guesses and the sent bits.

    Records without a guess contribute nothing; if no record carries a
    guess the information is 0. Raises on empty input (undefined).
    """
    if len(eve_records) == 0:
        raise ValueError("eve_information undefined on empty record list")
    if len(eve_records) != len(alice_bits):
        raise ValueError("eve_records and alice_bits must be aligned")
    joint = np.zeros((2, 2), dtype=float)
    for record, bit in zip(eve_records, alice_bits):
        if record.guessed_bit is not None:
            joint[record.guessed_bit, bit] += 1.0
    total = joint.sum()
    if total == 0:
        return 0.0
    joint /= total
    p_guess = joint.sum(axis=1)
    p_bit = joint.sum(axis=0)
    info = 0.0
    for g in (0, 1):
        for b in (0, 1):
            if joint[g, b] > 0:
                info += joint[g, b] * math.log2(joint[g, b] / (p_guess[g] * p_bit[b]))
    return info
