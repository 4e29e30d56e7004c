"""Session engine for the delayed-wave-packet key distribution link.

Timeline of one photon, all times in ps:

    t_emit                photon pair born; herald stamps t_s ~ t_emit
    t_emit                leading packet (mode a) enters the channel
    t_emit + tau          delayed packet (mode b) enters the channel
    launch + T            each packet arrives after travel time T
    arrival of the later  receiver recombines; one detector clicks at t_r

With tau > T the two packets are never in the channel simultaneously, so
an eavesdropper can only ever touch one packet of an orthogonal-state pair
on time; holding both costs at least tau of delay. Security is therefore
checked publicly on two axes: every t_r must sit within an accept window w
of t_s + tau + T (timing test), and a disclosed random subset of the
matched bits must show a low error rate (QBER test).
"""

import csv
import math
from dataclasses import dataclass, field
from bisect import bisect_left

import numpy as np

from gvqkd import adversary
from gvqkd.devices import (
    DetectorParams,
    SourceParams,
    dark_clicks,
    detector_click,
    generate_emissions,
    herald,
)
from gvqkd.optics import PathState, detection_probabilities, make_state
from gvqkd.streams import SessionStreams

# Packets recombine only if their overlap mismatch is below this; beyond it
# the interference term is dropped entirely (sharp threshold, no partial
# coherence model).
COHERENCE_WINDOW_PS = 10.0

WAVELENGTH_NM = 812.0


def combined_jitter_ps(source: SourceParams, detector: DetectorParams) -> float:
    """Std dev of t_r - (t_s + tau + T) on a clean link: herald and click jitters in quadrature."""
    return math.hypot(source.herald_jitter_sigma_ps, detector.jitter_sigma_ps)


def false_anomaly_rate(accept_window_ps: float, sigma_ps: float) -> float:
    """Probability a clean detection falls outside the accept window (two-sided Gaussian tail)."""
    if accept_window_ps <= 0:
        raise ValueError("accept_window_ps must be positive")
    if sigma_ps == 0:
        return 0.0
    return math.erfc(accept_window_ps / (sigma_ps * math.sqrt(2.0)))


@dataclass(frozen=True)
class SessionConfig:
    """Physical and protocol parameters of one transmission session.

    accept_window_ps, visibility_d0 and visibility_d1 may be left None to
    take their derived defaults: 3x the combined timing jitter, and the
    session visibility, respectively.
    """

    tau_ps: float = 2000.0
    travel_time_ps: float = 1000.0
    accept_window_ps: float | None = None
    visibility: float = 1.0
    visibility_d0: float | None = None
    visibility_d1: float | None = None
    source: SourceParams = field(default_factory=SourceParams)
    signal_detector: DetectorParams = field(default_factory=DetectorParams)
    session_duration_s: float = 5.0
    disclosure_fraction: float = 0.5
    seed: int = 0
    coherence_window_ps: float = COHERENCE_WINDOW_PS
    wavelength_nm: float = WAVELENGTH_NM

    def __post_init__(self):
        if self.tau_ps <= 0:
            raise ValueError("tau_ps must be positive")
        if self.travel_time_ps <= 0:
            raise ValueError("travel_time_ps must be positive")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must be in [0, 1]")
        for name in ("visibility_d0", "visibility_d1"):
            value = getattr(self, name)
            if value is None:
                object.__setattr__(self, name, self.visibility)
            elif not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.session_duration_s <= 0:
            raise ValueError("session_duration_s must be positive")
        if not 0.0 < self.disclosure_fraction < 1.0:
            raise ValueError("disclosure_fraction must be in (0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.coherence_window_ps <= 0:
            raise ValueError("coherence_window_ps must be positive")
        if self.wavelength_nm <= 0:
            raise ValueError("wavelength_nm must be positive")
        sigma = combined_jitter_ps(self.source, self.signal_detector)
        if self.accept_window_ps is None:
            # degenerate jitter-free configs still need a usable window
            object.__setattr__(self, "accept_window_ps", 3.0 * sigma if sigma > 0 else 1.0)
        elif self.accept_window_ps <= 0:
            raise ValueError("accept_window_ps must be positive")
        # the storage delay must dominate timing noise or the timing test
        # cannot separate held packets from jitter
        if self.tau_ps < 3.0 * sigma:
            raise ValueError(
                f"tau_ps = {self.tau_ps} violates tau >= 3*combined jitter = {3.0 * sigma:.1f} ps"
            )

    def expected_offset_ps(self) -> float:
        """Nominal t_r - t_s of an untouched photon."""
        return self.tau_ps + self.travel_time_ps


@dataclass(frozen=True)
class SendRecord:
    """Sender-side log entry: photon index, encoded bit, heralded timestamp."""

    index: int
    bit: int
    t_s_ps: float


@dataclass(frozen=True)
class ReceiveRecord:
    """Receiver-side log entry: click time and which detector fired (0 or 1)."""

    t_r_ps: float
    detector: int


@dataclass
class Transcript:
    """Everything one session produced, before any public comparison."""

    sends: list[SendRecord]
    receives: list[ReceiveRecord]
    eve_log: list["adversary.EveRecord"]


@dataclass
class SiftResult:
    """Outcome of the public comparison over one transcript.

    qber and qber_sigma are None when no pairs were disclosed (undefined
    estimate); disclosed_mask marks which matched pairs were sacrificed.
    """

    matched_pairs: list[tuple[SendRecord, ReceiveRecord]]
    anomalies: int
    key_bits_alice: str
    key_bits_bob: str
    qber: float | None
    qber_sigma: float | None
    disclosed_mask: list[bool]


def alice_prepare(
    bit: int,
    t_emit_ps: float,
    tau_ps: float,
    t_s_ps: float | None = None,
    index: int = 0,
) -> tuple[PathState, float, float, SendRecord]:
    """Encode a bit and launch its two packets tau apart.

    Returns (state, launch_a, launch_b, record). t_s_ps is the heralded
    timestamp entering the sender's log; it defaults to the true emission
    time for ideal heralding.
    """
    state = make_state(bit)
    launch_a = t_emit_ps
    launch_b = t_emit_ps + tau_ps
    record = SendRecord(index=index, bit=bit, t_s_ps=t_emit_ps if t_s_ps is None else t_s_ps)
    return state, launch_a, launch_b, record


def bob_receive(
    state: PathState,
    arrival_a_ps: float,
    arrival_b_ps: float,
    config: SessionConfig,
    rng: np.random.Generator,
) -> ReceiveRecord | None:
    """Recombine the two packets and report the click, if any.

    The receiver delays the leading packet by tau, so packet a is ready at
    arrival_a + tau. If that misses arrival_b by more than the coherence
    window the packets no longer interfere and the effective visibility
    drops to zero. The later packet sets the exit time; inside the
    coherence window the delayed-arm arrival is used so the clean-path
    timestamp carries no fp ordering artifact.
    """
    a_ready = arrival_a_ps + config.tau_ps
    mismatch = a_ready - arrival_b_ps
    v_eff = config.visibility if abs(mismatch) <= config.coherence_window_ps else 0.0
    detection_ps = arrival_b_ps if mismatch <= config.coherence_window_ps else a_ready
    p0, _ = detection_probabilities(state, v_eff)
    detector = 0 if rng.random() < p0 else 1
    t_click = detector_click(detection_ps, config.signal_detector, rng)
    if t_click is None:
        return None
    return ReceiveRecord(t_r_ps=t_click, detector=detector)


def run_session(
    config: SessionConfig,
    attack: "adversary.AttackStrategy | None" = None,
    streams: SessionStreams | None = None,
    run_index: int = 0,
    source_bit: int | None = None,
) -> Transcript:
    """Simulate one full session and return its transcript.

    source_bit = None draws a fresh uniform bit per photon (the keying
    mode); 0 or 1 sends that state only (the characterization mode).
    Deterministic for a given (config.seed, run_index, attack).
    """
    if attack is None:
        attack = adversary.NO_ATTACK
    if streams is None:
        streams = SessionStreams(config.seed, run_index)
    if source_bit not in (None, 0, 1):
        raise ValueError("source_bit must be None, 0 or 1")

    emissions = generate_emissions(config.source, config.session_duration_s, streams.source)
    t_true, t_stamped = herald(emissions, config.source, streams.herald)
    # the sender's log is ordered by what it observes: the heralded stamps
    order = np.argsort(t_stamped, kind="stable")
    t_true = t_true[order]
    t_stamped = t_stamped[order]
    n = int(t_true.size)
    if source_bit is None:
        bits = streams.bits.integers(0, 2, size=n)
    else:
        bits = np.full(n, source_bit, dtype=np.int64)

    sends: list[SendRecord] = []
    receives: list[ReceiveRecord] = []
    eve_log: list[adversary.EveRecord] = []
    travel = config.travel_time_ps
    for i in range(n):
        state, launch_a, launch_b, record = alice_prepare(
            int(bits[i]), float(t_true[i]), config.tau_ps, t_s_ps=float(t_stamped[i]), index=i
        )
        sends.append(record)
        state, arrival_a, arrival_b, eve_record = adversary.apply_attack(
            attack, state, launch_a, launch_b, travel, streams.attack
        )
        eve_log.append(eve_record)
        click = bob_receive(state, arrival_a, arrival_b, config, streams.detector)
        if click is not None:
            receives.append(click)

    if config.signal_detector.dark_rate_hz > 0:
        for detector in (0, 1):
            for t in dark_clicks(config.signal_detector, config.session_duration_s, streams.dark):
                receives.append(ReceiveRecord(t_r_ps=float(t), detector=detector))

    receives.sort(key=lambda r: r.t_r_ps)
    return Transcript(sends=sends, receives=receives, eve_log=eve_log)


def timing_test(
    sends: list[SendRecord],
    receives: list[ReceiveRecord],
    config: SessionConfig,
) -> tuple[list[tuple[SendRecord, ReceiveRecord]], list[ReceiveRecord]]:
    """Match receives to sends at the nominal delay; the rest are anomalies.

    Processing receives in time order, each is matched to the send
    minimizing |t_r - (t_s + tau + T)| provided the deviation is within the
    accept window and that send is still free; otherwise the receive is an
    anomaly. Matching is one-to-one by construction.
    """
    offset = config.expected_offset_ps()
    window = config.accept_window_ps
    send_times = [s.t_s_ps for s in sends]
    taken = [False] * len(sends)
    matched: list[tuple[SendRecord, ReceiveRecord]] = []
    anomalies: list[ReceiveRecord] = []
    for receive in sorted(receives, key=lambda r: r.t_r_ps):
        target = receive.t_r_ps - offset
        pos = bisect_left(send_times, target)
        best = None
        best_dev = math.inf
        for j in (pos - 1, pos):
            if 0 <= j < len(send_times):
                dev = abs(send_times[j] - target)
                if dev < best_dev:
                    best = j
                    best_dev = dev
        if best is None or best_dev > window or taken[best]:
            anomalies.append(receive)
        else:
            taken[best] = True
            matched.append((sends[best], receive))
    return matched, anomalies


def sift_and_qber(
    matched_pairs: list[tuple[SendRecord, ReceiveRecord]],
    disclosure_fraction: float,
    rng: np.random.Generator,
    anomalies: int = 0,
) -> SiftResult:
    """Sacrifice a random fraction of the matched pairs to estimate the QBER.

    Disclosed pairs are consumed: the key is built from the remainder only.
    The QBER is wrong/(right + wrong) over the disclosed subset with a
    binomial standard error; both are None if nothing was disclosed.
    """
    if not 0.0 < disclosure_fraction < 1.0:
        raise ValueError("disclosure_fraction must be in (0, 1)")
    n = len(matched_pairs)
    n_disclosed = int(round(n * disclosure_fraction))
    disclosed_mask = [False] * n
    if n_disclosed > 0:
        for idx in rng.choice(n, size=n_disclosed, replace=False):
            disclosed_mask[int(idx)] = True

    wrong = 0
    key_alice: list[str] = []
    key_bob: list[str] = []
    for (send, receive), disclosed in zip(matched_pairs, disclosed_mask):
        if disclosed:
            if receive.detector != send.bit:
                wrong += 1
        else:
            key_alice.append(str(send.bit))
            key_bob.append(str(receive.detector))

    if n_disclosed > 0:
        qber = wrong / n_disclosed
        qber_sigma = math.sqrt(qber * (1.0 - qber) / n_disclosed)
    else:
        qber = None
        qber_sigma = None
    return SiftResult(
        matched_pairs=matched_pairs,
        anomalies=anomalies,
        key_bits_alice="".join(key_alice),
        key_bits_bob="".join(key_bob),
        qber=qber,
        qber_sigma=qber_sigma,
        disclosed_mask=disclosed_mask,
    )


def sift_transcript(transcript: Transcript, config: SessionConfig, rng: np.random.Generator) -> SiftResult:
    """Run the timing test then the QBER sift on one transcript."""
    matched, anomalies = timing_test(transcript.sends, transcript.receives, config)
    return sift_and_qber(matched, config.disclosure_fraction, rng, anomalies=len(anomalies))


# --- transcript serialization ------------------------------------------------
#
# One row per send in index order, the matched receive joined in-row
# (t_r_ps/detector empty when unmatched, error empty unless disclosed),
# then one row per anomalous receive with empty index/bit/t_s_ps. This
# keeps the full evaluated transcript in a single flat file that
# round-trips exactly.

TRANSCRIPT_COLUMNS = ["index", "bit", "t_s_ps", "matched", "t_r_ps", "detector", "disclosed", "error"]


def write_transcript_csv(
    path,
    sends: list[SendRecord],
    sift: SiftResult,
    anomalous_receives: list[ReceiveRecord] = (),
) -> None:
    by_index: dict[int, tuple[ReceiveRecord, bool]] = {}
    for (send, receive), disclosed in zip(sift.matched_pairs, sift.disclosed_mask):
        by_index[send.index] = (receive, disclosed)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRANSCRIPT_COLUMNS)
        for send in sends:
            hit = by_index.get(send.index)
            if hit is None:
                writer.writerow([send.index, send.bit, repr(send.t_s_ps), 0, "", "", 0, ""])
            else:
                receive, disclosed = hit
                error = "" if not disclosed else int(receive.detector != send.bit)
                writer.writerow(
                    [
                        send.index,
                        send.bit,
                        repr(send.t_s_ps),
                        1,
                        repr(receive.t_r_ps),
                        f"D{receive.detector}",
                        int(disclosed),
                        error,
                    ]
                )
        for receive in anomalous_receives:
            writer.writerow(["", "", "", 0, repr(receive.t_r_ps), f"D{receive.detector}", 0, ""])


def read_transcript_csv(path):
    """Parse a transcript CSV back into (sends, matches, disclosed, errors, anomalies).

    matches maps send index -> ReceiveRecord; disclosed and errors are sets
    of send indices; anomalies is a list of ReceiveRecord.
    """
    sends: list[SendRecord] = []
    matches: dict[int, ReceiveRecord] = {}
    disclosed: set[int] = set()
    errors: set[int] = set()
    anomalies: list[ReceiveRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRANSCRIPT_COLUMNS:
            raise ValueError(f"unexpected transcript header: {header!r}")
        for row in reader:
            idx_str, bit_str, t_s_str, matched_str, t_r_str, det_str, disc_str, err_str = row
            if idx_str == "":
                anomalies.append(ReceiveRecord(t_r_ps=float(t_r_str), detector=int(det_str[1:])))
                continue
            index = int(idx_str)
            sends.append(SendRecord(index=index, bit=int(bit_str), t_s_ps=float(t_s_str)))
            if matched_str == "1":
                matches[index] = ReceiveRecord(t_r_ps=float(t_r_str), detector=int(det_str[1:]))
                if disc_str == "1":
                    disclosed.add(index)
                    if err_str == "1":
                        errors.add(index)
    return sends, matches, disclosed, errors, anomalies
