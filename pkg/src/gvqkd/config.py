"""Flat key = value scenario files -> validated run configuration.

Format: UTF-8 text, one `key = value` per line, blank lines and `#`
comments (full-line or trailing) ignored. Unknown keys, malformed lines,
duplicate keys and out-of-range values are rejected with a message naming
the offending key. Every key is optional; defaults describe a clean
5-second session of the tabletop link.

Keys (units)                      default
----------------------------------------------------------------------
seed                              0
tau (ps)                          2000
travel_time (ps)                  1000
jitter (ps)                       300     sets both jitters below
herald_jitter (ps)                = jitter
signal_jitter (ps)                = jitter
accept_window (ps)                3 * sqrt(herald^2 + signal^2)
visibility                        1.0, or mean of the per-detector pair
visibility_d0, visibility_d1      = visibility
pair_rate (1/s)                   1000
heralding_efficiency              1.0
detector_efficiency               1.0
dark_rate (1/s)                   0.0
duration (s)                      5.0
disclosure_fraction               0.5
runs                              60
source_bit (0 | 1 | random)       random
wavelength (nm)                   812
scan_span (nm)                    1624
scan_steps                        41
shots_per_step                    5000
coherence_window (ps)             10
extra_delay (ps)                  500
qber_threshold                    0.11
anomaly_threshold                 3 * analytic false-anomaly rate
"""

from dataclasses import dataclass, replace
from pathlib import Path

from gvqkd.analysis import DEFAULT_QBER_THRESHOLD, default_anomaly_threshold
from gvqkd.devices import DetectorParams, SourceParams
from gvqkd.protocol import SessionConfig


class ConfigError(ValueError):
    """Invalid scenario file or configuration value."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One scenario: the physical session plus run-level and analysis knobs."""

    session: SessionConfig
    runs: int = 60
    source_bit: int | None = None
    scan_span_nm: float = 1624.0
    scan_steps: int = 41
    shots_per_step: int = 5000
    extra_delay_ps: float = 500.0
    qber_threshold: float = DEFAULT_QBER_THRESHOLD
    anomaly_threshold: float | None = None

    def resolved_anomaly_threshold(self) -> float:
        if self.anomaly_threshold is not None:
            return self.anomaly_threshold
        return default_anomaly_threshold(self.session)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, session=replace(self.session, seed=seed))


def parse_flat(text: str) -> dict[str, str]:
    """Split flat key = value text into a raw string mapping."""
    values: dict[str, str] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line.strip()!r}")
        if key in values:
            raise ConfigError(f"duplicate config key {key}")
        values[key] = value
    return values


def _parse_float(key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {raw!r}") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise ConfigError(f"{key}: must be finite")
    return value


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {raw!r}") from None


def _require(key: str, ok: bool, message: str) -> None:
    if not ok:
        raise ConfigError(f"{key}: {message}")


# validated in this order, so the first invalid key is the one reported
_KNOWN_KEYS = (
    "seed",
    "tau",
    "travel_time",
    "jitter",
    "herald_jitter",
    "signal_jitter",
    "accept_window",
    "visibility",
    "visibility_d0",
    "visibility_d1",
    "pair_rate",
    "heralding_efficiency",
    "detector_efficiency",
    "dark_rate",
    "duration",
    "disclosure_fraction",
    "runs",
    "source_bit",
    "wavelength",
    "scan_span",
    "scan_steps",
    "shots_per_step",
    "coherence_window",
    "extra_delay",
    "qber_threshold",
    "anomaly_threshold",
)


def build_experiment(values: dict[str, str]) -> ExperimentConfig:
    """Validate raw key strings and assemble a full ExperimentConfig."""
    for key in values:
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key}")

    out: dict[str, object] = {}
    for key in _KNOWN_KEYS:
        if key not in values:
            continue
        raw = values[key]
        if key in ("seed", "runs", "scan_steps", "shots_per_step"):
            out[key] = _parse_int(key, raw)
        elif key == "source_bit":
            _require(key, raw in ("0", "1", "random"), "must be 0, 1 or random")
            out[key] = None if raw == "random" else int(raw)
        else:
            out[key] = _parse_float(key, raw)

        if key == "seed":
            _require(key, out[key] >= 0, "must be >= 0")
        elif key in ("tau", "travel_time", "accept_window", "duration", "wavelength",
                     "scan_span", "coherence_window", "extra_delay"):
            _require(key, out[key] > 0, "must be positive")
        elif key in ("jitter", "herald_jitter", "signal_jitter", "pair_rate", "dark_rate"):
            _require(key, out[key] >= 0, "must be >= 0")
        elif key in ("visibility", "visibility_d0", "visibility_d1",
                     "heralding_efficiency", "detector_efficiency"):
            _require(key, 0.0 <= out[key] <= 1.0, "must be in [0, 1]")
        elif key in ("disclosure_fraction", "qber_threshold", "anomaly_threshold"):
            _require(key, 0.0 < out[key] < 1.0, "must be in (0, 1)")
        elif key == "runs":
            _require(key, out[key] >= 1, "must be >= 1")
        elif key == "scan_steps":
            _require(key, out[key] >= 2, "must be >= 2")
        elif key == "shots_per_step":
            _require(key, out[key] >= 1, "must be >= 1")

    jitter = out.get("jitter", 300.0)
    herald_jitter = out.get("herald_jitter", jitter)
    signal_jitter = out.get("signal_jitter", jitter)

    # visibility resolution: an explicit session value wins; otherwise the
    # mean of the per-detector pair; detectors default to the session value
    vis = out.get("visibility")
    vis_d0 = out.get("visibility_d0")
    vis_d1 = out.get("visibility_d1")
    if vis is None:
        if vis_d0 is None and vis_d1 is None:
            vis = 1.0
        else:
            vis = ((vis_d0 if vis_d0 is not None else 1.0) + (vis_d1 if vis_d1 is not None else 1.0)) / 2.0

    source = SourceParams(
        pair_rate_hz=out.get("pair_rate", 1000.0),
        heralding_efficiency=out.get("heralding_efficiency", 1.0),
        herald_jitter_sigma_ps=herald_jitter,
    )
    detector = DetectorParams(
        efficiency=out.get("detector_efficiency", 1.0),
        jitter_sigma_ps=signal_jitter,
        dark_rate_hz=out.get("dark_rate", 0.0),
    )
    try:
        session = SessionConfig(
            tau_ps=out.get("tau", 2000.0),
            travel_time_ps=out.get("travel_time", 1000.0),
            accept_window_ps=out.get("accept_window"),
            visibility=vis,
            visibility_d0=vis_d0,
            visibility_d1=vis_d1,
            source=source,
            signal_detector=detector,
            session_duration_s=out.get("duration", 5.0),
            disclosure_fraction=out.get("disclosure_fraction", 0.5),
            seed=out.get("seed", 0),
            coherence_window_ps=out.get("coherence_window", 10.0),
            wavelength_nm=out.get("wavelength", 812.0),
        )
    except ValueError as exc:
        # cross-field invariants (tau vs jitter) surface here
        raise ConfigError(str(exc)) from None

    return ExperimentConfig(
        session=session,
        runs=out.get("runs", 60),
        source_bit=out.get("source_bit"),
        scan_span_nm=out.get("scan_span", 1624.0),
        scan_steps=out.get("scan_steps", 41),
        shots_per_step=out.get("shots_per_step", 5000),
        extra_delay_ps=out.get("extra_delay", 500.0),
        qber_threshold=out.get("qber_threshold", DEFAULT_QBER_THRESHOLD),
        anomaly_threshold=out.get("anomaly_threshold"),
    )


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Load and validate a scenario file; None yields the all-defaults scenario."""
    if path is None:
        return build_experiment({})
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return build_experiment(parse_flat(file_path.read_text(encoding="utf-8")))
