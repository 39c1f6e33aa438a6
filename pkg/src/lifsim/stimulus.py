"""Sparsity-controlled spike-train generation, encoding and persistence.

Density is controlled along two axes: temporal density (fraction of
timesteps with at least one spike) and input density (mean fraction of
channels active *within* active timesteps — the conditional definition,
which is the only one under which a dataset can pair 16.6% temporal with
74.8% input density).

Random generation uses numpy's PCG64 generator seeded from a 64-bit
integer; the algorithm name is recorded in saved files so results are
reproducible.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

RNG_ALGORITHM = "numpy-PCG64"

# Dataset-style density presets: (temporal_density, input_density) means.
PRESETS = {
    "mnist": (1.00, 0.132),
    "nmnist": (0.937, 0.016),
    "audiomnist": (0.166, 0.748),
}


class SpikeTrainParseError(ValueError):
    """Malformed spike-train file; message carries the offending line."""


@dataclass(frozen=True)
class DensityProfile:
    temporal_density: float
    input_density: float

    def __post_init__(self):
        for name in ("temporal_density", "input_density"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class AERPacket:
    """One addressed event: (timestamp, source channel)."""

    timestamp: int
    address: int


class SpikeTrain:
    """A set of (timestep, channel) events on a fixed grid."""

    def __init__(self, n_channels, n_steps, events=()):
        if n_channels < 1 or n_steps < 0:
            raise ValueError("n_channels must be >= 1 and n_steps >= 0")
        self.n_channels = n_channels
        self.n_steps = n_steps
        self.events = set()
        for t, ch in events:
            if not 0 <= t < n_steps:
                raise ValueError(f"event time {t} outside [0, {n_steps})")
            if not 0 <= ch < n_channels:
                raise ValueError(f"event channel {ch} outside [0, {n_channels})")
            if (t, ch) in self.events:
                raise ValueError(f"duplicate event ({t}, {ch})")
            self.events.add((t, ch))

    def sorted_events(self):
        return sorted(self.events)

    def steps_with_events(self):
        """Map timestep -> sorted channels, active steps only, time order."""
        by_step = {}
        for t, ch in sorted(self.events):
            by_step.setdefault(t, []).append(ch)
        return by_step

    def __eq__(self, other):
        return (
            isinstance(other, SpikeTrain)
            and self.n_channels == other.n_channels
            and self.n_steps == other.n_steps
            and self.events == other.events
        )

    def __repr__(self):
        return (
            f"SpikeTrain(channels={self.n_channels}, steps={self.n_steps}, "
            f"events={len(self.events)})"
        )


def _effective_channel_prob(target, n_channels):
    """Per-channel Bernoulli probability whose redraw-conditioned mean hits
    the target input density.

    Redrawing empty steps biases the realized density upward; solve
    p / (1 - (1-p)^C) = target for p. Targets at or below 1/C are not
    reachable (a non-empty step has at least one of C channels), in which
    case a single uniformly-chosen channel per active step comes closest.
    Returns None to request single-channel mode.
    """
    c = n_channels
    if target >= 1.0:
        return 1.0
    if target * c <= 1.0:
        return None

    def bias(p):
        return p / (1.0 - (1.0 - p) ** c) - target

    return brentq(bias, 1e-12, target)


def generate(profile, n_channels, n_steps, seed):
    """Draw a spike train matching the density profile, deterministically.

    Each timestep is active with probability temporal_density; active steps
    draw channels with the bias-corrected probability, redrawing while empty
    (bounded retries, then a forced single channel) so realized temporal
    density equals the Bernoulli draw.
    """
    if n_steps < 1 or n_channels < 1:
        raise ValueError("n_channels and n_steps must be >= 1")
    if profile.temporal_density > 0.0 and profile.input_density == 0.0:
        raise ValueError("input_density 0 with temporal_density > 0: "
                         "an active step cannot be empty")
    rng = np.random.default_rng(seed)
    p_ch = _effective_channel_prob(profile.input_density, n_channels)
    active_steps = np.nonzero(rng.random(n_steps) < profile.temporal_density)[0]
    if active_steps.size == 0:
        return SpikeTrain(n_channels, n_steps)
    if p_ch is None:
        chans = rng.integers(n_channels, size=active_steps.size)
        events = list(zip(active_steps.tolist(), chans.tolist()))
        return SpikeTrain(n_channels, n_steps, events)
    masks = rng.random((active_steps.size, n_channels)) < p_ch
    empty = ~masks.any(axis=1)
    for _ in range(99):
        if not empty.any():
            break
        masks[empty] = rng.random((int(empty.sum()), n_channels)) < p_ch
        empty = ~masks.any(axis=1)
    masks[empty, 0] = True  # forced single channel after bounded retries
    rows, cols = np.nonzero(masks)
    events = list(zip(active_steps[rows].tolist(), cols.tolist()))
    return SpikeTrain(n_channels, n_steps, events)


def generate_preset(name, n_channels, n_steps, seed):
    """Generate from a named dataset-style density preset."""
    try:
        temporal, inp = PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None
    return generate(DensityProfile(temporal, inp), n_channels, n_steps, seed)


def measure_density(train):
    """Exact temporal/input densities of a train per their definitions."""
    by_step = train.steps_with_events()
    if train.n_steps == 0 or not by_step:
        return DensityProfile(0.0, 0.0)
    temporal = len(by_step) / train.n_steps
    inp = sum(len(chs) for chs in by_step.values()) / (
        len(by_step) * train.n_channels
    )
    return DensityProfile(temporal, inp)


def encode_serial(train):
    """Dense per-timestep bit-vectors; element i of vector t is 1 iff
    channel i spikes at step t."""
    vectors = [[0] * train.n_channels for _ in range(train.n_steps)]
    for t, ch in train.events:
        vectors[t][ch] = 1
    return [tuple(v) for v in vectors]


def decode_serial(vectors, n_channels):
    """Inverse of encode_serial; rejects vectors of the wrong width."""
    events = []
    for t, vec in enumerate(vectors):
        if len(vec) != n_channels:
            raise ValueError(
                f"vector at step {t} has width {len(vec)}, expected {n_channels}"
            )
        events.extend((t, ch) for ch, bit in enumerate(vec) if bit)
    return SpikeTrain(n_channels, len(vectors), events)


def encode_aer(train):
    """One packet per event, sorted by timestamp then address."""
    return [AERPacket(t, ch) for t, ch in train.sorted_events()]


def decode_aer(packets, n_channels, n_steps):
    """Inverse of encode_aer; rejects out-of-range or unsorted streams."""
    events = []
    prev = None
    for pkt in packets:
        if not 0 <= pkt.timestamp < n_steps:
            raise ValueError(f"packet timestamp {pkt.timestamp} outside [0, {n_steps})")
        if not 0 <= pkt.address < n_channels:
            raise ValueError(f"packet address {pkt.address} outside [0, {n_channels})")
        key = (pkt.timestamp, pkt.address)
        if prev is not None and key <= prev:
            raise ValueError(f"packet stream not sorted at ({key[0]}, {key[1]})")
        prev = key
        events.append(key)
    return SpikeTrain(n_channels, n_steps, events)


def save(train, path, metadata=()):
    """Write the line-oriented spike-train file format.

    Header `SPIKETRAIN v1 channels=<C> steps=<T>`, then optional `#`
    comment lines, then one `<t> <ch>` line per event in ascending order.
    """
    with open(path, "w") as fh:
        fh.write(f"SPIKETRAIN v1 channels={train.n_channels} steps={train.n_steps}\n")
        for line in metadata:
            fh.write(f"# {line}\n")
        for t, ch in train.sorted_events():
            fh.write(f"{t} {ch}\n")


def load(path):
    """Parse a spike-train file; errors name the offending line."""
    with open(path) as fh:
        lines = fh.readlines()
    header_seen = False
    n_channels = n_steps = None
    events = []
    for lineno, raw_line in enumerate(lines, start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if not header_seen:
            parts = line.split()
            if (
                len(parts) != 4
                or parts[0] != "SPIKETRAIN"
                or parts[1] != "v1"
                or not parts[2].startswith("channels=")
                or not parts[3].startswith("steps=")
            ):
                raise SpikeTrainParseError(f"{path}:{lineno}: bad header {line!r}")
            try:
                n_channels = int(parts[2][len("channels="):])
                n_steps = int(parts[3][len("steps="):])
            except ValueError:
                raise SpikeTrainParseError(
                    f"{path}:{lineno}: non-integer header field"
                ) from None
            header_seen = True
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SpikeTrainParseError(f"{path}:{lineno}: expected '<t> <ch>'")
        try:
            t, ch = int(parts[0]), int(parts[1])
        except ValueError:
            raise SpikeTrainParseError(
                f"{path}:{lineno}: non-integer event field"
            ) from None
        if not 0 <= t < n_steps:
            raise SpikeTrainParseError(
                f"{path}:{lineno}: event time {t} outside [0, {n_steps})"
            )
        if not 0 <= ch < n_channels:
            raise SpikeTrainParseError(
                f"{path}:{lineno}: channel {ch} outside [0, {n_channels})"
            )
        if events and (t, ch) == events[-1]:
            raise SpikeTrainParseError(f"{path}:{lineno}: duplicate event ({t}, {ch})")
        if events and (t, ch) < events[-1]:
            raise SpikeTrainParseError(
                f"{path}:{lineno}: events out of ascending (t, ch) order"
            )
        events.append((t, ch))
    if not header_seen:
        raise SpikeTrainParseError(f"{path}: missing SPIKETRAIN header")
    return SpikeTrain(n_channels, n_steps, events)
