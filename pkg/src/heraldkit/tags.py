"""Time-tag stream simulation and the coincidence-counting pipeline.

The experiment clocks pulses at 1 MHz and records detector tags on a time
tagger.  The number-resolving idler readout encodes the photon number in
the tag arrival time: multi-photon pulses cross the constant threshold
earlier, single-photon pulses later, giving a bimodal arrival histogram
split by a boundary into a multi-photon and a single-photon bin.  The
generator reproduces this with a two-Gaussian timing mixture on top of
exact per-pulse Monte-Carlo outcomes; the counter turns a sorted stream
back into coincidence counts and heralded correlations.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass
from enum import IntEnum

import numpy as np

from .errors import ParameterError, StreamOrderError, ZeroDenominatorError
from .model import ModelParams
from .oracle import OracleConfig, sample_pulses


class Channel(IntEnum):
    IDLER = 0
    SIGNAL1 = 1
    SIGNAL2 = 2
    CLOCK = 3


@dataclass(frozen=True)
class TagRecord:
    channel: Channel
    time_ps: int


@dataclass(frozen=True)
class TagStream:
    """A time-ordered tag sequence stored as parallel arrays."""

    channels: np.ndarray  # uint8
    times_ps: np.ndarray  # int64, non-decreasing

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=np.uint8)
        t = np.asarray(self.times_ps, dtype=np.int64)
        if ch.shape != t.shape or ch.ndim != 1:
            raise ParameterError("channels and times must be 1-d and equal length")
        object.__setattr__(self, "channels", ch)
        object.__setattr__(self, "times_ps", t)

    def __len__(self):
        return self.channels.size

    def __iter__(self):
        for c, t in zip(self.channels, self.times_ps):
            yield TagRecord(Channel(int(c)), int(t))

    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.times_ps) >= 0))

    def shifted(self, offset_ps: int) -> "TagStream":
        return TagStream(self.channels, self.times_ps + np.int64(offset_ps))


@dataclass(frozen=True)
class RunConfig:
    """Counting parameters.

    The coincidence window is a half-width: tags pair up when they fall in
    the same clock slot and differ by at most ``window_ps``.  Idler tags
    with delay-corrected offset before ``pnr_bin_boundary_ps`` belong to
    the multi-photon bin, later ones to the single-photon bin.
    """

    clock_period_ps: int = 1_000_000  # 1 MHz clock
    window_ps: int = 1_000
    channel_delays_ps: tuple = (0, 0, 0, 0)
    pnr_bin_boundary_ps: int = 450

    def __post_init__(self):
        if self.window_ps >= self.clock_period_ps / 2:
            raise ParameterError("window must be below half the clock period")
        if len(self.channel_delays_ps) != 4:
            raise ParameterError("need one delay per channel")


@dataclass(frozen=True)
class GeneratorTiming:
    """Arrival-time model of the generator.

    Idler tags sit at ``multi_center_ps`` (earlier, steeper pulses) or
    ``single_center_ps`` after the pulse slot; signal tags at the slot
    itself.  Jitter is Gaussian per channel (idler, signal1, signal2).
    """

    single_center_ps: float = 650.0
    multi_center_ps: float = 250.0
    jitter_ps: tuple = (25.0, 25.0, 25.0)


@dataclass(frozen=True)
class PulseTruth:
    """Ground-truth per-pulse outcomes emitted alongside a generated run."""

    clicks: np.ndarray  # occupied idler ports per pulse
    s1: np.ndarray  # photons seen by signal arm 1
    s2: np.ndarray


@dataclass(frozen=True)
class CoincidenceCounts:
    c_is1: int
    c_is2: int
    c_is1s2: int

    def __add__(self, other):
        return CoincidenceCounts(
            self.c_is1 + other.c_is1,
            self.c_is2 + other.c_is2,
            self.c_is1s2 + other.c_is1s2,
        )


@dataclass(frozen=True)
class CountSummary:
    """Counts distilled from one run (addable across chunks).

    Coincidences come in two variants: ``threshold`` uses every idler
    click, ``pnr_single`` only those classified into the single-photon
    bin.
    """

    pulses: int
    c_i_single: int
    c_i_multi: int
    c_s1: int
    c_s2: int
    threshold: CoincidenceCounts
    pnr_single: CoincidenceCounts
    orphans: int = 0

    @property
    def c_i_total(self) -> int:
        return self.c_i_single + self.c_i_multi

    def __add__(self, other):
        return CountSummary(
            pulses=self.pulses + other.pulses,
            c_i_single=self.c_i_single + other.c_i_single,
            c_i_multi=self.c_i_multi + other.c_i_multi,
            c_s1=self.c_s1 + other.c_s1,
            c_s2=self.c_s2 + other.c_s2,
            threshold=self.threshold + other.threshold,
            pnr_single=self.pnr_single + other.pnr_single,
            orphans=self.orphans + other.orphans,
        )

    def validate(self) -> None:
        for name, counts in (("threshold", self.threshold), ("pnr_single", self.pnr_single)):
            idler = self.c_i_total if name == "threshold" else self.c_i_single
            if counts.c_is1s2 > min(counts.c_is1, counts.c_is2):
                raise ParameterError(f"{name}: threefolds exceed a twofold count")
            if max(counts.c_is1, counts.c_is2) > idler:
                raise ParameterError(f"{name}: twofolds exceed idler counts")
        if max(self.c_i_total, self.c_s1, self.c_s2) > self.pulses:
            raise ParameterError("counts exceed the number of pulses")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["c_i_total"] = self.c_i_total
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CountSummary":
        return cls(
            pulses=int(d["pulses"]),
            c_i_single=int(d["c_i_single"]),
            c_i_multi=int(d["c_i_multi"]),
            c_s1=int(d["c_s1"]),
            c_s2=int(d["c_s2"]),
            threshold=CoincidenceCounts(**{k: int(v) for k, v in d["threshold"].items()}),
            pnr_single=CoincidenceCounts(**{k: int(v) for k, v in d["pnr_single"].items()}),
            orphans=int(d.get("orphans", 0)),
        )


@dataclass(frozen=True)
class G2Result:
    value: float
    sigma: float


def generate_run(
    params: ModelParams,
    pulses: int,
    timing: GeneratorTiming = GeneratorTiming(),
    seed: int = 0,
    clock_period_ps: int = 1_000_000,
    start_time_ps: int = 0,
):
    """Simulate ``pulses`` clock cycles; returns (stream, truth).

    Per pulse the exact chain is sampled (pair numbers, losses, port
    routing, arm split).  One clock tag is emitted per pulse; an idler tag
    whenever any port clicked, timed from the single-photon Gaussian when
    exactly one port clicked and from the earlier multi-photon Gaussian
    otherwise; a signal tag per arm that saw light.  Deterministic for a
    given seed.
    """
    if pulses < 1:
        raise ParameterError("pulses must be >= 1")
    if params.k != int(params.k):
        raise ParameterError("the tag generator needs an integer tree depth")
    cfg = OracleConfig(
        spectrum=params.spectrum,
        mu=params.mu,
        eta_i=params.eta_i,
        eta_s1=params.eta_s1,
        eta_s2=params.eta_s2,
        k=int(params.k),
    )
    rng = np.random.default_rng(np.uint64(seed))
    clicks, s1, s2 = sample_pulses(cfg, pulses, rng)

    slot_t0 = start_time_ps + np.arange(pulses, dtype=np.int64) * clock_period_ps
    chans = [np.full(pulses, Channel.CLOCK, dtype=np.uint8)]
    times = [slot_t0]

    idler_rows = np.flatnonzero(clicks >= 1)
    center = np.where(
        clicks[idler_rows] == 1, timing.single_center_ps, timing.multi_center_ps
    )
    t_idler = slot_t0[idler_rows] + np.rint(
        center + rng.normal(0.0, timing.jitter_ps[0], idler_rows.size)
    ).astype(np.int64)
    chans.append(np.full(idler_rows.size, Channel.IDLER, dtype=np.uint8))
    times.append(t_idler)

    for arm, counts, jit in ((Channel.SIGNAL1, s1, timing.jitter_ps[1]),
                             (Channel.SIGNAL2, s2, timing.jitter_ps[2])):
        rows = np.flatnonzero(counts >= 1)
        t_arm = slot_t0[rows] + np.rint(rng.normal(0.0, jit, rows.size)).astype(np.int64)
        chans.append(np.full(rows.size, arm, dtype=np.uint8))
        times.append(t_arm)

    all_chan = np.concatenate(chans)
    all_time = np.concatenate(times)
    order = np.argsort(all_time, kind="stable")
    stream = TagStream(all_chan[order], all_time[order])
    return stream, PulseTruth(clicks=clicks, s1=s1, s2=s2)


def counts_from_truth(truth: PulseTruth) -> CountSummary:
    """Reduce ground-truth pulse outcomes to the same counts the counter sees."""
    single = truth.clicks == 1
    any_click = truth.clicks >= 1
    a1 = truth.s1 > 0
    a2 = truth.s2 > 0

    def cc(mask) -> CoincidenceCounts:
        return CoincidenceCounts(
            int((mask & a1).sum()), int((mask & a2).sum()), int((mask & a1 & a2).sum())
        )

    return CountSummary(
        pulses=truth.clicks.size,
        c_i_single=int(single.sum()),
        c_i_multi=int((truth.clicks >= 2).sum()),
        c_s1=int(a1.sum()),
        c_s2=int(a2.sum()),
        threshold=cc(any_click),
        pnr_single=cc(single),
    )


def _first_per_slot(slots, resid):
    """Earliest tag of each slot; input is already time ordered."""
    uniq, first = np.unique(slots, return_index=True)
    return uniq, resid[first]


def count_coincidences(stream: TagStream, cfg: RunConfig = RunConfig()) -> CountSummary:
    """Single pass over a sorted stream to a CountSummary.

    A tag belongs to the pulse slot nearest its delay-corrected time; tags
    further than the coincidence window from their slot time are orphans
    and take no part.  When a channel fires twice in one slot only the
    earliest tag is used.
    """
    if not stream.is_sorted():
        raise StreamOrderError("stream must be sorted by time")
    if len(stream) == 0:
        zero = CoincidenceCounts(0, 0, 0)
        return CountSummary(0, 0, 0, 0, 0, zero, zero)

    delays = np.asarray(cfg.channel_delays_ps, dtype=np.int64)
    t = stream.times_ps - delays[stream.channels]
    period = np.int64(cfg.clock_period_ps)
    slots = np.rint(t / period).astype(np.int64)
    resid = t - slots * period

    orphan = np.abs(resid) > cfg.window_ps
    # idler tags live offset from the slot time by design; the orphan rule
    # uses the raw residual, so the window must cover the PNR bin centers
    keep = ~orphan

    per_channel = {}
    for ch in Channel:
        mask = keep & (stream.channels == ch)
        per_channel[ch] = _first_per_slot(slots[mask], resid[mask])

    pulses = per_channel[Channel.CLOCK][0].size
    slots_i, resid_i = per_channel[Channel.IDLER]
    single_mask = resid_i >= cfg.pnr_bin_boundary_ps  # later bin = single photon

    def coincidence(slots_a, resid_a) -> np.ndarray:
        """Flags over idler tags that pair with an arm tag in their slot."""
        _, ia, ib = np.intersect1d(
            slots_i, slots_a, assume_unique=True, return_indices=True
        )
        close = np.abs(resid_i[ia] - resid_a[ib]) <= cfg.window_ps
        flags = np.zeros(slots_i.size, dtype=bool)
        flags[ia[close]] = True
        return flags

    with_s1 = coincidence(*per_channel[Channel.SIGNAL1])
    with_s2 = coincidence(*per_channel[Channel.SIGNAL2])

    def cc(idler_mask) -> CoincidenceCounts:
        return CoincidenceCounts(
            int((idler_mask & with_s1).sum()),
            int((idler_mask & with_s2).sum()),
            int((idler_mask & with_s1 & with_s2).sum()),
        )

    all_idler = np.ones(slots_i.size, dtype=bool)
    return CountSummary(
        pulses=int(pulses),
        c_i_single=int(single_mask.sum()),
        c_i_multi=int((~single_mask).sum()),
        c_s1=int(per_channel[Channel.SIGNAL1][0].size),
        c_s2=int(per_channel[Channel.SIGNAL2][0].size),
        threshold=cc(all_idler),
        pnr_single=cc(single_mask),
        orphans=int(orphan.sum()),
    )


def g2_from_counts(counts: CountSummary, mode: str) -> G2Result:
    """Heralded correlation from counts: C_is1s2 * C_i / (C_is1 * C_is2).

    ``mode`` picks the idler variant ("threshold" or "pnr_single").  The
    uncertainty is first-order Poisson propagation,
    sigma = value * sqrt(1/C_is1s2 + 1/C_i + 1/C_is1 + 1/C_is2).

    Raises:
        ZeroDenominatorError: any required count is zero (no data is not
            the same as a perfect source).
    """
    if mode == "threshold":
        c_i, cc = counts.c_i_total, counts.threshold
    elif mode == "pnr_single":
        c_i, cc = counts.c_i_single, counts.pnr_single
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    for name, value in (
        ("c_i", c_i),
        ("c_is1", cc.c_is1),
        ("c_is2", cc.c_is2),
        ("c_is1s2", cc.c_is1s2),
    ):
        if value == 0:
            raise ZeroDenominatorError(name, f"count {name} is zero in mode {mode!r}")
    value = cc.c_is1s2 * c_i / (cc.c_is1 * cc.c_is2)
    sigma = value * np.sqrt(
        1.0 / cc.c_is1s2 + 1.0 / c_i + 1.0 / cc.c_is1 + 1.0 / cc.c_is2
    )
    return G2Result(float(value), float(sigma))


# ---------------------------------------------------------------------------
# Stream and count file formats: CSV `channel,time_ps`; binary records of
# 1-byte channel + 8-byte little-endian unsigned picoseconds; counts as JSON.
# ---------------------------------------------------------------------------

_RECORD = struct.Struct("<BQ")


def write_tags_csv(stream: TagStream, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("channel,time_ps\n")
        for c, t in zip(stream.channels, stream.times_ps):
            fh.write(f"{int(c)},{int(t)}\n")


def read_tags_csv(path) -> TagStream:
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    if data.size == 0:
        return TagStream(np.empty(0, dtype=np.uint8), np.empty(0, dtype=np.int64))
    return TagStream(data[:, 0].astype(np.uint8), data[:, 1])


def write_tags_binary(stream: TagStream, path) -> None:
    ch = np.ascontiguousarray(stream.channels, dtype=np.uint8)
    t = np.ascontiguousarray(stream.times_ps, dtype="<u8")
    rec = np.empty(len(stream), dtype=[("c", "u1"), ("t", "<u8")])
    rec["c"] = ch
    rec["t"] = t
    with open(path, "wb") as fh:
        fh.write(rec.tobytes())


def read_tags_binary(path) -> TagStream:
    raw = np.fromfile(path, dtype=[("c", "u1"), ("t", "<u8")])
    return TagStream(raw["c"], raw["t"].astype(np.int64))


def write_counts_json(counts: CountSummary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(counts.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_counts_json(path) -> CountSummary:
    with open(path, encoding="utf-8") as fh:
        return CountSummary.from_dict(json.load(fh))
