"""Telescope-log ingestion and parameter inference.

A network telescope sees unsolicited probe packets as (timestamp, source
address) pairs.  The pipeline here turns such a log into model parameters
in three steps: (1) per-source first/last-seen timelines give each node's
infection interval, hence per-window (S, I, R); (2) every new infection is
attributed to a mechanism by looking at which subnets already held an
infected node when it appeared (same /24 -> local, one of the ten
preceding /24s -> neighbourhood, otherwise global); (3) inverting the
escape probabilities window by window yields effective rates, which the
mixing algebra converts into (lambda, alphas, betas), and dR/I yields the
recovery rate.

S(t) counts nodes that will eventually be observed but have not yet been:
a telescope never sees nodes that stay clean, so the susceptible pool is
relative to the eventually-infected population, exactly as in the source
measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import (MECH_GLOBAL, MECH_LOCAL, MECH_NEIGH, EffectiveRates,
                    ModelParams, mixing_to_infection_rates, rates_to_mixing,
                    write_params_file)

WINDOW_SECONDS = 600
NEIGHBOURHOOD_PREFIXES = 10


class NoUsableWindowsError(ValueError):
    """No window in the averaging range allows rate estimation."""


@dataclass(frozen=True)
class ProbeEvent:
    timestamp: int     # epoch seconds
    source_addr: int   # 32-bit address as an unsigned integer


@dataclass
class ParseResult:
    events: list
    malformed: int


def _parse_addr(text: str) -> int:
    text = text.strip()
    if "." in text:
        parts = text.split(".")
        if len(parts) != 4:
            raise ValueError(f"bad dotted-quad address {text!r}")
        addr = 0
        for p in parts:
            octet = int(p)
            if not 0 <= octet <= 255:
                raise ValueError(f"octet out of range in {text!r}")
            addr = addr * 256 + octet
        return addr
    addr = int(text)
    if not 0 <= addr < 2 ** 32:
        raise ValueError(f"address out of range: {text!r}")
    return addr


_HEADER = "timestamp,source_addr"


def parse_events(source) -> ParseResult:
    """Read an event log (path or open text stream).

    Well-formed rows come back sorted by timestamp; malformed rows are
    skipped and counted.  Addresses may be dotted-quad or decimal.
    """
    if hasattr(source, "read"):
        return _parse_stream(source)
    with open(source) as fh:
        return _parse_stream(fh)


def _parse_stream(fh) -> ParseResult:
    events = []
    malformed = 0
    first = True
    for raw in fh:
        line = raw.strip()
        if not line:
            continue
        if first:
            first = False
            if line == _HEADER:
                continue
        try:
            ts_text, addr_text = line.split(",")
            ts = int(ts_text)
            if ts < 0:
                raise ValueError("negative timestamp")
            events.append(ProbeEvent(timestamp=ts,
                                     source_addr=_parse_addr(addr_text)))
        except ValueError:
            malformed += 1
    events.sort(key=lambda e: e.timestamp)
    return ParseResult(events=events, malformed=malformed)


def filter_background(events, baselines) -> list:
    """Drop events whose source appears in any baseline capture.

    Sources already probing before the outbreak day are background noise
    (other scanners, residual infections), not new infections.
    """
    noise = {e.source_addr for baseline in baselines for e in baseline}
    return [e for e in events if e.source_addr not in noise]


@dataclass(frozen=True)
class NodeTimeline:
    """One source's observation interval: infected at its first probe,
    recovered after its last."""

    source_addr: int
    first_seen: int
    last_seen: int
    n_events: int = 1


def build_timelines(events) -> list:
    """One timeline per distinct source, sorted by address."""
    spans = {}
    for e in events:
        rec = spans.get(e.source_addr)
        if rec is None:
            spans[e.source_addr] = [e.timestamp, e.timestamp, 1]
        else:
            if e.timestamp < rec[0]:
                rec[0] = e.timestamp
            if e.timestamp > rec[1]:
                rec[1] = e.timestamp
            rec[2] += 1
    return [NodeTimeline(source_addr=addr, first_seen=first, last_seen=last,
                         n_events=count)
            for addr, (first, last, count) in sorted(spans.items())]


@dataclass(eq=False)
class WindowSeries:
    """Per-window compartment counts and new-infection/recovery tallies.

    Index t covers consecutive windows [windows[0] .. windows[-1]].  The
    tallies are forward differences: dI_*(t) and dR(t) count transitions
    during window t, i.e. onsets at t+1 and last-seen windows equal to t.
    Arrays may be real-valued (expected counts) when constructed
    synthetically; build_window_series emits integer counts.
    """

    window_seconds: int
    windows: np.ndarray          # absolute window indices, consecutive
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray
    dR: np.ndarray
    n: int                       # total observed nodes
    num_subnets: int             # distinct observed /24 prefixes
    relevant_neighbours: float   # mean observed predecessors per subnet
    dI_l: np.ndarray | None = None
    dI_n: np.ndarray | None = None
    dI_g: np.ndarray | None = None

    @property
    def I_N(self) -> np.ndarray:
        return self.I / self.num_subnets

    @property
    def I_plus(self) -> np.ndarray:
        return self.I_N * self.relevant_neighbours

    @property
    def attributed(self) -> bool:
        return self.dI_l is not None

    def __len__(self) -> int:
        return len(self.windows)


def _window_bounds(timelines, window_seconds):
    w_first = np.array([t.first_seen // window_seconds for t in timelines],
                       dtype=np.int64)
    w_last = np.array([t.last_seen // window_seconds for t in timelines],
                      dtype=np.int64)
    return w_first, w_last


def build_window_series(timelines, window_seconds: int = WINDOW_SECONDS,
                        ) -> WindowSeries:
    """Aggregate timelines into per-window (S, I, R) and recovery counts.

    A node is infected from its first-seen window through its last-seen
    window inclusive, susceptible before, recovered after.
    """
    if not timelines:
        raise ValueError("no timelines to aggregate")
    if window_seconds <= 0:
        raise ValueError("window_seconds must be positive")
    n = len(timelines)
    w_first, w_last = _window_bounds(timelines, window_seconds)
    t0 = int(w_first.min())
    t1 = int(w_last.max())
    width = t1 - t0 + 1

    onsets = np.bincount(w_first - t0, minlength=width)
    ends = np.bincount(w_last - t0, minlength=width)
    cum_onsets = np.cumsum(onsets)
    cum_ends = np.cumsum(ends)
    S = n - cum_onsets
    R = np.concatenate(([0], cum_ends[:-1]))
    I = n - S - R

    prefixes = np.unique(np.array([t.source_addr >> 8 for t in timelines],
                                  dtype=np.int64))
    present = np.zeros((NEIGHBOURHOOD_PREFIXES, prefixes.size), dtype=bool)
    for d in range(1, NEIGHBOURHOOD_PREFIXES + 1):
        wanted = prefixes - d
        pos = np.searchsorted(prefixes, wanted)
        pos = np.clip(pos, 0, prefixes.size - 1)
        present[d - 1] = prefixes[pos] == wanted
    relevant = float(present.sum(axis=0).mean())

    return WindowSeries(window_seconds=window_seconds,
                        windows=np.arange(t0, t1 + 1, dtype=np.int64),
                        S=S, I=I, R=R, dR=ends, n=n,
                        num_subnets=int(prefixes.size),
                        relevant_neighbours=relevant)


def attribute_nodes(timelines, series: WindowSeries) -> np.ndarray:
    """Mechanism label for every observed node, Step Two's rule.

    A node first seen in window w was locally infected if some other node
    of its /24 was already infected (first seen before w, last seen at or
    after w); failing that, an infected node in one of the ten preceding
    /24 prefixes makes it a neighbourhood infection; otherwise global.
    Simultaneous first-seen nodes do not explain each other.
    """
    w_first, w_last = _window_bounds(timelines, series.window_seconds)
    t0 = int(series.windows[0])
    width = len(series.windows)
    prefixes = np.array([t.source_addr >> 8 for t in timelines],
                        dtype=np.int64)
    uniq = np.unique(prefixes)
    rows = np.searchsorted(uniq, prefixes)

    # Active-infected counts per (subnet, window) via difference arrays:
    # node u counts from w_first(u)+1 through w_last(u).
    active = np.zeros((uniq.size, width + 2), dtype=np.int32)
    start = np.clip(w_first + 1 - t0, 0, width + 1)
    end = np.clip(w_last + 1 - t0, 0, width + 1)
    np.add.at(active, (rows, start), 1)
    np.add.at(active, (rows, end), -1)
    np.cumsum(active, axis=1, out=active)

    cols = np.clip(w_first - t0, 0, width + 1)
    labels = np.full(len(timelines), MECH_GLOBAL, dtype=np.int8)
    local = active[rows, cols] > 0
    labels[local] = MECH_LOCAL

    unresolved = ~local
    neigh = np.zeros(len(timelines), dtype=bool)
    for d in range(1, NEIGHBOURHOOD_PREFIXES + 1):
        wanted = prefixes[unresolved] - d
        pos = np.searchsorted(uniq, wanted)
        pos = np.clip(pos, 0, uniq.size - 1)
        hit = uniq[pos] == wanted
        sub = np.zeros(unresolved.sum(), dtype=bool)
        sub[hit] = active[pos[hit], cols[unresolved][hit]] > 0
        neigh[np.flatnonzero(unresolved)[sub]] = True
    labels[neigh] = MECH_NEIGH
    return labels


def attribute_infections(timelines, series: WindowSeries) -> WindowSeries:
    """Split each window's new infections into (dI_l, dI_n, dI_g).

    dI_x(t) counts attributed onsets in window t+1 (forward difference,
    aligned with S(t) for the escape-probability inversion).  First-window
    onsets are initial stock, not new infections, and appear in no dI.
    """
    labels = attribute_nodes(timelines, series)
    w_first, _ = _window_bounds(timelines, series.window_seconds)
    t0 = int(series.windows[0])
    width = len(series.windows)
    fresh = w_first > t0
    slot = w_first[fresh] - 1 - t0
    lab = labels[fresh]
    counts = []
    for mech in (MECH_LOCAL, MECH_NEIGH, MECH_GLOBAL):
        counts.append(np.bincount(slot[lab == mech], minlength=width))
    return replace(series, dI_l=counts[0], dI_n=counts[1], dI_g=counts[2])


@dataclass(eq=False)
class WindowRates:
    """Per-window effective rates; NaN where the window is unusable."""

    windows: np.ndarray
    b_l: np.ndarray
    b_n: np.ndarray
    b_g: np.ndarray
    gamma: np.ndarray
    usable: np.ndarray  # bool


def _invert_escape(dI, S, exponent, out_unusable):
    """b = 1 - (1 - dI/S)^(1/exponent) where defined.

    Zero exponent with zero dI means "no probers, no infections": b=0.
    Zero exponent with dI > 0 marks the window unusable instead.
    """
    b = np.zeros_like(dI, dtype=float)
    degenerate = exponent <= 0
    out_unusable |= degenerate & (dI > 0)
    ok = ~degenerate & (S > 0) & (dI < S)
    b[ok] = -np.expm1(np.log1p(-dI[ok] / S[ok]) / exponent[ok])
    return b


def estimate_window_rates(series: WindowSeries) -> WindowRates:
    """Invert the escape probabilities window by window.

    P_x(t) = 1 - dI_x(t)/S(t) and b_x = 1 - P_x^(1/e_x) with exponents
    e_l = I_N, e_n = I_plus, e_g = I.  Windows with I=0, S=0, or any
    dI_x >= S carry no information (or an infinite rate) and are flagged
    unusable; gamma(t) = dR(t)/I(t) wherever I > 0.
    """
    if not series.attributed:
        raise ValueError("series has no attributed dI counts; run "
                         "attribute_infections first")
    S = np.asarray(series.S, dtype=float)
    I = np.asarray(series.I, dtype=float)
    dI_l = np.asarray(series.dI_l, dtype=float)
    dI_n = np.asarray(series.dI_n, dtype=float)
    dI_g = np.asarray(series.dI_g, dtype=float)

    unusable = (I <= 0) | (S <= 0) | (dI_l >= S) | (dI_n >= S) | (dI_g >= S)
    b_l = _invert_escape(dI_l, S, series.I_N, unusable)
    b_n = _invert_escape(dI_n, S, series.I_plus, unusable)
    b_g = _invert_escape(dI_g, S, I, unusable)

    gamma = np.full(len(series), np.nan)
    has_inf = I > 0
    gamma[has_inf] = np.asarray(series.dR, dtype=float)[has_inf] / I[has_inf]

    usable = ~unusable
    for arr in (b_l, b_n, b_g):
        arr[unusable] = np.nan
    return WindowRates(windows=series.windows, b_l=b_l, b_n=b_n, b_g=b_g,
                       gamma=gamma, usable=usable)


@dataclass(eq=False)
class InferenceResult:
    """Inferred parameters plus everything needed to judge them."""

    params: ModelParams
    rates: EffectiveRates
    window_rates: WindowRates
    t_start: int
    t_end: int
    n_usable: int
    diagnostics: dict

    def write_params_file(self, path) -> None:
        write_params_file(self.params, path)


def infer_params(series: WindowSeries, t_start: int | None = None,
                 t_end: int | None = None) -> InferenceResult:
    """Average per-window rates over usable windows and solve the algebra.

    t_start/t_end are absolute window indices (inclusive); omitted bounds
    default to the full series.
    """
    rates = estimate_window_rates(series)
    lo = series.windows[0] if t_start is None else t_start
    hi = series.windows[-1] if t_end is None else t_end
    in_range = (rates.windows >= lo) & (rates.windows <= hi)
    mask = in_range & rates.usable
    n_usable = int(mask.sum())
    if n_usable == 0:
        raise NoUsableWindowsError(
            f"no usable windows in [{lo}, {hi}] "
            f"({int(in_range.sum())} windows in range)")

    mean_rates = EffectiveRates(b_l=float(rates.b_l[mask].mean()),
                                b_n=float(rates.b_n[mask].mean()),
                                b_g=float(rates.b_g[mask].mean()))
    gamma = float(rates.gamma[mask].mean())
    lam, alpha_g, alpha_l, alpha_n = rates_to_mixing(mean_rates)
    beta_l, beta_n, beta_g = mixing_to_infection_rates(
        mean_rates, (alpha_g, alpha_l, alpha_n))
    params = ModelParams(alpha_g=alpha_g, alpha_l=alpha_l, alpha_n=alpha_n,
                         beta_g=beta_g, beta_l=beta_l, beta_n=beta_n,
                         gamma=gamma, lam=lam)

    onsets_l = float(np.sum(series.dI_l))
    onsets_n = float(np.sum(series.dI_n))
    onsets_g = float(np.sum(series.dI_g))
    onsets = onsets_l + onsets_n + onsets_g
    reach = onsets_l + onsets_n
    diagnostics = {
        "nodes": series.n,
        "subnets": series.num_subnets,
        "relevant_neighbours": series.relevant_neighbours,
        "windows_total": len(series),
        "windows_in_range": int(in_range.sum()),
        "windows_usable": n_usable,
        "onsets_total": onsets,
        "frac_local": onsets_l / onsets if onsets else math.nan,
        "frac_neighbourhood": onsets_n / onsets if onsets else math.nan,
        "frac_global": onsets_g / onsets if onsets else math.nan,
        "frac_within_reach": reach / onsets if onsets else math.nan,
        "frac_local_within_reach": onsets_l / reach if reach else math.nan,
    }
    return InferenceResult(params=params, rates=mean_rates,
                           window_rates=rates, t_start=int(lo), t_end=int(hi),
                           n_usable=n_usable, diagnostics=diagnostics)


def infer_from_log(log_path, baseline_paths=(), window_seconds: int =
                   WINDOW_SECONDS, t_start: int | None = None,
                   t_end: int | None = None) -> InferenceResult:
    """End-to-end pipeline: parse, filter, aggregate, attribute, infer."""
    parsed = parse_events(log_path)
    baselines = [parse_events(p).events for p in baseline_paths]
    events = filter_background(parsed.events, baselines)
    if not events:
        raise NoUsableWindowsError("no events left after background filter")
    timelines = build_timelines(events)
    series = attribute_infections(timelines,
                                  build_window_series(timelines,
                                                      window_seconds))
    result = infer_params(series, t_start=t_start, t_end=t_end)
    result.diagnostics["malformed_rows"] = parsed.malformed
    result.diagnostics["events"] = len(events)
    result.diagnostics["events_background"] = len(parsed.events) - len(events)
    return result
