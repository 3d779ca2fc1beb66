"""Expected-cost analysis of the partitioned reconciliation protocols.

Three quantities are tabulated as functions of the difference count d
(0..delta_max), all equal to 1 for d <= mbar:

* n_bar: expected recovery calls of the per-partition protocol (which
  equal its transmitted sketches),
* t_bar: expected sketches transmitted by the subtract-reuse protocol,
* u_bar: expected recovery calls of the subtract-reuse protocol.

Each satisfies a conditional recursion over the multinomial placement of
the d difference elements into c weighted children.  The float tables are
computed bottom-up in log space (binomial terms below exp(-700) underflow
to zero, a documented absolute error well under 1e-10 per entry).  Exact
Fraction evaluators of the same recursions, plus an independent oracle
that enumerates every placement of a split directly from the per-tree
counting rules, serve as references.  Monte Carlo samplers draw whole
placement trees and evaluate all three counts and the tree depth jointly
on each tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .partition import PartitionSchedule
from .sketch import wire_cost


def _lgamma_table(n: int) -> np.ndarray:
    lg = np.zeros(n + 1)
    for k in range(2, n + 1):
        lg[k] = math.lgamma(k + 1)
    return lg


@dataclass(frozen=True, eq=False)
class ExpectationTables:
    mbar: int
    schedule: PartitionSchedule
    n_bar: np.ndarray
    t_bar: np.ndarray
    u_bar: np.ndarray


def _epsr_correction(d: int, mbar: int, lg: np.ndarray, skip_front: list[float]) -> float:
    """sum over F in skip_front of sum_{i=0..mbar} C(d,i) (1-F)^i F^(d-i)."""
    total = 0.0
    i = np.arange(mbar + 1)
    base = lg[d] - lg[i] - lg[d - i]
    for f in skip_front:
        total += float(np.exp(base + i * math.log1p(-f) + (d - i) * math.log(f)).sum())
    return total


@lru_cache(maxsize=32)
def expectation_tables(delta_max: int, mbar: int,
                       schedule: PartitionSchedule) -> ExpectationTables:
    """All three expectation tables for d = 0..delta_max, in one pass."""
    if delta_max < 0 or mbar < 1:
        raise ValueError("need delta_max >= 0 and mbar >= 1")
    probs = schedule.as_floats()
    c = schedule.c
    # Prefix sums F_1 .. F_{c-2}: the per-split probabilities, for each of
    # the first c-2 children, that everything beyond that child fits mbar.
    skip_front = [float(f) for f in np.cumsum(probs)[: c - 2]]
    lg = _lgamma_table(delta_max)
    n_bar = np.ones(delta_max + 1)
    t_bar = np.ones(delta_max + 1)
    u_bar = np.ones(delta_max + 1)
    idx = np.arange(delta_max + 1, dtype=float)
    logp = [math.log(p) for p in probs]
    log1p = [math.log1p(-p) for p in probs]
    for d in range(mbar + 1, delta_max + 1):
        i = idx[:d]
        base = lg[d] - lg[:d] - lg[d:0:-1]
        s_n = s_t = s_u = 0.0
        for j in range(c):
            w = np.exp(base + i * (logp[j] - log1p[j]) + d * log1p[j])
            s_n += float(w @ n_bar[:d])
            s_t += float(w @ t_bar[:d])
            s_u += float(w @ u_bar[:d])
        denom = 1.0 - sum(p**d for p in probs)
        corr = _epsr_correction(d, mbar, lg, skip_front) if c > 2 else 0.0
        n_bar[d] = (1.0 + s_n) / denom
        t_bar[d] = (s_t - corr) / denom
        u_bar[d] = (s_u + (c - 1) - 2.0 * corr) / denom
    for arr in (n_bar, t_bar, u_bar):
        arr.flags.writeable = False
    return ExpectationTables(mbar, schedule, n_bar, t_bar, u_bar)


def psr_expected_recoveries(delta_max: int, mbar: int,
                            schedule: PartitionSchedule) -> np.ndarray:
    return expectation_tables(delta_max, mbar, schedule).n_bar


def epsr_expected_sketches(delta_max: int, mbar: int,
                           schedule: PartitionSchedule) -> np.ndarray:
    return expectation_tables(delta_max, mbar, schedule).t_bar


def epsr_expected_recoveries(delta_max: int, mbar: int,
                             schedule: PartitionSchedule) -> np.ndarray:
    return expectation_tables(delta_max, mbar, schedule).u_bar


def psr_expected_recoveries_fair(delta_max: int, mbar: int, c: int) -> np.ndarray:
    """Specialized fair-partitioning form of the recovery-call recursion,
    kept separate as a cross-check of the general evaluator."""
    lg = _lgamma_table(delta_max)
    n_bar = np.ones(delta_max + 1)
    log_cm1 = math.log(c - 1) if c > 2 else 0.0
    log_c = math.log(c)
    for d in range(mbar + 1, delta_max + 1):
        i = np.arange(d, dtype=float)
        base = lg[d] - lg[:d] - lg[d:0:-1]
        w = np.exp(base + (d - i) * log_cm1 + (1 - d) * log_c)
        denom = 1.0 - c ** (1 - d)
        n_bar[d] = (1.0 + float(w @ n_bar[:d])) / denom
    return n_bar


def psr_recovery_bound(delta: float, mbar: int, c: int) -> float:
    """Closed-form upper bound 8e(c+1)d/(mbar+1) for fair partitioning."""
    return 8.0 * math.e * (c + 1) * delta / (mbar + 1)


# ---------------------------------------------------------------------------
# Exact rational evaluators (oracle references, small delta only).


def _exact_binom_weights(d: int, p: Fraction) -> list[Fraction]:
    one_m = 1 - p
    return [Fraction(math.comb(d, i)) * p**i * one_m ** (d - i) for i in range(d)]


def exact_expectation_tables(delta_max: int, mbar: int, schedule: PartitionSchedule):
    """Fraction versions of the three recursions (slow; oracle use only)."""
    probs = schedule.probs
    c = schedule.c
    skip_front = list(schedule.cumulative()[1: c - 1])  # F_1 .. F_{c-2}
    n_bar = [Fraction(1)] * (delta_max + 1)
    t_bar = [Fraction(1)] * (delta_max + 1)
    u_bar = [Fraction(1)] * (delta_max + 1)
    for d in range(mbar + 1, delta_max + 1):
        s_n = s_t = s_u = Fraction(0)
        for p in probs:
            w = _exact_binom_weights(d, p)
            s_n += sum(wi * n_bar[i] for i, wi in enumerate(w))
            s_t += sum(wi * t_bar[i] for i, wi in enumerate(w))
            s_u += sum(wi * u_bar[i] for i, wi in enumerate(w))
        corr = Fraction(0)
        for f in skip_front:
            corr += sum(
                Fraction(math.comb(d, i)) * (1 - f) ** i * f ** (d - i)
                for i in range(mbar + 1)
            )
        denom = 1 - sum(p**d for p in probs)
        n_bar[d] = (1 + s_n) / denom
        t_bar[d] = (s_t - corr) / denom
        u_bar[d] = (s_u + (c - 1) - 2 * corr) / denom
    return n_bar, t_bar, u_bar


def h_index(counts, mbar: int, c: int, delta: int) -> int:
    """First k (1-based) whose accumulated child counts reach delta - mbar."""
    counts = list(counts)
    if len(counts) != c or any(x < 0 for x in counts) or sum(counts) != delta:
        raise ValueError("counts must be c nonnegative integers summing to delta")
    target = delta - mbar
    acc = 0
    for k, x in enumerate(counts, start=1):
        acc += x
        if acc >= target:
            return k
    raise AssertionError("unreachable: total always reaches delta - mbar")


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_tree_expectations(delta_max: int, mbar: int,
                                schedule: PartitionSchedule):
    """Exact expectations built directly from the per-tree counting rules.

    For every composition of d into c children this applies the random
    variable definitions (recovery calls: 1 + sum over all children;
    sketches: 1{h<c} + sum over children 1..h; reuse-protocol recoveries:
    1{h<c} + h - 1{h=c} + sum over children 1..h) with exact multinomial
    weights, solving the single self-referencing term per d.  Independent
    of the marginalized recursions above, which it is used to validate.
    """
    probs = schedule.probs
    c = schedule.c
    n_bar = [Fraction(1)] * (delta_max + 1)
    t_bar = [Fraction(1)] * (delta_max + 1)
    u_bar = [Fraction(1)] * (delta_max + 1)
    for d in range(mbar + 1, delta_max + 1):
        acc_n = acc_t = acc_u = Fraction(0)
        self_w = Fraction(0)
        for comp in _compositions(d, c):
            coeff = 1
            rem = d
            for x in comp:
                coeff *= math.comb(rem, x)
                rem -= x
            w = Fraction(coeff)
            for p, x in zip(probs, comp):
                w *= p**x
            if w == 0:
                continue
            h = h_index(comp, mbar, c, d)
            known_n = Fraction(1)
            known_t = Fraction(1 if h < c else 0)
            known_u = Fraction((1 if h < c else 0) + h - (1 if h == c else 0))
            has_self = False
            for j, x in enumerate(comp, start=1):
                if x == d:
                    has_self = True  # the lone self-referencing child
                    continue
                known_n += n_bar[x]
                if j <= h:
                    known_t += t_bar[x]
                    known_u += u_bar[x]
            acc_n += w * known_n
            acc_t += w * known_t
            acc_u += w * known_u
            if has_self:
                self_w += w
        scale = 1 - self_w
        n_bar[d] = acc_n / scale
        t_bar[d] = acc_t / scale
        u_bar[d] = acc_u / scale
    return n_bar, t_bar, u_bar


# ---------------------------------------------------------------------------
# Monte Carlo samplers.


class TreeSample(NamedTuple):
    psr_recoveries: int
    epsr_sketches: int
    epsr_recoveries: int
    depth: int


def mc_tree_sample(delta: int, mbar: int, schedule: PartitionSchedule,
                   rng: np.random.Generator) -> TreeSample:
    """Draw one multinomial placement tree and evaluate all four counts on
    it (shared tree, so paired per-sample comparisons are exact)."""
    probs = schedule.as_floats()
    c = schedule.c

    def go(d: int) -> tuple[int, int, int, int]:
        if d <= mbar:
            return 1, 1, 1, 0
        counts = rng.multinomial(d, probs)
        subs = [go(int(x)) for x in counts]
        n = 1 + sum(s[0] for s in subs)
        target = d - mbar
        acc = 0
        h = c
        for k, x in enumerate(counts, start=1):
            acc += int(x)
            if acc >= target:
                h = k
                break
        t = (1 if h < c else 0) + sum(subs[k][1] for k in range(h))
        u = (1 if h < c else 0) + h - (1 if h == c else 0) + sum(
            subs[k][2] for k in range(h)
        )
        depth = 1 + max(s[3] for s in subs)
        return n, t, u, depth

    return TreeSample(*go(delta))


def mc_sample_batch(delta: int, mbar: int, schedule: PartitionSchedule,
                    n_samples: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Vectorized sampler: n_samples independent trees, processed level by
    level.  Statistically identical to mc_tree_sample; used for large runs."""
    probs = np.array(schedule.as_floats())
    c = schedule.c
    n = np.ones(n_samples)
    t = np.zeros(n_samples)
    u = np.zeros(n_samples)
    depth = np.zeros(n_samples, dtype=np.int64)
    sizes = np.full(n_samples, delta, dtype=np.int64)
    owner = np.arange(n_samples)
    t_active = np.ones(n_samples, dtype=bool)
    level = 0
    while sizes.size:
        leaf = sizes <= mbar
        tl = leaf & t_active
        np.add.at(t, owner[tl], 1.0)
        np.add.at(u, owner[tl], 1.0)
        split = ~leaf
        if not split.any():
            break
        so = owner[split]
        ss = sizes[split]
        st = t_active[split]
        np.add.at(n, so, float(c))
        np.maximum.at(depth, so, level + 1)
        counts = rng.multinomial(ss, probs)
        h = (counts.cumsum(axis=1) >= (ss - mbar)[:, None]).argmax(axis=1) + 1
        contrib_t = (h < c).astype(float)
        np.add.at(t, so[st], contrib_t[st])
        np.add.at(u, so[st], (contrib_t + h - (h == c))[st])
        child_sizes = counts.reshape(-1)
        child_owner = np.repeat(so, c)
        cols = np.tile(np.arange(c), len(ss))
        child_active = np.repeat(st, c) & (cols < np.repeat(h, c))
        keep = (child_sizes > mbar) | child_active
        sizes = child_sizes[keep]
        owner = child_owner[keep]
        t_active = child_active[keep]
        level += 1
    return {"n": n, "t": t, "u": u, "depth": depth.astype(float)}


# ---------------------------------------------------------------------------
# Derived metrics and bound parameters.


def redundancy(expected_sketches, delta, mbar: int, gamma: int, element_bits: int):
    """Transmitted bits per difference bit: sketches * cost / (delta * bits)."""
    delta_arr = np.asarray(delta)
    if np.any(delta_arr < 1):
        raise ValueError("redundancy undefined for delta < 1")
    cost = wire_cost(mbar, gamma, element_bits)
    out = np.asarray(expected_sketches) * cost / (delta_arr * element_bits)
    return float(out) if out.ndim == 0 else out


def normalized_complexity(expected_recoveries, delta, mbar: int):
    """Recovery calls per mbar-sized chunk of the difference."""
    delta_arr = np.asarray(delta)
    if np.any(delta_arr < 1):
        raise ValueError("normalized complexity undefined for delta < 1")
    out = np.asarray(expected_recoveries) * mbar / delta_arr
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RoundBoundParams:
    """Slope parameters of the expected-round bounds; the expected number
    of rounds grows like lam*log(delta/mbar) (per-partition protocol) and
    lam_star*log(delta/mbar) (subtract-reuse protocol)."""

    lam: float
    lam_star: float
    q_max: float
    p_star: tuple[float, ...]


def round_bounds(schedule: PartitionSchedule) -> RoundBoundParams:
    probs = schedule.as_floats()
    lam = -1.0 / math.log(max(probs))
    p_star = []
    rem = 1.0
    for p in probs[:-1]:
        p_star.append(p / rem)
        rem -= p
    q_max = max(max(ps, 1.0 - ps) for ps in p_star)
    lam_star = -1.0 / math.log(q_max)
    return RoundBoundParams(lam, lam_star, q_max, tuple(p_star))


# ---------------------------------------------------------------------------
# CSV emission.

CSV_COLUMNS = (
    "delta",
    "n_bar",
    "t_bar",
    "u_bar",
    "redundancy_psr",
    "redundancy_epsr",
    "norm_complexity_psr",
    "norm_complexity_epsr",
)


def write_metrics_csv(fobj, delta_max: int, mbar: int, gamma: int,
                      element_bits: int, schedule: PartitionSchedule) -> None:
    """Emit the analysis table for d = 1..delta_max, 12 significant digits."""
    tables = expectation_tables(delta_max, mbar, schedule)
    cost = wire_cost(mbar, gamma, element_bits)
    fobj.write(",".join(CSV_COLUMNS) + "\n")
    for d in range(1, delta_max + 1):
        nb, tb, ub = tables.n_bar[d], tables.t_bar[d], tables.u_bar[d]
        row = (
            str(d),
            f"{nb:.12g}",
            f"{tb:.12g}",
            f"{ub:.12g}",
            f"{nb * cost / (d * element_bits):.12g}",
            f"{tb * cost / (d * element_bits):.12g}",
            f"{nb * mbar / d:.12g}",
            f"{ub * mbar / d:.12g}",
        )
        fobj.write(",".join(row) + "\n")
