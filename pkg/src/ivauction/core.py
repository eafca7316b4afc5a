"""Instance model: signal profiles, values/costs, ratios, orderings, allocations.

Conventions used throughout the package:

* agents are 0-based indices ``0..n-1``; signals are 1-based values ``1..k``
  (sums like ``l = s_1 + ... + s_n`` depend on 1-based signals),
* a signal profile is canonically indexed by
  ``sum((s_i - 1) * k**i for i)`` -- agent 0 is the least significant digit,
* all per-(agent, profile) tables are tuples of n tuples of length k**n,
  in canonical profile order, and are treated as immutable.

A "line" is the set of k profiles obtained by varying one agent's own
signal while the others are fixed; monotonicity constraints only ever
relate profiles on a common line.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from ._rat import ONE, Rat, ZERO, rat
from .errors import PreconditionViolation

GOOD = "good"
CHORE = "chore"


def profile_index(s: Sequence[int], k: int) -> int:
    """Canonical index of a 1-based signal vector (agent 0 least significant)."""
    idx = 0
    for i in reversed(range(len(s))):
        if not 1 <= s[i] <= k:
            raise ValueError(f"signal {s[i]} out of range [1, {k}]")
        idx = idx * k + (s[i] - 1)
    return idx


def profile_vector(idx: int, n: int, k: int) -> tuple[int, ...]:
    """Inverse of :func:`profile_index`."""
    out = []
    for _ in range(n):
        out.append(idx % k + 1)
        idx //= k
    return tuple(out)


def all_profiles(n: int, k: int) -> Iterator[tuple[int, ...]]:
    for idx in range(k**n):
        yield profile_vector(idx, n, k)


def line_profiles(p: int, agent: int, n: int, k: int) -> list[int]:
    """Profile indices of the line through p along `agent`, by signal 1..k."""
    step = k**agent
    base = p - ((p // step) % k) * step
    return [base + t * step for t in range(k)]


def line_bases(agent: int, n: int, k: int) -> Iterator[int]:
    """One representative index (signal 1) per line of `agent`."""
    step = k**agent
    for idx in range(k**n):
        if (idx // step) % k == 0:
            yield idx


def _check_table(n: int, k: int, table, positive: bool) -> None:
    if len(table) != n:
        raise ValueError(f"expected {n} agent rows, got {len(table)}")
    size = k**n
    for i, row in enumerate(table):
        if len(row) != size:
            raise ValueError(f"agent {i}: expected {size} entries, got {len(row)}")
        if positive and any(v <= 0 for v in row):
            raise ValueError(f"agent {i}: entries must be strictly positive")


@dataclass(frozen=True)
class Instance:
    """An auction instance: values (good mode) or costs (chore mode).

    One table is stored; the dual table is its entrywise reciprocal,
    realizing the v*c = 1 normalization.
    """

    n: int
    k: int
    mode: str
    table: tuple[tuple[Rat, ...], ...]

    def __post_init__(self):
        if self.mode not in (GOOD, CHORE):
            raise ValueError(f"mode must be good or chore, not {self.mode!r}")
        _check_table(self.n, self.k, self.table, positive=True)

    def values(self, agent: int, p: int) -> Rat:
        v = self.table[agent][p]
        return v if self.mode == GOOD else ONE / v

    def costs(self, agent: int, p: int) -> Rat:
        v = self.table[agent][p]
        return ONE / v if self.mode == GOOD else v

    @property
    def num_profiles(self) -> int:
        return self.k**self.n


@dataclass(frozen=True)
class Ratios:
    """Normalized performance ratios: every entry in (0, 1], per-profile max 1."""

    n: int
    k: int
    rho: tuple[tuple[Rat, ...], ...]

    def __post_init__(self):
        _check_table(self.n, self.k, self.rho, positive=True)
        for p in range(self.k**self.n):
            best = max(self.rho[i][p] for i in range(self.n))
            if best != 1:
                raise ValueError(f"profile {p}: max ratio is {best}, expected 1")
            if any(self.rho[i][p] > 1 for i in range(self.n)):
                raise ValueError(f"profile {p}: ratio above 1")

    @property
    def num_profiles(self) -> int:
        return self.k**self.n


@dataclass(frozen=True)
class LineOrdering:
    """Per-line weak orders: maximal equal-value blocks, sorted by preference.

    ``blocks[(agent, base)]`` lists blocks of 1-based signals; earlier blocks
    must receive at most the allocation of later ones.  ``block_of[agent][p]``
    is the block position of profile p within its line.
    """

    n: int
    k: int
    blocks: dict
    block_of: tuple[tuple[int, ...], ...]

    def line_blocks(self, agent: int, p: int) -> tuple[tuple[int, ...], ...]:
        step = self.k**agent
        base = p - ((p // step) % self.k) * step
        return self.blocks[(agent, base)]

    def precedes(self, agent: int, p: int, q: int) -> bool:
        """True iff (s_p, s_q) is in sigma for `agent` (p, q on one line)."""
        return self.block_of[agent][p] < self.block_of[agent][q]

    def constrained(self, agent: int, p: int) -> bool:
        """True iff some signal strictly succeeds p's on its line."""
        step = self.k**agent
        base = p - ((p // step) % self.k) * step
        return self.block_of[agent][p] < len(self.blocks[(agent, base)]) - 1


@dataclass(frozen=True)
class AllocationRule:
    """Selection probabilities x[agent][profile]; rows sum to 1 per profile."""

    n: int
    k: int
    x: tuple[tuple[Rat, ...], ...]

    def __post_init__(self):
        _check_table(self.n, self.k, self.x, positive=False)
        for p in range(self.k**self.n):
            total = sum(self.x[i][p] for i in range(self.n))
            if total != 1:
                raise ValueError(f"profile {p}: allocation sums to {total}")
            if any(self.x[i][p] < 0 or self.x[i][p] > 1 for i in range(self.n)):
                raise ValueError(f"profile {p}: entry outside [0, 1]")

    @property
    def deterministic(self) -> bool:
        return all(v == 0 or v == 1 for row in self.x for v in row)

    def winner(self, p: int) -> int:
        """The selected agent at a deterministic profile."""
        for i in range(self.n):
            if self.x[i][p] == 1:
                return i
        raise ValueError(f"profile {p} has no deterministic winner")


def rule_from_winners(winners: Sequence[int], n: int, k: int) -> AllocationRule:
    x = [[ZERO] * (k**n) for _ in range(n)]
    for p, w in enumerate(winners):
        x[w][p] = ONE
    return AllocationRule(n, k, tuple(tuple(row) for row in x))


def uniform_rule(n: int, k: int) -> AllocationRule:
    share = ONE / n
    row = (share,) * (k**n)
    return AllocationRule(n, k, tuple(row for _ in range(n)))


def ratios_from_values(inst: Instance) -> Ratios:
    """Normalize to performance ratios: value over max (good), min cost over cost."""
    n, k = inst.n, inst.k
    rho = [[ZERO] * inst.num_profiles for _ in range(n)]
    for p in range(inst.num_profiles):
        if inst.mode == GOOD:
            best = max(inst.table[i][p] for i in range(n))
            for i in range(n):
                rho[i][p] = inst.table[i][p] / best
        else:
            best = min(inst.table[i][p] for i in range(n))
            for i in range(n):
                rho[i][p] = best / inst.table[i][p]
    return Ratios(n, k, tuple(tuple(r) for r in rho))


def orderings_from_instance(inst: Instance) -> LineOrdering:
    """Sort each line by preference and merge ties into blocks.

    Good mode sorts values ascending; chore mode sorts costs descending.
    Either way the first block is the least preferred.
    """
    n, k = inst.n, inst.k
    blocks = {}
    block_of = [[0] * inst.num_profiles for _ in range(n)]
    for i in range(n):
        for base in line_bases(i, n, k):
            step = k**i
            profs = [base + t * step for t in range(k)]
            keyed = sorted(
                range(1, k + 1),
                key=lambda s: inst.values(i, profs[s - 1]),
            )
            blks: list[list[int]] = []
            prev = None
            for s in keyed:
                v = inst.values(i, profs[s - 1])
                if prev is not None and v == prev:
                    blks[-1].append(s)
                else:
                    blks.append([s])
                prev = v
            blocks[(i, base)] = tuple(tuple(b) for b in blks)
            for j, b in enumerate(blks):
                for s in b:
                    block_of[i][base + (s - 1) * step] = j
    return LineOrdering(n, k, blocks, tuple(tuple(r) for r in block_of))


def total_increasing_ordering(n: int, k: int) -> LineOrdering:
    """The ordering of any strictly increasing instance: singleton blocks 1<2<...<k."""
    blocks = {}
    block_of = [[0] * (k**n) for _ in range(n)]
    singletons = tuple((s,) for s in range(1, k + 1))
    for i in range(n):
        step = k**i
        for base in line_bases(i, n, k):
            blocks[(i, base)] = singletons
        for p in range(k**n):
            block_of[i][p] = (p // step) % k
    return LineOrdering(n, k, blocks, tuple(tuple(r) for r in block_of))


def profile_weight(p: int, n: int, k: int) -> int:
    """l = sum of 1-based signals of the profile."""
    return sum(profile_vector(p, n, k))


def values_from_ratios(rho: Ratios, mode: str) -> Instance:
    """Realize ratios with strictly monotone values (or costs).

    Good mode sets v_i(s) = rho_i(s) / (r*/2)**l with l the signal sum and
    r* the global minimum ratio; chore mode uses the reciprocal table.  The
    output's per-line growth factor is at least 2, so lines are strictly
    monotone and `ratios_from_values` round-trips exactly.
    """
    n, k = rho.n, rho.k
    r_star = min(v for row in rho.rho for v in row)
    base = r_star / 2
    powers = [ONE]
    for _ in range(n * k):
        powers.append(powers[-1] * base)
    table = []
    for i in range(n):
        row = []
        for p in range(rho.num_profiles):
            ell = profile_weight(p, n, k)
            if mode == GOOD:
                row.append(rho.rho[i][p] / powers[ell])
            else:
                row.append(powers[ell] / rho.rho[i][p])
        table.append(tuple(row))
    return Instance(n, k, mode, tuple(table))


def sos_threshold(n: int, k: int) -> Rat:
    return ONE - rat(1, (n * k) ** 2 + 1)


def sos_values_from_ratios(rho: Ratios, mode: str) -> Instance:
    """Realize near-one ratios with monotone values that are also submodular
    over signals: v_i(s) = rho_i(s) * (l*(2nk - l) + 1), l the signal sum.

    Requires every ratio at least 1 - 1/((nk)^2 + 1).
    """
    n, k = rho.n, rho.k
    r_star = min(v for row in rho.rho for v in row)
    thresh = sos_threshold(n, k)
    if r_star < thresh:
        raise PreconditionViolation(
            f"minimum ratio {r_star} below SOS construction threshold {thresh}",
            certificate={"r_star": r_star, "threshold": thresh},
        )
    table = []
    for i in range(n):
        row = []
        for p in range(rho.num_profiles):
            ell = profile_weight(p, n, k)
            scale = Rat(ell * (2 * n * k - ell) + 1)
            v = rho.rho[i][p] * scale
            row.append(v if mode == GOOD else ONE / v)
        table.append(tuple(row))
    return Instance(n, k, mode, tuple(table))


def eval_ratio(rho: Ratios, x: AllocationRule, objective: str) -> Rat:
    """Worst-profile approximation ratio of an allocation.

    value: max_s 1 / <x(s), rho(s)>;  cost: max_s <x(s), 1/rho(s)>.
    """
    if objective not in ("value", "cost"):
        raise ValueError(f"objective must be value or cost, not {objective!r}")
    n = rho.n
    worst = None
    for p in range(rho.num_profiles):
        if objective == "value":
            got = ONE / sum(x.x[i][p] * rho.rho[i][p] for i in range(n))
        else:
            got = sum(x.x[i][p] / rho.rho[i][p] for i in range(n))
        if worst is None or got > worst:
            worst = got
    return worst


@dataclass(frozen=True)
class TruthfulnessReport:
    ok: bool
    violation: Optional[tuple[int, int, int, int]] = None  # agent, base, s, s'

    def __bool__(self) -> bool:
        return self.ok


def is_truthful(x: AllocationRule, ord: LineOrdering) -> TruthfulnessReport:
    """Check monotonicity of x along every line of the ordering.

    Returns the first violating (agent, line base, low signal, high signal)
    in canonical order when the rule is not implementable.
    """
    n, k = ord.n, ord.k
    for i in range(n):
        step = k**i
        for base in line_bases(i, n, k):
            blks = ord.blocks[(i, base)]
            for bi in range(len(blks)):
                for bj in range(bi + 1, len(blks)):
                    for s in blks[bi]:
                        xv = x.x[i][base + (s - 1) * step]
                        for t in blks[bj]:
                            if xv > x.x[i][base + (t - 1) * step]:
                                return TruthfulnessReport(False, (i, base, s, t))
    return TruthfulnessReport(True)


def is_monotone_instance(inst: Instance) -> bool:
    """Weakly increasing values (good) / weakly decreasing costs (chore),
    in every agent's table along every coordinate."""
    n, k = inst.n, inst.k
    for i in range(n):
        for j in range(n):
            step = k**j
            for base in line_bases(j, n, k):
                prev = None
                for t in range(k):
                    v = inst.values(i, base + t * step)
                    if prev is not None and v < prev:
                        return False
                    prev = v
    return True


def is_strictly_monotone_instance(inst: Instance) -> bool:
    n, k = inst.n, inst.k
    for i in range(n):
        for j in range(n):
            step = k**j
            for base in line_bases(j, n, k):
                prev = None
                for t in range(k):
                    v = inst.values(i, base + t * step)
                    if prev is not None and v <= prev:
                        return False
                    prev = v
    return True


def check_sos(inst: Instance) -> bool:
    """Exhaustive submodularity-over-signals check (desk scale only).

    For every agent i, coordinate j, step (s_j, s_j + d) and component-wise
    comparable pair of contexts, the marginal gain of raising s_j must not
    increase with the context (good mode; the cost variant mirrors it).
    """
    n, k = inst.n, inst.k
    sign = 1 if inst.mode == GOOD else -1
    for j in range(n):
        step = k**j
        bases = list(line_bases(j, n, k))
        for i in range(n):
            for lo in range(k - 1):
                for d in range(1, k - lo):
                    for a_idx, ba in enumerate(bases):
                        va = profile_vector(ba, n, k)
                        for bb in bases[a_idx:]:
                            vb = profile_vector(bb, n, k)
                            cmp_ok = all(
                                va[t] <= vb[t] for t in range(n) if t != j
                            )
                            if not cmp_ok or ba == bb:
                                continue
                            ga = sign * (
                                inst.table[i][ba + (lo + d) * step]
                                - inst.table[i][ba + lo * step]
                            )
                            gb = sign * (
                                inst.table[i][bb + (lo + d) * step]
                                - inst.table[i][bb + lo * step]
                            )
                            if ga < gb:
                                return False
    return True


def candidate_gammas(rho: Ratios) -> list[Rat]:
    """Sorted candidate optimal ratios: {1} and all 1/rho_i(s)."""
    cands = {ONE}
    for row in rho.rho:
        for v in row:
            cands.add(ONE / v)
    return sorted(cands)
