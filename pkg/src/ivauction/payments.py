"""EPIC payment synthesis and exhaustive incentive verification.

A monotone allocation rule is made truthful by charging, on every line,
marginal prices along a total order that refines the line's weak order and
is monotone in the allocation.  The order used here breaks ties by
(allocation value, block position, signal value), which is one valid choice
among many; payments are canonical to this package, not unique.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ._rat import ONE, Rat, ZERO
from .core import (
    GOOD,
    AllocationRule,
    Instance,
    LineOrdering,
    is_truthful,
    line_bases,
    orderings_from_instance,
)
from .errors import NotMonotone


@dataclass(frozen=True)
class PaymentRule:
    """p[agent][bid profile] >= 0, canonical profile order."""

    n: int
    k: int
    p: tuple[tuple[Rat, ...], ...]

    def __post_init__(self):
        for row in self.p:
            if any(v < 0 for v in row):
                raise ValueError("payments must be non-negative")


@dataclass(frozen=True)
class IncentiveReport:
    ok: bool
    # (kind, profile index, agent, deviating bid) for the first failure
    violation: Optional[tuple[str, int, int, int]] = None

    def __bool__(self) -> bool:
        return self.ok


def _tau_order(x_line, blocks) -> list[int]:
    """Total order (list of signals, ascending) refining the block order and
    monotone w.r.t. the allocation values ``x_line[signal]``."""
    pos = {}
    for j, blk in enumerate(blocks):
        for s in blk:
            pos[s] = j
    return sorted(pos, key=lambda s: (x_line[s], pos[s], s))


def synthesize_payments(inst: Instance, x: AllocationRule) -> PaymentRule:
    """Marginal-price payments making a monotone rule truthful (IC and IR).

    Raises NotMonotone when the rule fails the line monotonicity check.
    """
    ord = orderings_from_instance(inst)
    check = is_truthful(x, ord)
    if not check:
        raise NotMonotone(
            f"allocation violates monotonicity at {check.violation}",
            violation=check.violation,
        )
    n, k = inst.n, inst.k
    pay = [[ZERO] * inst.num_profiles for _ in range(n)]
    for i in range(n):
        step = k**i
        for base in line_bases(i, n, k):
            profs = {s: base + (s - 1) * step for s in range(1, k + 1)}
            x_line = {s: x.x[i][profs[s]] for s in profs}
            tau = _tau_order(x_line, ord.blocks[(i, base)])
            acc = ZERO
            prev_x = ZERO
            for s in tau:
                delta = x_line[s] - prev_x
                weight = (
                    inst.values(i, profs[s])
                    if inst.mode == GOOD
                    else inst.costs(i, profs[s])
                )
                acc += delta * weight
                pay[i][profs[s]] = acc
                prev_x = x_line[s]
    return PaymentRule(n, k, tuple(tuple(row) for row in pay))


def delta_allocation(inst: Instance, x: AllocationRule):
    """Per-line allocation increments along the tau order.

    Returns d such that x_i(s) equals the sum of d over the tau-prefix of s;
    exposed for the reconstruction identity test.
    """
    ord = orderings_from_instance(inst)
    n, k = inst.n, inst.k
    d = [[ZERO] * inst.num_profiles for _ in range(n)]
    for i in range(n):
        step = k**i
        for base in line_bases(i, n, k):
            profs = {s: base + (s - 1) * step for s in range(1, k + 1)}
            x_line = {s: x.x[i][profs[s]] for s in profs}
            tau = _tau_order(x_line, ord.blocks[(i, base)])
            prev_x = ZERO
            for s in tau:
                d[i][profs[s]] = x_line[s] - prev_x
                prev_x = x_line[s]
    return tuple(tuple(row) for row in d)


def utility(
    inst: Instance,
    x: AllocationRule,
    p: PaymentRule,
    agent: int,
    bid_profile: int,
    true_profile: int,
) -> Rat:
    """Quasi-linear utility of `agent` when the reported profile is
    `bid_profile` and the true one is `true_profile`."""
    if inst.mode == GOOD:
        return (
            x.x[agent][bid_profile] * inst.values(agent, true_profile)
            - p.p[agent][bid_profile]
        )
    return p.p[agent][bid_profile] - x.x[agent][bid_profile] * inst.costs(
        agent, true_profile
    )


def verify_ic_ir(inst: Instance, x: AllocationRule, p: PaymentRule) -> IncentiveReport:
    """Exhaustively check incentive compatibility and individual rationality.

    Every (true profile, agent, deviating bid) triple is evaluated; the first
    violated one is reported.
    """
    n, k = inst.n, inst.k
    for s_idx in range(inst.num_profiles):
        for i in range(n):
            truthful = utility(inst, x, p, i, s_idx, s_idx)
            if truthful < 0:
                return IncentiveReport(False, ("IR", s_idx, i, -1))
            step = k**i
            base = s_idx - ((s_idx // step) % k) * step
            for b in range(1, k + 1):
                dev = base + (b - 1) * step
                if dev == s_idx:
                    continue
                if utility(inst, x, p, i, dev, s_idx) > truthful:
                    return IncentiveReport(False, ("IC", s_idx, i, b))
    return IncentiveReport(True)
