"""Per-step machinery: randomness tapes, component decomposition, rejection
sampling, the safe distribution, the exact component marginal, and the single
monotone coupled update.

The update is a coupling: one shared uniform deviate per step selects either a
value from the safe lower envelope (same value for every bounded chain) or a
value from the residual layer, whose sub-blocks are sized by the exact
component marginal.  The residual layer is only entered, and the component
only computed, when the deviate lands past the safe mass.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import struct
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .core import (STAR, AtomicConstraint, AtomicCsp, PartialAssignment,
                   ProjectedCsp, falsifiable_under)
from .errors import BudgetError, ConditionsError, InvariantError

# Stream labels.
LABEL_LAYERED = 0      # one deviate per chain step
LABEL_REJECTION = 1    # rejection sampling attempts
LABEL_MARKING = 2      # marking construction randomness
LABEL_TENSOR = 3       # tensorization randomness

#: Sentinel time base used to key FinalSampling streams by variable id.
FINAL_TIME_BASE = 1 << 40

_TIME_OFFSET = 1 << 62

DEFAULT_REJECTION_CAP = 10**7
DEFAULT_TERM_BUDGET = 2**24

#: Slack for floating point comparisons of probabilities.
_PROB_TOL = 1e-9


def derive_seed(master_seed: int, *parts) -> int:
    """Derive an independent 64-bit sub-seed from a master seed and labels."""
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack("<Q", master_seed & (2**64 - 1)))
    for p in parts:
        if isinstance(p, str):
            h.update(b"s" + p.encode())
        else:
            h.update(b"i" + struct.pack("<q", int(p)))
    return int.from_bytes(h.digest(), "little")


class RandomnessTape:
    """Deterministic, replayable uniform deviates addressed by
    (master_seed, time, label, counter).

    Identical addresses give identical values across runs and platforms;
    distinct addresses are computationally independent (Philox in counter
    mode).  Chain steps (label 0) sit at consecutive counter positions so a
    whole horizon's deviates can be drawn in one vectorized call and stay
    identical when the horizon doubles.
    """

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed) & (2**64 - 1)

    def _generator(self, label: int, position: int) -> Generator:
        bg = Philox(key=np.array([self.master_seed, label], dtype=np.uint64))
        bg.advance(position)
        return Generator(bg)

    def uniform(self, t: int, label: int, counter: int = 0) -> float:
        """One deviate in [0, 1) at the given address."""
        if label == LABEL_LAYERED:
            pos = t + _TIME_OFFSET
        else:
            pos = ((t + _TIME_OFFSET) << 80) + counter
        return float(self._generator(label, pos).random())

    def layered_block(self, t_start: int, t_stop: int) -> np.ndarray:
        """The label-0 deviates for t in [t_start, t_stop), batched.

        One counter position yields four 64-bit outputs, so the per-time
        deviate is every fourth draw; this keeps the batch identical to
        pointwise ``uniform(t, 0)`` calls.
        """
        g = self._generator(LABEL_LAYERED, t_start + _TIME_OFFSET)
        return g.random(4 * (t_stop - t_start))[::4].copy()

    def stream(self, t: int, label: int) -> "TapeStream":
        return TapeStream(self, t, label)


class TapeStream:
    """Sequential draws at one (t, label) address, counter auto-incremented."""

    def __init__(self, tape: RandomnessTape, t: int, label: int):
        self._tape = tape
        self._t = t
        self._label = label
        self.counter = 0
        self._buf = None
        self._buf_pos = 0

    def next_uniform(self) -> float:
        # Buffer draws in blocks; positions stay the absolute counter values.
        if self._buf is None or self._buf_pos >= len(self._buf):
            pos = ((self._t + _TIME_OFFSET) << 80) + self.counter
            g = self._tape._generator(self._label, pos)
            self._buf = g.random(64)
            self._buf_pos = 0
            self.counter += 64
        u = float(self._buf[self._buf_pos])
        self._buf_pos += 1
        return u

    def choice(self, cum_weights) -> int:
        """Index drawn according to a cumulative weight list ending at ~1."""
        u = self.next_uniform()
        i = bisect_right(cum_weights, u)
        return min(i, len(cum_weights) - 1)


def draw_uniform(tape: RandomnessTape, t: int, label: int, counter: int = 0) -> float:
    """Functional form of :meth:`RandomnessTape.uniform`."""
    return tape.uniform(t, label, counter)


@dataclass(frozen=True)
class ComponentResult:
    """The falsifiable neighborhood grown from a focal variable.

    ``token`` is False as soon as a reachable falsifiable constraint touches a
    marked STAR variable other than the focal one; True means the component's
    conditional law factorizes away from the rest of the instance.
    """

    component_vars: tuple[int, ...]
    component_constraints: tuple[int, ...]
    token: bool
    projected: tuple[AtomicConstraint, ...]  # restricted to STAR variables


def component(csp: AtomicCsp, marked, sigma: PartialAssignment,
              u: int) -> ComponentResult:
    """Grow the component of u through falsifiable projected constraints.

    ``marked`` is a per-variable boolean sequence.  Requires sigma(u) = STAR.
    """
    vals = sigma.values
    if vals[u] is not STAR:
        raise InvariantError("component() requires the focal variable be STAR")
    in_comp = {u}
    queue = deque([u])
    cons_ids: list[int] = []
    projected: list[AtomicConstraint] = []
    seen_cons = set()
    while queue:
        v = queue.popleft()
        for ci in csp.var_constraints[v]:
            if ci in seen_cons:
                continue
            seen_cons.add(ci)
            c = csp.constraints[ci]
            if not falsifiable_under(c, sigma):
                continue
            stars = tuple(w for w in c.vbl if vals[w] is STAR)
            for w in stars:
                if w != u and marked[w]:
                    return ComponentResult(
                        tuple(sorted(in_comp)), tuple(cons_ids), False, ())
            cons_ids.append(ci)
            projected.append(AtomicConstraint(
                stars, tuple(q for w, q in zip(c.vbl, c.falsifying)
                             if vals[w] is STAR)))
            for w in stars:
                if w not in in_comp:
                    in_comp.add(w)
                    queue.append(w)
    return ComponentResult(tuple(sorted(in_comp)), tuple(cons_ids), True,
                           tuple(projected))


def rejection_sampling(projected: ProjectedCsp, stream: TapeStream,
                       cap: int = DEFAULT_REJECTION_CAP):
    """Repeatedly draw the free variables from their product law until the
    draw satisfies every projected constraint.

    Returns (values_by_free_var: dict, attempts).
    """
    specs = [projected.parent.vars[v] for v in projected.free_vars]
    cums = [list(itertools.accumulate(s.weights)) for s in specs]
    index = {v: i for i, v in enumerate(projected.free_vars)}
    cons = [(tuple(index[v] for v in c.vbl), c.falsifying)
            for c in projected.constraints]
    for attempt in range(1, cap + 1):
        draw = [stream.choice(cw) for cw in cums]
        ok = True
        for vbl, fals in cons:
            if all(draw[i] == q for i, q in zip(vbl, fals)):
                ok = False
                break
        if ok:
            return ({v: draw[index[v]] for v in projected.free_vars}, attempt)
    raise BudgetError(
        f"rejection sampling exceeded {cap} attempts; instance is likely "
        "outside the sampler's regime")


@dataclass(frozen=True)
class SafePmf:
    """The safe lower envelope D*(q) = max(0, 1 - beta*(1 - D(q))) with the
    residual mass on STAR."""

    probs: tuple[float, ...]
    star: float


def safe_pmf(csp: AtomicCsp, marked, u: int, log_beta: float = None) -> SafePmf:
    """The safe distribution of a marked variable.  ``log_beta`` may be
    passed to avoid recomputing the marking constants."""
    if log_beta is None:
        from .marking import Marking, compute_constants
        log_beta = compute_constants(csp, Marking(tuple(marked))).log_beta
    beta = math.exp(log_beta)
    probs = tuple(max(0.0, 1.0 - beta * (1.0 - w)) for w in csp.vars[u].weights)
    star = 1.0 - sum(probs)
    if star < -_PROB_TOL:
        raise ConditionsError("safe pmf has negative residual mass")
    return SafePmf(probs, max(0.0, star))


@dataclass(frozen=True)
class ComponentMarginal:
    """Exact marginal of the focal variable under the component's
    conditional law."""

    probs: tuple[float, ...]


def _ie_marginal(csp, projected, focal, budget):
    """Inclusion-exclusion over constraint subsets with conflict pruning."""
    nq = csp.vars[focal].domain_size
    weights = csp.vars[focal].weights
    numer = [0.0] * nq
    cons = [tuple(zip(c.vbl, c.falsifying)) for c in projected]
    terms = 0

    assign: dict[int, int] = {}

    def visit(start, sign, weight):
        nonlocal terms
        terms += 1
        if terms > budget:
            raise BudgetError("inclusion-exclusion term budget exceeded")
        if focal in assign:
            numer[assign[focal]] += sign * weight
        else:
            for q in range(nq):
                numer[q] += sign * weight * weights[q]
        for j in range(start, len(cons)):
            added = []
            w = weight
            ok = True
            for v, q in cons[j]:
                if v in assign:
                    if assign[v] != q:
                        ok = False
                        break
                else:
                    assign[v] = q
                    added.append(v)
                    w *= csp.vars[v].weights[q]
            if ok:
                visit(j + 1, -sign, w)
            for v in added:
                del assign[v]

    visit(0, 1.0, 1.0)
    return numer


def _enum_marginal(csp, comp_vars, projected, focal, budget):
    nq = csp.vars[focal].domain_size
    numer = [0.0] * nq
    domains = [range(csp.vars[v].domain_size) for v in comp_vars]
    total = 1
    for d in domains:
        total *= len(d)
    if total > budget:
        raise BudgetError("enumeration budget exceeded")
    index = {v: i for i, v in enumerate(comp_vars)}
    cons = [(tuple(index[v] for v in c.vbl), c.falsifying) for c in projected]
    fi = index[focal]
    for draw in itertools.product(*domains):
        ok = True
        for vbl, fals in cons:
            if all(draw[i] == q for i, q in zip(vbl, fals)):
                ok = False
                break
        if not ok:
            continue
        w = 1.0
        for v, q in zip(comp_vars, draw):
            w *= csp.vars[v].weights[q]
        numer[draw[fi]] += w
    return numer


def exact_component_marginal(csp: AtomicCsp, comp: ComponentResult, focal: int,
                             budget: int = DEFAULT_TERM_BUDGET) -> ComponentMarginal:
    """Pr[focal = q] under the component's conditional law, computed exactly.

    Chooses inclusion-exclusion over constraint subsets or exhaustive
    enumeration over the component's state space, whichever is predicted
    cheaper; errors out if both exceed the term budget.
    """
    if not comp.token:
        raise InvariantError("component marginal requires token = True")
    if focal not in comp.component_vars:
        raise InvariantError("focal variable not in component")
    if not comp.projected:
        return ComponentMarginal(csp.vars[focal].weights)
    ie_cost = 2 ** len(comp.projected)
    enum_cost = 1
    for v in comp.component_vars:
        enum_cost *= csp.vars[v].domain_size
        if enum_cost > 4 * DEFAULT_TERM_BUDGET:
            break
    if min(ie_cost, enum_cost) > budget:
        raise BudgetError(
            f"component too large: 2^{len(comp.projected)} subsets vs "
            f"{enum_cost} states exceed the budget of {budget} terms")
    if ie_cost <= enum_cost:
        numer = _ie_marginal(csp, comp.projected, focal, budget)
    else:
        numer = _enum_marginal(csp, comp.component_vars, comp.projected,
                               focal, budget)
    denom = sum(numer)
    if denom <= 0.0:
        raise InvariantError("component has no satisfying assignment")
    probs = tuple(max(0.0, x) / denom for x in numer)
    return ComponentMarginal(probs)


class UpdateContext:
    """Precomputed per-variable data for the coupled update.

    Building one of these requires beta to be defined whenever any variable is
    marked (e*alpha <= 1).
    """

    def __init__(self, csp: AtomicCsp, marked, budget: int = DEFAULT_TERM_BUDGET):
        from .marking import Marking, compute_constants
        self.csp = csp
        self.marked = tuple(bool(x) for x in marked)
        self.n = csp.num_vars
        self.budget = budget
        self.safe_cum: list = [None] * self.n
        self.safe_probs: list = [None] * self.n
        self.safe_total: list = [None] * self.n
        if any(self.marked):
            consts = compute_constants(csp, Marking(self.marked))
            if consts.log_beta is None:
                raise ConditionsError(
                    "e*alpha > 1: beta undefined, chain cannot run")
            for v in range(self.n):
                if self.marked[v]:
                    sp = safe_pmf(csp, self.marked, v, consts.log_beta)
                    self.safe_probs[v] = sp.probs
                    self.safe_cum[v] = list(itertools.accumulate(sp.probs))
                    self.safe_total[v] = 1.0 - sp.star


def _update_in_place(ctx: UpdateContext, values: list, t: int, u0: float,
                     stats=None) -> None:
    """One bounding-chain / scan step at time t on a mutable value list."""
    v = t % ctx.n
    if not ctx.marked[v]:
        return
    values[v] = STAR
    cum = ctx.safe_cum[v]
    if u0 < ctx.safe_total[v]:
        # Shared safe layer: the outcome is the same for every bounded chain,
        # no component computation needed.
        values[v] = min(bisect_right(cum, u0), len(cum) - 1)
        return
    comp = component(ctx.csp, ctx.marked, PartialAssignment(values), v)
    if stats is not None:
        stats.append(len(comp.component_vars))
    if not comp.token:
        values[v] = STAR
        return
    dagger = exact_component_marginal(ctx.csp, comp, v, ctx.budget).probs
    safe = ctx.safe_probs[v]
    for q in range(len(safe)):
        if dagger[q] < safe[q] - _PROB_TOL:
            raise InvariantError(
                "component marginal fell below the safe envelope; the "
                "instance is outside the coupling's valid regime")
    # Residual layer: sub-blocks of length dagger(q) - safe(q) in ascending
    # value order fill the STAR region exactly.
    x = u0 - ctx.safe_total[v]
    q = 0
    while q < len(safe) - 1:
        block = dagger[q] - safe[q]
        if x < block:
            break
        x -= block
        q += 1
    values[v] = q


def coupled_update(csp: AtomicCsp, marked, state: PartialAssignment, t: int,
                   tape: RandomnessTape,
                   ctx: UpdateContext = None) -> PartialAssignment:
    """One monotone coupled step: returns the updated partial assignment.

    Unmarked time slots are no-ops.  The randomness consumed is exactly the
    one layered deviate at address (t, label 0, 0), so runs over the same tape
    couple pointwise.
    """
    if ctx is None:
        ctx = UpdateContext(csp, marked)
    out = state.copy()
    u0 = tape.uniform(t, LABEL_LAYERED, 0)
    _update_in_place(ctx, out.values, t, u0)
    return out
