"""Ground-truth oracles and statistical certification: exhaustive enumeration
of the solution law, TV distance, end-to-end sampler certification, the
coalescence-tail experiment, and the bounded-by invariant checker.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from scipy import stats

from .core import (STAR, AtomicCsp, PartialAssignment, all_assignments)
from .errors import BudgetError, UnsatisfiableInstanceError
from .kernels import RandomnessTape, UpdateContext, _update_in_place, derive_seed
from .marking import Marking
from .sampler import bounding_chain, sample

DEFAULT_ENUM_BUDGET = 2**24


@dataclass(frozen=True)
class ExactLaw:
    """The exact solution distribution: support and normalized product-law
    probabilities."""

    support: tuple[tuple[int, ...], ...]
    pmf: tuple[float, ...]

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.pmf))

    def restricted(self, indices) -> "ExactLaw":
        """The law of the coordinates in ``indices`` (e.g. the marked set)."""
        agg: dict = {}
        for outcome, p in zip(self.support, self.pmf):
            key = tuple(outcome[i] for i in indices)
            agg[key] = agg.get(key, 0.0) + p
        items = sorted(agg.items())
        return ExactLaw(tuple(k for k, _ in items), tuple(p for _, p in items))


def enumerate_law(csp: AtomicCsp, budget: int = DEFAULT_ENUM_BUDGET) -> ExactLaw:
    """Exhaustive product-order enumeration of all satisfying assignments."""
    total = 1
    for s in csp.vars:
        total *= s.domain_size
        if total > budget:
            raise BudgetError(f"state space exceeds the budget of {budget}")
    support = []
    weights = []
    for outcome in all_assignments(csp):
        if not csp.satisfies(list(outcome)):
            continue
        w = 1.0
        for v, q in enumerate(outcome):
            w *= csp.vars[v].weights[q]
        support.append(outcome)
        weights.append(w)
    if not support:
        raise UnsatisfiableInstanceError("instance has no solutions")
    z = math.fsum(weights)
    return ExactLaw(tuple(support), tuple(w / z for w in weights))


def enumerate_law_recursive(csp: AtomicCsp,
                            budget: int = DEFAULT_ENUM_BUDGET) -> ExactLaw:
    """Independent oracle for enumerate_law: depth-first assignment with
    constraint checks as soon as a constraint is fully assigned."""
    n = csp.num_vars
    # constraints that become checkable once variable v is assigned (v is
    # their largest index)
    by_last = [[] for _ in range(n)]
    for c in csp.constraints:
        by_last[max(c.vbl)].append(c)
    support = []
    weights = []
    values = [0] * n
    count = 0

    def rec(v, w):
        nonlocal count
        if v == n:
            support.append(tuple(values))
            weights.append(w)
            return
        count += 1
        if count > budget:
            raise BudgetError(f"state space exceeds the budget of {budget}")
        for q in range(csp.vars[v].domain_size):
            values[v] = q
            bad = False
            for c in by_last[v]:
                if all(values[u] == fq for u, fq in zip(c.vbl, c.falsifying)):
                    bad = True
                    break
            if not bad:
                rec(v + 1, w * csp.vars[v].weights[q])

    rec(0, 1.0)
    if not support:
        raise UnsatisfiableInstanceError("instance has no solutions")
    z = math.fsum(weights)
    return ExactLaw(tuple(support), tuple(x / z for x in weights))


def tv_distance(p: dict, q: dict) -> float:
    """(1/2) sum |p - q| over the union of both supports."""
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def certify_sampler(csp: AtomicCsp, m: Marking, num_samples: int, seed: int,
                    check_conditions: bool = True,
                    law: ExactLaw = None) -> dict:
    """Draw num_samples end-to-end samples and compare against the enumerated
    law: TV distance, chi-square p-value, max per-outcome z-score and max
    marginal gap."""
    if law is None:
        law = enumerate_law(csp)
    ctx = UpdateContext(csp, m.marked)
    counts: dict = {}
    for i in range(num_samples):
        rec = sample(csp, m, derive_seed(seed, "certify", i), ctx=ctx,
                     check_conditions=check_conditions)
        key = tuple(rec.assignment)
        counts[key] = counts.get(key, 0) + 1
    exact = law.as_dict()
    empirical = {k: c / num_samples for k, c in counts.items()}
    tv = tv_distance(empirical, exact)
    observed = [counts.get(k, 0) for k in law.support]
    expected = [p * num_samples for p in law.pmf]
    stray = sum(c for k, c in counts.items() if k not in exact)
    chi_p = (0.0 if stray
             else float(stats.chisquare(observed, expected).pvalue))
    max_z = max(
        abs(o - e) / math.sqrt(e * (1.0 - e / num_samples))
        for o, e in zip(observed, expected))
    max_marginal_gap = 0.0
    for v, spec in enumerate(csp.vars):
        for q in range(spec.domain_size):
            emp = sum(p for k, p in empirical.items() if k[v] == q)
            exa = sum(p for k, p in exact.items() if k[v] == q)
            max_marginal_gap = max(max_marginal_gap, abs(emp - exa))
    return {
        "num_samples": num_samples,
        "tv_distance": tv,
        "chi_square_p": chi_p,
        "max_z_score": max_z,
        "max_marginal_gap": max_marginal_gap,
        "samples_outside_support": stray,
    }


def coalescence_experiment(csp: AtomicCsp, m: Marking, horizons, trials: int,
                           seed: int) -> list[dict]:
    """Per horizon T: the fraction of independent chains with a surviving
    STAR on the marked set, against the 4|V|*2^(-T/|V|) tail bound."""
    n = csp.num_vars
    ctx = UpdateContext(csp, m.marked)
    rows = []
    for horizon in horizons:
        failures = 0
        for trial in range(trials):
            run = bounding_chain(csp, m, horizon,
                                 derive_seed(seed, "coalescence", trial), ctx)
            if not run.coalesced:
                failures += 1
        bound = min(1.0, 4.0 * n * 2.0 ** (-horizon / n))
        rows.append({
            "horizon": horizon,
            "trials": trials,
            "non_coalesced_fraction": failures / trials,
            "tail_bound": bound,
            "bound_applies": horizon >= 2 * n - 1,
        })
    return rows


def check_bounding_invariant(csp: AtomicCsp, m: Marking, T: int, trials: int,
                             seed: int, law: ExactLaw = None) -> dict:
    """Run the real chain (started from a random exact solution's marked
    projection) and the bounding chain (all-STAR) over the same tape and
    horizon; the real state must refine the bounding state at every step, and
    the marked states must agree whenever the bounding chain coalesces."""
    if law is None:
        law = enumerate_law(csp)
    n = csp.num_vars
    ctx = UpdateContext(csp, m.marked)
    containment_violations = 0
    equality_failures = 0
    coalesced_count = 0
    rng = random.Random(derive_seed(seed, "start-states"))
    starts = rng.choices(law.support, weights=law.pmf, k=trials)
    for trial in range(trials):
        solution = starts[trial]
        real = [solution[v] if m.marked[v] else STAR for v in range(n)]
        bound = [STAR] * n
        tape = RandomnessTape(derive_seed(seed, "invariant", trial))
        u0s = tape.layered_block(-T, 0)
        ok = True
        for i in range(T):
            t = i - T
            u0 = float(u0s[i])
            _update_in_place(ctx, real, t, u0)
            _update_in_place(ctx, bound, t, u0)
            for v in range(n):
                if bound[v] is not STAR and bound[v] != real[v]:
                    ok = False
            if real[v := (t % n)] is STAR and m.marked[v]:
                ok = False  # the real chain must stay STAR-free on the marking
        if not ok:
            containment_violations += 1
        if all(bound[v] is not STAR for v in range(n) if m.marked[v]):
            coalesced_count += 1
            if any(bound[v] != real[v] for v in range(n) if m.marked[v]):
                equality_failures += 1
    return {
        "trials": trials,
        "horizon": T,
        "containment_violations": containment_violations,
        "coalesced": coalesced_count,
        "equality_failures": equality_failures,
    }


def law_of_projection(csp: AtomicCsp, m: Marking,
                      law: ExactLaw = None) -> ExactLaw:
    """The exact law of the marked coordinates (the bounding chain's target)."""
    if law is None:
        law = enumerate_law(csp)
    return law.restricted(m.indices())


def assignment_in(values, state: PartialAssignment) -> bool:
    """True iff the concrete assignment refines the STAR state."""
    return all(b is STAR or b == a for a, b in zip(values, state.values))
