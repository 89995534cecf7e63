"""Exact discrete information theory on small joint distributions.

Everything here works on dense probability tensors over at most 4
variables with alphabets of at most 8 symbols, so every quantity is an
exact finite sum (up to float64 rounding). The verify_* functions check
the identities the selection machinery leans on: the chain rule that
turns a set-MI difference into a conditional MI, diminishing returns
under conditional independence, and the log-sum-exp bounds that justify
max aggregation. 0 * log 0 = 0 throughout; all values are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError

MAX_VARIABLES = 4
MAX_ALPHABET = 8


@dataclass(frozen=True)
class DiscreteJoint:
    """Dense joint distribution; axis k of `probs` ranges over names[k]."""

    names: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "probs", probs)
        if len(self.names) != probs.ndim:
            raise ConfigError(
                f"{len(self.names)} names for a {probs.ndim}-axis tensor"
            )
        if len(set(self.names)) != len(self.names):
            raise ConfigError("variable names must be unique")
        if probs.ndim > MAX_VARIABLES:
            raise ConfigError(f"at most {MAX_VARIABLES} variables supported")
        if any(s > MAX_ALPHABET for s in probs.shape):
            raise ConfigError(f"alphabets cap at {MAX_ALPHABET} symbols")
        if np.any(probs < 0):
            raise ConfigError("probabilities must be non-negative")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise ConfigError(f"total mass is {probs.sum()!r}, not 1 within 1e-12")

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}; have {self.names}") from None


def _marginal(j: DiscreteJoint, group: Sequence[str]) -> np.ndarray:
    keep = {j.axis(name) for name in group}
    drop = tuple(ax for ax in range(j.probs.ndim) if ax not in keep)
    return j.probs.sum(axis=drop) if drop else j.probs


def _plogp(p: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask])))


def group_entropy(j: DiscreteJoint, group: Sequence[str]) -> float:
    """Joint Shannon entropy of a set of variables, in nats."""
    if not group:
        return 0.0
    return -_plogp(_marginal(j, group))


def entropy(j: DiscreteJoint, var: str) -> float:
    """H(X) = -sum p(x) log p(x)."""
    return group_entropy(j, [var])


def conditional_entropy(j: DiscreteJoint, x: str, y: str) -> float:
    """H(X|Y) = -sum p(x,y) log p(x|y), via the direct double sum."""
    pxy = _marginal(j, [x, y])  # axes ordered as in the tensor, not the call
    x_ax = 0 if j.axis(x) < j.axis(y) else 1
    py = pxy.sum(axis=x_ax, keepdims=True)
    mask = pxy > 0
    logratio = np.log(pxy, where=mask, out=np.zeros_like(pxy)) - np.log(
        py, where=py > 0, out=np.zeros_like(py)
    )
    return -float(np.sum(pxy[mask] * logratio[mask]))


def group_mutual_information(
    j: DiscreteJoint, a: Sequence[str], b: Sequence[str]
) -> float:
    """MI(A; B) = H(A) + H(B) - H(A u B) for disjoint variable groups."""
    if set(a) & set(b):
        raise ConfigError(f"groups overlap: {set(a) & set(b)}")
    return group_entropy(j, a) + group_entropy(j, b) - group_entropy(j, list(a) + list(b))


def mutual_information(j: DiscreteJoint, x: str, y: str) -> float:
    """MI(X;Y), computed two ways that must agree within 1e-12.

    The entropy route H(X) - H(X|Y) and the weighted-PMI double sum are
    the same quantity; computing both guards the implementation.
    """
    via_entropy = entropy(j, x) - conditional_entropy(j, x, y)
    pxy = _marginal(j, [x, y])
    first_ax = 0 if j.axis(x) < j.axis(y) else 1
    px = pxy.sum(axis=1 - first_ax, keepdims=True)
    py = pxy.sum(axis=first_ax, keepdims=True)
    mask = pxy > 0
    ratio = np.ones_like(pxy)
    np.divide(pxy, px * py, out=ratio, where=mask)
    via_pmi = float(np.sum(pxy[mask] * np.log(ratio[mask])))
    if abs(via_entropy - via_pmi) > 1e-12:
        raise AssertionError(
            f"MI double-computation mismatch: {via_entropy!r} vs {via_pmi!r}"
        )
    return via_pmi


def conditional_mi(j: DiscreteJoint, x: str, y: str, z: str) -> float:
    """MI(X;Y|Z) = H(X|Z) - H(X|Y,Z), grouped-entropy form."""
    if len({x, y, z}) != 3:
        raise ConfigError("conditional MI needs three distinct variables")
    h_xz = group_entropy(j, [x, z])
    h_z = group_entropy(j, [z])
    h_xyz = group_entropy(j, [x, y, z])
    h_yz = group_entropy(j, [y, z])
    return (h_xz - h_z) - (h_xyz - h_yz)


@dataclass(frozen=True)
class ChainRuleReport:
    passed: bool
    set_gain: float        # MI({vs, vi}; t) - MI(vs; t)
    conditional: float     # MI(vi; t | vs)
    estimate: float        # MI(vi; t) - MI(vi; vs)
    estimate_gap: float    # conditional - estimate, equals MI(vi; vs | t)
    gap_identity_error: float


def verify_chain_rule(
    j: DiscreteJoint, vs: str, vi: str, t: str, tol: float = 1e-10
) -> ChainRuleReport:
    """Check that the set-MI marginal gain equals the conditional MI, and
    quantify how far the independence-assuming estimate sits from it."""
    set_gain = group_mutual_information(j, [vs, vi], [t]) - group_mutual_information(
        j, [vs], [t]
    )
    conditional = conditional_mi(j, vi, t, vs)
    estimate = group_mutual_information(j, [vi], [t]) - group_mutual_information(
        j, [vi], [vs]
    )
    gap = conditional - estimate
    gap_identity_error = abs(gap - conditional_mi(j, vi, vs, t))
    passed = abs(set_gain - conditional) <= tol and gap_identity_error <= tol
    return ChainRuleReport(passed, set_gain, conditional, estimate, gap, gap_identity_error)


@dataclass(frozen=True)
class SubmodularityReport:
    passed: bool
    checks: int
    worst_slack: float  # min over checks of gain(A) - gain(B); >= -tol when passed
    monotone: bool
    detail: str


def verify_submodularity(
    j: DiscreteJoint, ground: Sequence[str], target: str, tol: float = 1e-10
) -> SubmodularityReport:
    """Exhaustively check diminishing returns of f(S) = MI(S; target) over
    every chain A subset-of B and candidate i outside B.

    Requires the ground variables to be conditionally independent given the
    target (checked first); without that the set function need not be
    submodular.
    """
    ground = list(ground)
    _require_conditional_independence(j, ground, target)

    f = {frozenset(): 0.0}
    for r in range(1, len(ground) + 1):
        for subset in combinations(ground, r):
            f[frozenset(subset)] = group_mutual_information(j, list(subset), [target])

    checks = 0
    worst = np.inf
    detail = ""
    passed = True
    subsets = list(f.keys())
    for a in subsets:
        for b in subsets:
            if not (a <= b):
                continue
            for i in ground:
                if i in b:
                    continue
                gain_a = f[a | {i}] - f[a]
                gain_b = f[b | {i}] - f[b]
                slack = gain_a - gain_b
                checks += 1
                if slack < worst:
                    worst = slack
                if slack < -tol and passed:
                    passed = False
                    detail = (
                        f"gain({i}|{sorted(a)}) = {gain_a!r} < "
                        f"gain({i}|{sorted(b)}) = {gain_b!r}"
                    )
    monotone = all(
        f[a] <= f[b] + tol for a in subsets for b in subsets if a <= b
    )
    if not detail:
        detail = f"all {checks} diminishing-returns checks hold"
    return SubmodularityReport(passed and monotone, checks, float(worst), monotone, detail)


def _require_conditional_independence(
    j: DiscreteJoint, ground: Sequence[str], target: str, tol: float = 1e-9
) -> None:
    axes = [j.axis(g) for g in ground] + [j.axis(target)]
    p = np.transpose(j.probs, axes)  # ground axes first, target last
    pt = p.sum(axis=tuple(range(len(ground))))
    product = pt.copy()
    for k in range(len(ground)):
        other = tuple(ax for ax in range(len(ground)) if ax != k)
        cond = p.sum(axis=other)  # shape (|g_k|, |t|)
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(pt > 0, cond / pt, 0.0)
        shape = [1] * (len(ground) + 1)
        shape[k] = cond.shape[0]
        shape[-1] = cond.shape[1]
        product = product * cond.reshape(shape)
    if not np.allclose(p, product, atol=tol):
        raise ConfigError(
            "joint is not conditionally independent given the target "
            f"(max deviation {np.max(np.abs(p - product)):.3e})"
        )


@dataclass(frozen=True)
class LseReport:
    passed: bool
    max_value: float
    lse_value: float
    upper_bound: float


def verify_lse_bounds(z: Iterable[float], tol: float = 1e-12) -> LseReport:
    """Check max(z) <= logsumexp(z) <= max(z) + log(len(z))."""
    arr = np.asarray(list(z), dtype=np.float64)
    if arr.size == 0:
        raise ConfigError("need a non-empty vector")
    if not np.all(np.isfinite(arr)):
        raise ConfigError("entries must be finite")
    m = float(np.max(arr))
    lse = float(logsumexp(arr))
    upper = m + float(np.log(arr.size))
    passed = (m <= lse + tol) and (lse <= upper + tol)
    return LseReport(passed, m, lse, upper)


def random_joint(
    rng: np.random.Generator, shape: Sequence[int], names: Optional[Sequence[str]] = None
) -> DiscreteJoint:
    """Joint with i.i.d. uniform weights, normalized to total mass 1."""
    probs = rng.random(tuple(shape))
    probs /= probs.sum()
    if names is None:
        names = tuple(f"x{k}" for k in range(len(shape)))
    return DiscreteJoint(tuple(names), probs)


def naive_bayes_joint(
    rng: np.random.Generator,
    ground_sizes: Sequence[int],
    target_size: int,
    ground_names: Optional[Sequence[str]] = None,
    target_name: str = "y",
) -> DiscreteJoint:
    """Joint where the ground variables are independent given the target:
    p(g1..gk, t) = p(t) * prod_k p(gk | t)."""
    if ground_names is None:
        ground_names = tuple(f"g{k}" for k in range(len(ground_sizes)))
    pt = rng.random(target_size)
    pt /= pt.sum()
    probs = pt.copy()
    for k, size in enumerate(ground_sizes):
        cond = rng.random((size, target_size))
        cond /= cond.sum(axis=0, keepdims=True)
        shape = [1] * (len(ground_sizes) + 1)
        shape[k] = size
        shape[-1] = target_size
        probs = probs * cond.reshape(shape)
    probs = probs / probs.sum()  # absorb float drift; ratios (CI) unchanged
    return DiscreteJoint(tuple(ground_names) + (target_name,), probs)


@dataclass(frozen=True)
class SuiteReport:
    passed: bool
    trials: int
    mass_failures: int
    chain_rule_failures: int
    symmetry_failures: int
    nonnegativity_failures: int
    submodularity_failures: int
    lse_failures: int
    ratio_bound_failures: int
    first_failure: str


def run_verification_suite(
    trials: int = 10000, seed: int = 0, inject_fault: bool = False
) -> SuiteReport:
    """Sweep the identity checks over seeded random joints.

    inject_fault perturbs one probability of one joint after validation
    (the tensor stops summing to 1), which must make the sweep fail; it
    exists as a negative control for the verification wiring.
    """
    rng = np.random.default_rng(seed)
    mass = chain = sym = nonneg = submod = lse = ratio = 0
    first = ""

    def note(msg: str) -> None:
        nonlocal first
        if not first:
            first = msg

    for trial in range(trials):
        sizes = rng.integers(2, 5, size=3)
        j = random_joint(rng, sizes, names=("a", "b", "c"))
        if inject_fault and trial == min(17, trials - 1):
            j.probs[(0,) * j.probs.ndim] += 0.05  # corrupt one probability
        if abs(float(j.probs.sum()) - 1.0) > 1e-12 or np.any(j.probs < 0):
            mass += 1
            note(f"trial {trial}: tensor is not a distribution: {j.probs.tolist()}")
        report = verify_chain_rule(j, "a", "b", "c")
        if not report.passed:
            chain += 1
            note(f"chain rule failed on trial {trial}: {j.probs.tolist()}")
        if abs(mutual_information(j, "a", "b") - mutual_information(j, "b", "a")) > 1e-12:
            sym += 1
            note(f"MI symmetry failed on trial {trial}: {j.probs.tolist()}")
        if (
            entropy(j, "a") < -1e-12
            or mutual_information(j, "a", "c") < -1e-12
            or conditional_mi(j, "a", "b", "c") < -1e-12
        ):
            nonneg += 1
            note(f"negative information quantity on trial {trial}: {j.probs.tolist()}")

    for trial in range(max(1, trials // 10)):
        sizes = [int(s) for s in rng.integers(2, 4, size=3)]
        j = naive_bayes_joint(rng, sizes, int(rng.integers(2, 4)))
        report = verify_submodularity(j, ["g0", "g1", "g2"], "y")
        if not report.passed:
            submod += 1
            note(f"submodularity failed on NB trial {trial}: {j.probs.tolist()}")

    for trial in range(trials):
        z = rng.normal(scale=10.0, size=int(rng.integers(1, 33)))
        if not verify_lse_bounds(z).passed:
            lse += 1
            note(f"LSE bounds failed on trial {trial}: {z.tolist()}")
        # ratio form of the max bound: max of positive ratios <= their sum
        cond = rng.random(z.size) + 1e-9
        cond /= cond.sum()
        marg = rng.random(z.size) + 1e-9
        marg /= marg.sum()
        ratios = cond / marg
        if not np.max(ratios) <= np.sum(ratios) + 1e-12:
            ratio += 1
            note(f"ratio bound failed on trial {trial}")

    failures = mass + chain + sym + nonneg + submod + lse + ratio
    return SuiteReport(
        failures == 0, trials, mass, chain, sym, nonneg, submod, lse, ratio, first
    )
