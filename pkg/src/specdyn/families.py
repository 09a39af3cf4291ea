"""Largeness detectors and set algebra on finite windows.

Every detector reports against an explicit horizon.  Verdicts are
"consistent" (the finite data supports the property) or
"refuted-up-to-horizon" (a concrete finite obstruction is attached); no
detector ever certifies an infinite-set property from a window.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import SearchSpaceTooLarge, SeqTooLong
from .windows import WindowSet

CONSISTENT = "consistent"
REFUTED = "refuted-up-to-horizon"

FAMILY_TAGS = ("inf", "ap", "j", "ps", "pud", "pubd", "ip-witness")


@dataclass(frozen=True)
class FamilyReport:
    family: str
    verdict: str
    score: Fraction
    witnesses: tuple
    horizon: int

    def to_payload(self) -> dict:
        return {
            "family": self.family,
            "verdict": self.verdict,
            "score": f"{self.score.numerator}/{self.score.denominator}",
            "witnesses": [dict(w) if isinstance(w, dict) else w for w in self.witnesses],
            "horizon": self.horizon,
        }


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    violations: tuple
    details: dict
    horizon: int

    def to_payload(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "violations": list(self.violations),
            "details": self.details,
            "horizon": self.horizon,
        }


# -- set algebra ---------------------------------------------------------------

def translate(A: WindowSet, n: int) -> WindowSet:
    """{n+m : m in A} intersected with the positive integers."""
    elems = tuple(m + n for m in A.elements if m + n >= 1)
    horizon = A.horizon + n if n > 0 else A.horizon - abs(n)
    return WindowSet(elems, max(horizon, 0))


def difference_set(B: WindowSet, A: WindowSet) -> WindowSet:
    """{m - n : m in B, n in A} intersected with the positive integers."""
    if not A or not B:
        return WindowSet.empty(B.horizon)
    diffs = {m - n for m in B.elements for n in A.elements if m > n}
    horizon = max(B.horizon - A.min(), 0)
    return WindowSet(tuple(sorted(diffs)), horizon)


def finite_sums(seq: Sequence[int]) -> WindowSet:
    """All non-empty subset sums of seq; horizon is the total sum."""
    if not 1 <= len(seq) <= 24:
        raise SeqTooLong(f"finite_sums supports 1..24 generators, got {len(seq)}")
    if any(p < 1 for p in seq):
        raise ValueError("generators must be positive")
    sums: set[int] = set()
    for p in seq:
        sums |= {s + p for s in sums} | {p}
    return WindowSet(tuple(sorted(sums)), sum(seq))


# -- bit-parallel run helpers ----------------------------------------------------

def _runs_of_length(mask: int, length: int, step: int = 1) -> int:
    """Bitmask of starts a with a, a+step, ..., a+(length-1)*step all in mask."""
    result: Optional[int] = None
    power_mask = mask
    power_len = 1
    consumed = 0
    remaining = length
    while remaining:
        if remaining & 1:
            if result is None:
                result = power_mask
            else:
                result &= power_mask >> (consumed * step)
            if result == 0:
                return 0
            consumed += power_len
        remaining >>= 1
        if remaining:
            power_mask &= power_mask >> (power_len * step)
            power_len *= 2
            if power_mask == 0:
                return 0
    return result or 0


def _max_run(mask: int, step: int) -> tuple[int, int]:
    """(max chain length, bitmask of starts achieving it) along stride step."""
    if mask == 0:
        return 0, 0
    ladder = [(1, mask)]
    length, starts = 1, mask
    while True:
        nxt = starts & (starts >> (step * length))
        if nxt == 0:
            break
        length *= 2
        starts = nxt
        ladder.append((length, starts))
    total_len, total_starts = length, starts
    for lj, rj in reversed(ladder[:-1]):
        cand = total_starts & (rj >> (step * total_len))
        if cand:
            total_starts = cand
            total_len += lj
    return total_len, total_starts


def _lowest_bit_index(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


# -- detectors -------------------------------------------------------------------

def longest_ap(A: WindowSet) -> tuple[int, int, int]:
    """Maximum-length arithmetic progression inside A as (length, start, step).

    Ties break by smallest start, then smallest step; a singleton counts as
    (1, element, 0).
    """
    elems = A.elements
    if not elems:
        raise ValueError("longest_ap requires a non-empty window")
    if len(elems) == 1:
        return (1, elems[0], 0)
    mask = A.bitmask()
    span = elems[-1] - elems[0]
    best_len, best_start, best_step = 1, elems[0], 0
    for b in range(1, span + 1):
        if 1 + span // b < best_len:
            break
        run_len, starts = _max_run(mask, b)
        if run_len < 2:
            continue
        start = _lowest_bit_index(starts)
        if (run_len > best_len
                or (run_len == best_len and (start, b) < (best_start, best_step))):
            best_len, best_start, best_step = run_len, start, b
    return best_len, best_start, best_step


def piecewise_syndetic_check(A: WindowSet, ell: int, m: int) -> FamilyReport:
    """Does the union of the first ell+1 left translates of A contain m
    consecutive integers inside [1, horizon-ell]?"""
    if ell < 0 or m < 1:
        raise ValueError("need ell >= 0 and m >= 1")
    H = A.horizon
    bound = H - ell
    if bound < 1:
        return FamilyReport("ps", REFUTED, Fraction(0),
                            ({"reason": "window shorter than ell", "scan_bound": bound},),
                            H)
    mask = A.bitmask()
    union = 0
    for i in range(ell + 1):
        union |= mask >> i
    union &= (1 << (bound + 1)) - 2  # keep bits 1..bound
    starts = _runs_of_length(union, m)
    if starts:
        start = _lowest_bit_index(starts)
        return FamilyReport("ps", CONSISTENT, Fraction(m),
                            ({"interval_start": start, "length": m,
                              "ell": ell},), H)
    max_run, _ = _max_run(union, 1)
    return FamilyReport("ps", REFUTED, Fraction(max_run),
                        ({"max_interval": max_run, "required": m,
                          "ell": ell, "scan_bound": bound},), H)


def upper_density_estimate(A: WindowSet) -> tuple[Fraction, Fraction]:
    """(|A cap [1,H]|/H, max over n in [ceil(H/2), H] of |A cap [1,n]|/n)."""
    H = A.horizon
    if H < 1:
        raise ValueError("upper_density_estimate requires horizon >= 1")
    at_horizon = Fraction(len(A.elements), H)
    n0 = (H + 1) // 2
    best = Fraction(A.count_upto(n0), n0)
    for e in A.elements:
        if n0 <= e <= H:
            best = max(best, Fraction(A.count_upto(e), e))
    return at_horizon, best


def banach_density_estimate(A: WindowSet, w: int) -> Fraction:
    """Max of |A cap [m, m+w-1]|/w over all width-w intervals inside [1, H]."""
    H = A.horizon
    if not 1 <= w <= H:
        raise ValueError("need 1 <= w <= horizon")
    if not A.elements:
        return Fraction(0)
    best = 0
    top_start = H - w + 1
    for e in A.elements:
        start = min(e, top_start)
        count = A.count_upto(start + w - 1) - A.count_upto(start - 1)
        if count > best:
            best = count
    return Fraction(best, w)


def ip_witness_search(A: WindowSet, k: int, bound: int) -> Optional[list[int]]:
    """First superincreasing generator tuple (p1 < p2 < ..., each p beyond the
    running total) whose full subset-sum fan lies in A, with total <= bound.

    Superincreasing generators have pairwise-distinct subset sums, which is
    the canonical normal form for finite IP witnesses; the search order is
    depth-first with the smallest admissible generator tried first.
    """
    if not 1 <= k <= 6:
        raise ValueError("ip_witness_search supports 1 <= k <= 6")
    limit = min(A.horizon, bound)
    members = set(A.elements)

    def dfs(chosen: list[int], sums: list[int], total: int) -> Optional[list[int]]:
        if len(chosen) == k:
            return list(chosen)
        for p in range(total + 1, limit - total + 1):
            if p not in members:
                continue
            grown = [p] + [s + p for s in sums]
            if all(s in members for s in grown):
                found = dfs(chosen + [p], sums + grown, total + p)
                if found:
                    return found
        return None

    return dfs([], [], 0)


def j_set_witness(A: WindowSet, seqs: Sequence[Sequence[int]], r_bound: int,
                  f_bound: int) -> Optional[tuple[int, tuple[int, ...]]]:
    """Exhaustive search for (r, F) with r + sum_{n in F} p^i_n in A for every
    sequence i; r ranges over [1, r_bound], F over non-empty subsets of
    [1, f_bound] in increasing bitmask order."""
    if len(seqs) > 4:
        raise SearchSpaceTooLarge("at most 4 sequences supported")
    if f_bound > 20:
        raise SearchSpaceTooLarge("f_bound > 20 makes 2^f subsets infeasible")
    if not seqs or r_bound < 1 or f_bound < 1:
        raise ValueError("need sequences, r_bound >= 1 and f_bound >= 1")
    f_eff = min(f_bound, min(len(s) for s in seqs))
    if f_eff < 1:
        raise ValueError("sequences must have at least one term")
    members = set(A.elements)
    n_masks = 1 << f_eff
    # subset sums per sequence, DP over the lowest set bit
    sums = []
    for seq in seqs:
        table = [0] * n_masks
        for mask in range(1, n_masks):
            low = mask & -mask
            table[mask] = table[mask ^ low] + seq[low.bit_length() - 1]
        sums.append(table)
    H = A.horizon
    for r in range(1, r_bound + 1):
        for mask in range(1, n_masks):
            ok = True
            for table in sums:
                v = r + table[mask]
                if v > H or v not in members:
                    ok = False
                    break
            if ok:
                F = tuple(i + 1 for i in range(f_eff) if mask >> i & 1)
                return r, F
    return None


def additive_pair_check(A: WindowSet) -> Optional[tuple[int, int]]:
    """Lexicographically least pair of distinct x < y in A with x + y in A
    (the sum must land inside the decided window)."""
    members = set(A.elements)
    for x in A.elements:
        for y in A.elements:
            if y <= x:
                continue
            s = x + y
            if s > A.horizon:
                break
            if s in members:
                return x, y
    return None


# -- the detector battery ---------------------------------------------------------

DEFAULT_J_SEQS = ((1, 2, 3, 4, 5, 6), (2, 4, 6, 8, 10, 12))


def detect(family: str, A: WindowSet, **params) -> FamilyReport:
    """Run one named detector with explicit or default thresholds."""
    H = A.horizon
    if family == "inf":
        need = int(params.get("min_count", 1))
        count = len(A.elements)
        verdict = CONSISTENT if count >= need else REFUTED
        return FamilyReport("inf", verdict, Fraction(count),
                            ({"count": count, "required": need},), H)
    if family == "ap":
        need = int(params.get("min_length", 3))
        if not A.elements:
            return FamilyReport("ap", REFUTED, Fraction(0),
                                ({"length": 0, "required": need},), H)
        length, start, step = longest_ap(A)
        verdict = CONSISTENT if length >= need else REFUTED
        return FamilyReport("ap", verdict, Fraction(length),
                            ({"length": length, "start": start, "step": step,
                              "required": need},), H)
    if family == "ps":
        ell = int(params.get("ell", 8))
        m = int(params.get("m", 4))
        return piecewise_syndetic_check(A, ell, m)
    if family == "pud":
        threshold = _fraction_param(params.get("threshold", Fraction(1, 100)))
        if H < 1:
            return FamilyReport("pud", REFUTED, Fraction(0),
                                ({"reason": "empty horizon"},), H)
        at_h, tail = upper_density_estimate(A)
        verdict = CONSISTENT if tail >= threshold else REFUTED
        return FamilyReport("pud", verdict, at_h,
                            ({"at_horizon": str(at_h), "tail_max": str(tail),
                              "threshold": str(threshold)},), H)
    if family == "pubd":
        threshold = _fraction_param(params.get("threshold", Fraction(1, 100)))
        w = int(params.get("w", max(1, min(H, H // 10 or 1))))
        if H < 1:
            return FamilyReport("pubd", REFUTED, Fraction(0),
                                ({"reason": "empty horizon"},), H)
        score = banach_density_estimate(A, w)
        verdict = CONSISTENT if score >= threshold else REFUTED
        return FamilyReport("pubd", verdict, score,
                            ({"window": w, "threshold": str(threshold)},), H)
    if family == "ip-witness":
        k = int(params.get("k", 3))
        bound = int(params.get("bound", H))
        witness = ip_witness_search(A, k, bound)
        if witness:
            return FamilyReport("ip-witness", CONSISTENT, Fraction(k),
                                ({"generators": witness},), H)
        return FamilyReport("ip-witness", REFUTED, Fraction(0),
                            ({"k": k, "bound": bound, "searched": "exhaustive"},), H)
    if family == "j":
        seqs = params.get("seqs", DEFAULT_J_SEQS)
        r_bound = int(params.get("r_bound", min(H, 64) if H else 1))
        f_bound = int(params.get("f_bound", 6))
        witness = j_set_witness(A, seqs, r_bound, f_bound)
        if witness:
            r, F = witness
            return FamilyReport("j", CONSISTENT, Fraction(len(F)),
                                ({"r": r, "F": list(F)},), H)
        return FamilyReport("j", REFUTED, Fraction(0),
                            ({"r_bound": r_bound, "f_bound": f_bound},), H)
    raise ValueError(f"unknown family tag: {family!r}")


def _fraction_param(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str) and "/" in value:
        num, den = value.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(value)


def run_battery(A: WindowSet, families: Sequence[str] = ("inf", "ap", "ps", "pud", "pubd", "ip-witness"),
                params: Optional[dict] = None) -> list[FamilyReport]:
    params = params or {}
    return [detect(f, A, **params.get(f, {})) for f in families]


# -- Ramsey splitting --------------------------------------------------------------

def ramsey_split_check(family: str, A: WindowSet, parts: int, trials: int,
                       seed: int = 0, **params) -> CheckReport:
    """Randomly partition A and test whether some piece retains the property.

    The partition generator is seeded; the seed is echoed in the report so a
    run can be replayed bit-for-bit.
    """
    if parts < 2:
        raise ValueError("need at least 2 parts")
    rng = random.Random(seed)
    trial_rows = []
    all_passed = True
    for t in range(trials):
        pieces: list[list[int]] = [[] for _ in range(parts)]
        for e in A.elements:
            pieces[rng.randrange(parts)].append(e)
        windows = [WindowSet(tuple(p), A.horizon) for p in pieces]
        reports = [detect(family, w, **params) for w in windows]
        passing = [i for i, r in enumerate(reports) if r.verdict == CONSISTENT]
        ok = bool(passing)
        all_passed &= ok
        trial_rows.append({
            "trial": t,
            "piece_sizes": [len(p) for p in pieces],
            "passing_parts": passing,
            "passed": ok,
        })
    return CheckReport(
        name=f"ramsey-split[{family}]",
        passed=all_passed,
        violations=tuple(row for row in trial_rows if not row["passed"]),
        details={"seed": seed, "parts": parts, "trials": trials,
                 "params": {k: str(v) for k, v in params.items()},
                 "trial_rows": trial_rows},
        horizon=A.horizon,
    )


# -- shifted-chain structure --------------------------------------------------------

def fs_chain_check(A: WindowSet, chains: Sequence[WindowSet]) -> CheckReport:
    """Verify a decreasing chain C_1 >= C_2 >= ... of subsets of A in which
    every small element r of C_n admits some C_m with r + C_m back inside C_n.

    Checks, reporting every violation:
      (i)   C_{n+1} subset of C_n,
      (ii)  C_n subset of A,
      (iii) for r in C_n with r <= H/2: exists m with r + C_m subset of C_n
            on [1, H].
    """
    H = A.horizon
    violations = []
    shift_witnesses = {}
    for idx, C in enumerate(chains, start=1):
        if idx >= 2:
            prev = chains[idx - 2]
            missing = [e for e in C.elements if e <= prev.horizon and e not in prev]
            if missing:
                violations.append({"kind": "chain-containment", "n": idx,
                                   "missing_from_previous": missing[:20]})
        outside = [e for e in C.elements if e <= H and e not in A]
        if outside:
            violations.append({"kind": "subset-of-base", "n": idx,
                               "outside_base": outside[:20]})
    for idx, C in enumerate(chains, start=1):
        members = set(C.elements)
        for r in C.elements:
            if 2 * r > H:
                break
            found = None
            for midx, Cm in enumerate(chains, start=1):
                ok = True
                for c in Cm.elements:
                    s = r + c
                    if s > H:
                        break
                    if s not in members:
                        ok = False
                        break
                if ok:
                    found = midx
                    break
            if found is None:
                violations.append({"kind": "shift-absorption", "n": idx, "r": r})
            else:
                shift_witnesses[f"{idx}:{r}"] = found
    return CheckReport(
        name="fs-chain",
        passed=not violations,
        violations=tuple(violations),
        details={"chain_lengths": [len(c) for c in chains],
                 "shift_witnesses": shift_witnesses},
        horizon=H,
    )
