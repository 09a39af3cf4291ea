"""Named experiments that rebuild finite constructions and verify their
containments element by element.

Every assertion is decided from WindowSet data and exact arithmetic alone;
a failed assertion always carries a concrete counterexample.  Corpora are
seeded and shipped as config files, so runs are reproducible bit for bit.
"""

from __future__ import annotations

import hashlib
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import EpsilonOutOfRange
from .exact import ExactReal, Rational, compare, format_real, _coerce
from .families import (banach_density_estimate, difference_set, j_set_witness,
                       longest_ap, piecewise_syndetic_check, translate,
                       CONSISTENT, DEFAULT_J_SEQS)
from .spectra import SpectrumMap, image_set
from .windows import WindowSet


def stable_seed(*parts) -> int:
    """Process-independent integer seed derived from the given parts."""
    text = ":".join(str(p) for p in parts)
    return int.from_bytes(hashlib.blake2s(text.encode()).digest()[:8], "big")


@dataclass(frozen=True)
class AssertionResult:
    name: str
    passed: bool
    counterexample: Optional[dict]
    checked: int

    def to_payload(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "counterexample": self.counterexample, "checked": self.checked}


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    config: dict
    assertions: tuple[AssertionResult, ...]
    artifacts: dict
    horizons: dict
    wall_time_ms: float
    hypothesis_failed: Optional[str] = None

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def to_payload(self, include_timing: bool = True) -> dict:
        payload = {
            "name": self.name,
            "config": self.config,
            "passed": self.passed,
            "assertions": [a.to_payload() for a in self.assertions],
            "artifacts": self.artifacts,
            "horizons": self.horizons,
            "hypothesis_failed": self.hypothesis_failed,
        }
        payload["wall_time_ms"] = round(self.wall_time_ms, 3) if include_timing else 0.0
        return payload


def _exists_nat_strict(lo: ExactReal, hi: ExactReal) -> Optional[int]:
    """Least natural n with lo < n < hi (both strict), else None."""
    n = lo.floor() + 1
    if n < 1:
        n = 1
    if compare(_coerce(n), lo) <= 0:  # floor()+1 landed on lo (lo integral)
        n += 1
    return n if compare(_coerce(n), hi) < 0 else None


def _exists_nat_halfopen(lo: ExactReal, hi: ExactReal) -> Optional[int]:
    """Least natural n with lo <= n < hi, else None."""
    n = -((-lo).floor())  # ceil
    if n < 1:
        n = 1
    return n if compare(_coerce(n), hi) < 0 else None


# -- near-multiple cover experiment (CLI name: prop34) ---------------------------

def prop34_experiment(A: WindowSet, alpha: ExactReal, gamma: ExactReal) -> ExperimentReport:
    """Build the near-multiples set B = {k : some n in A has |k - n*alpha| <
    delta}, delta = min(gamma, 1-gamma), and verify B sits inside the
    spectrum image of A element by element."""
    t0 = time.perf_counter()
    alpha = _coerce(alpha)
    gamma = _coerce(gamma)
    if gamma.sign() <= 0 or compare(gamma, 1) >= 0:
        raise ValueError("the near-multiples construction needs 0 < gamma < 1")
    one_minus = 1 - gamma
    delta = gamma if compare(gamma, one_minus) <= 0 else one_minus

    b_elems: set[int] = set()
    for n in A.elements:
        v = alpha * n
        k = _exists_nat_strict(v - delta, v + delta)
        while k is not None:
            b_elems.add(k)
            nxt = k + 1
            k = nxt if compare(_coerce(nxt), v + delta) < 0 else None
    spectrum = SpectrumMap(alpha, gamma)
    image = image_set(spectrum, A)
    if A.horizon:
        cap = (alpha * (A.horizon + 1) - delta).floor()
        horizon_b = min(image.horizon, cap)
    else:
        horizon_b = 0
    B = WindowSet(tuple(k for k in sorted(b_elems) if k <= horizon_b),
                  max(horizon_b, 0))

    missing = [k for k in B.elements if k not in image]
    counter = None
    if missing:
        counter = {"k": missing[0], "image_window": image.horizon}
    assertion = AssertionResult("near-multiples-inside-image", not missing,
                                counter, len(B.elements))
    return ExperimentReport(
        name="prop34",
        config={"alpha": format_real(alpha), "gamma": format_real(gamma),
                "set_size": len(A), "set_horizon": A.horizon},
        assertions=(assertion,),
        artifacts={"near_multiples": list(B.elements),
                   "image": list(image.elements)},
        horizons={"input": A.horizon, "near_multiples": B.horizon,
                  "image": image.horizon},
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )


# -- difference-block experiment (CLI name: prop36) --------------------------------

def prop36_experiment(A: WindowSet, alpha: ExactReal, eps: ExactReal) -> ExperimentReport:
    """Slice A by the fractional landing position of multiples of 1/alpha,
    then verify: (i) the slices cover A, (ii) each slice's self-difference
    intersected with the slice lands in the near-reciprocal set B, and
    (iii) the spectrum with offset eps*alpha maps B into the witness set D."""
    t0 = time.perf_counter()
    alpha = _coerce(alpha)
    eps = _coerce(eps)
    if alpha.sign() <= 0:
        raise ValueError("alpha must be positive")
    half_alpha_inv = 1 / (2 * alpha)
    lim = half_alpha_inv if compare(half_alpha_inv, 1) < 0 else _coerce(1)
    if eps.sign() <= 0 or compare(eps, lim) >= 0:
        raise EpsilonOutOfRange(
            f"eps must satisfy 0 < eps < min(1/(2*alpha), 1); got {format_real(eps)}")

    L = (1 / eps).floor() + 1          # least L with 1/L < eps
    ell = L * ((1 / alpha).floor() + 1)
    H = A.horizon

    slices: list[list[int]] = [[] for _ in range(ell)]
    inv_L = Rational(1, L)
    for m in A.elements:
        base = _coerce(m)
        for i in range(ell):
            lo = (base + Rational(i, L)) * alpha
            hi = (base + Rational(i + 1, L)) * alpha
            if _exists_nat_halfopen(lo, hi) is not None:
                slices[i].append(m)
    slice_windows = [WindowSet(tuple(s), H) for s in slices]

    covered = set()
    for s in slices:
        covered.update(s)
    missing_cover = [m for m in A.elements if m not in covered]
    a1 = AssertionResult("slices-cover-A", not missing_cover,
                         {"m": missing_cover[0]} if missing_cover else None,
                         len(A))

    def in_B(m: int) -> bool:
        lo = (m - eps) * alpha
        hi = (m + eps) * alpha
        return _exists_nat_strict(lo, hi) is not None

    b_members = {m for m in A.elements if in_B(m)}
    B = WindowSet(tuple(sorted(b_members)), H)

    diff_violation = None
    checked_pairs = 0
    for j, Aj in enumerate(slice_windows):
        if not Aj:
            continue
        block = difference_set(Aj, Aj).intersect(Aj)
        for m in block.elements:
            checked_pairs += 1
            if m not in b_members:
                diff_violation = {"slice": j, "m": m}
                break
        if diff_violation:
            break
    a2 = AssertionResult("slice-differences-inside-B", diff_violation is None,
                         diff_violation, checked_pairs)

    d_elems: set[int] = set()
    for m in A.elements:
        lo = (m - eps) * alpha
        hi = (m + eps) * alpha
        n = _exists_nat_strict(lo, hi)
        while n is not None:
            d_elems.add(n)
            n = n + 1 if compare(_coerce(n + 1), hi) < 0 else None
    horizon_d = (alpha * (H + 1 - eps)).floor() if H else 0
    D = WindowSet(tuple(k for k in sorted(d_elems) if k <= horizon_d),
                  max(horizon_d, 0))

    gamma = eps * alpha
    image_b = image_set(SpectrumMap(alpha, gamma), B)
    check_bound = min(image_b.horizon, D.horizon)
    missing_d = [k for k in image_b.elements if k <= check_bound and k not in D]
    a3 = AssertionResult("spectrum-of-B-inside-D", not missing_d,
                         {"k": missing_d[0]} if missing_d else None,
                         sum(1 for k in image_b.elements if k <= check_bound))

    return ExperimentReport(
        name="prop36",
        config={"alpha": format_real(alpha), "eps": format_real(eps),
                "L": L, "ell": ell, "set_size": len(A), "set_horizon": H},
        assertions=(a1, a2, a3),
        artifacts={
            "slice_sizes": [len(s) for s in slices],
            "B": list(B.elements),
            "D": list(D.elements),
        },
        horizons={"input": H, "B": B.horizon, "D": D.horizon,
                  "image_of_B": image_b.horizon},
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )


# -- shrunk-neighborhood experiment (CLI name: lemma35) ------------------------------

def lemma35_experiment(sys, x, y, U, m: int, horizon: int) -> ExperimentReport:
    """Intersect U with its m-step pullback and verify the joint return set
    of the shrunk neighborhood lands in (-m + A) cap A and in (A - A) cap A,
    where A is the joint return set of U itself."""
    from .dynamics import NbhdIntersection, Pullback, scan_pair_return_times

    t0 = time.perf_counter()
    a_scan = scan_pair_return_times(sys, x, y, U, horizon)
    A = a_scan.times
    config = {"m": m, "horizon": horizon}
    if m not in A:
        return ExperimentReport(
            name="lemma35", config=config, assertions=(),
            artifacts={"A": list(A.elements)},
            horizons={"A": A.horizon},
            wall_time_ms=(time.perf_counter() - t0) * 1e3,
            hypothesis_failed=f"m={m} is not a joint return time",
        )
    V = NbhdIntersection((U, Pullback(U, m)))
    cut = horizon - m
    v_scan = scan_pair_return_times(sys, x, y, V, max(cut, 1))
    v_times = v_scan.times.restrict(cut)

    shifted = translate(A, -m).intersect(A).restrict(cut)
    bad_shift = [n for n in v_times.elements if n not in shifted]
    a1 = AssertionResult("shrunk-returns-inside-shifted-cap", not bad_shift,
                         {"n": bad_shift[0]} if bad_shift else None,
                         len(v_times))

    diff_cap = difference_set(A, A).intersect(A).restrict(cut)
    bad_diff = [n for n in v_times.elements if n not in diff_cap]
    a2 = AssertionResult("shrunk-returns-inside-difference-cap", not bad_diff,
                         {"n": bad_diff[0]} if bad_diff else None,
                         len(v_times))

    return ExperimentReport(
        name="lemma35", config=config, assertions=(a1, a2),
        artifacts={"A": list(A.elements), "V_returns": list(v_times.elements),
                   "ambiguous": list(a_scan.ambiguous + v_scan.ambiguous)},
        horizons={"A": A.horizon, "V_returns": v_times.horizon},
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )


# -- preservation ladder -------------------------------------------------------------

PRESERVATION_FAMILIES = ("inf", "ap", "ps", "pud", "pubd", "j")


def make_generator_window(spec: str, horizon: int, seed: int = 0) -> WindowSet:
    """Built-in corpus generators: evens, odds, squares, multiples:k,
    ap:start:step, powers:b, random:p/q."""
    kind, _, rest = spec.partition(":")
    if kind == "evens":
        return WindowSet.of(range(2, horizon + 1, 2), horizon)
    if kind == "odds":
        return WindowSet.of(range(1, horizon + 1, 2), horizon)
    if kind == "squares":
        return WindowSet.of((i * i for i in range(1, int(horizon ** 0.5) + 2)
                             if i * i <= horizon), horizon)
    if kind == "multiples":
        k = int(rest)
        return WindowSet.of(range(k, horizon + 1, k), horizon)
    if kind == "ap":
        start_txt, _, step_txt = rest.partition(":")
        start, step = int(start_txt), int(step_txt)
        return WindowSet.of(range(start, horizon + 1, step), horizon)
    if kind == "powers":
        b = int(rest)
        vals, v = [], 1
        while v <= horizon:
            vals.append(v)
            v *= b
        return WindowSet.of(vals, horizon)
    if kind == "random":
        num, _, den = rest.partition("/")
        density = Fraction(int(num), int(den or 1))
        rng = random.Random(stable_seed(seed, spec, horizon))
        return WindowSet.of((k for k in range(1, horizon + 1)
                             if rng.random() < density), horizon)
    raise ValueError(f"unknown generator spec {spec!r}")


def _ceil_exact(x: ExactReal) -> int:
    return -((-x).floor())


def preservation_suite(family: str, alpha: ExactReal, gamma: ExactReal,
                       generators: Sequence[str], sizes: Sequence[int],
                       seed: int = 0) -> ExperimentReport:
    """Finite-proxy preservation checks of one largeness family under the
    spectrum map, across a generator corpus and a size ladder.

    The transfer constants (the ps translate/interval rescale and the 1/100
    density slack) are finite analogues validated against brute-force
    enumeration on the frozen corpus, not theorem statements.
    """
    t0 = time.perf_counter()
    if family not in PRESERVATION_FAMILIES:
        raise ValueError(f"family must be one of {PRESERVATION_FAMILIES}")
    alpha = _coerce(alpha)
    gamma = _coerce(gamma)
    spectrum = SpectrumMap(alpha, gamma)
    alpha_ge_1 = compare(alpha, 1) >= 0
    assertions: list[AssertionResult] = []
    scores: dict[str, dict] = {}

    for gen in generators:
        ladder_in: list[int] = []
        ladder_out: list[int] = []
        for size in sizes:
            A = make_generator_window(gen, size, seed)
            g_im = image_set(spectrum, A)
            tag = f"{gen}@{size}"
            row: dict = {"input_size": len(A), "image_size": len(g_im),
                         "input_horizon": A.horizon, "image_horizon": g_im.horizon}
            scores[tag] = row

            if family == "inf":
                if alpha_ge_1:
                    ok = len(g_im) >= len(A)
                    assertions.append(AssertionResult(
                        f"inf-size-kept[{tag}]", ok,
                        None if ok else {"input": len(A), "image": len(g_im)},
                        len(A)))
            elif family == "ap":
                l_in = longest_ap(A)[0] if A else 0
                l_out = longest_ap(g_im)[0] if g_im else 0
                row["ap_in"], row["ap_out"] = l_in, l_out
                ladder_in.append(l_in)
                ladder_out.append(l_out)
                if l_in >= 10:
                    ok = l_out >= 3
                    assertions.append(AssertionResult(
                        f"ap-image-nontrivial[{tag}]", ok,
                        None if ok else {"ap_in": l_in, "ap_out": l_out}, 1))
            elif family == "ps":
                if alpha_ge_1:
                    ell, m = 4, 3
                    src = piecewise_syndetic_check(A, ell, m)
                    row["ps_source"] = src.verdict
                    if src.verdict == CONSISTENT:
                        ell2 = _ceil_exact(alpha * (ell + 1))
                        m2 = (alpha * m).floor() - 1
                        if m2 >= 1:
                            dst = piecewise_syndetic_check(g_im, ell2, m2)
                            row["ps_image"] = dst.verdict
                            ok = dst.verdict == CONSISTENT
                            assertions.append(AssertionResult(
                                f"ps-transfer[{tag}]", ok,
                                None if ok else {"ell2": ell2, "m2": m2}, 1))
            elif family in ("pud", "pubd"):
                if family == "pud":
                    d_in = A.density_at_horizon()
                    d_out = g_im.density_at_horizon()
                else:
                    w = max(1, A.horizon // 10)
                    w2 = max(1, min(g_im.horizon, (alpha * w).floor()))
                    d_in = banach_density_estimate(A, w) if A.horizon else Fraction(0)
                    d_out = (banach_density_estimate(g_im, w2)
                             if g_im.horizon else Fraction(0))
                row["density_in"], row["density_out"] = str(d_in), str(d_out)
                # d_out >= d_in/alpha - 1/100, compared exactly
                lhs = (_coerce(d_out) + Rational(1, 100)) * alpha
                ok = compare(lhs, _coerce(d_in)) >= 0
                assertions.append(AssertionResult(
                    f"{family}-transfer[{tag}]", ok,
                    None if ok else {"in": str(d_in), "out": str(d_out)}, 1))
            elif family == "j":
                r_bound = min(A.horizon, 64)
                witness = j_set_witness(A, DEFAULT_J_SEQS, r_bound, 6) if A else None
                row["j_source"] = witness is not None
                if witness is not None:
                    r2 = _ceil_exact(alpha * (r_bound + 1)) + 1
                    w2 = j_set_witness(g_im, DEFAULT_J_SEQS,
                                       min(g_im.horizon, r2), 6)
                    row["j_image"] = w2 is not None
                    assertions.append(AssertionResult(
                        f"j-transfer[{tag}]", w2 is not None,
                        None if w2 is not None else {"r_bound": r2}, 1))

        if family == "ap" and len(ladder_out) >= 2:
            monotone = all(a <= b for a, b in zip(ladder_out, ladder_out[1:]))
            assertions.append(AssertionResult(
                f"ap-ladder-monotone[{gen}]", monotone,
                None if monotone else {"ladder": ladder_out}, len(ladder_out)))
            if gen.startswith("ap:"):
                strict = all(a < b for a, b in zip(ladder_out, ladder_out[1:]))
                assertions.append(AssertionResult(
                    f"ap-ladder-strict[{gen}]", strict,
                    None if strict else {"ladder": ladder_out}, len(ladder_out)))

    return ExperimentReport(
        name="preservation",
        config={"family": family, "alpha": format_real(alpha),
                "gamma": format_real(gamma), "generators": list(generators),
                "sizes": list(sizes), "seed": seed},
        assertions=tuple(assertions),
        artifacts={"scores": scores},
        horizons={"sizes": list(sizes)},
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )
