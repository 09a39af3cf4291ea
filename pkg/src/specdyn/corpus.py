"""Experiment configs and frozen corpora.

Config files are flat key=value text under a single [section] naming the
experiment.  Unknown keys are rejected.  A config with a `configs` key is a
corpus: it derives that many deterministic sub-configs from its seed.
"""

from __future__ import annotations

import configparser
import random
from importlib import resources

from .errors import ConfigError
from .exact import ExactReal, Rational, parse_real
from .experiments import (ExperimentReport, lemma35_experiment,
                          preservation_suite, prop34_experiment,
                          prop36_experiment, stable_seed)
from .windows import WindowSet, load_window, parse_window_text

EXPERIMENT_NAMES = ("prop34", "prop36", "lemma35", "preservation")

_SCHEMAS = {
    "prop34": {"alpha", "gamma", "elements", "set_file", "horizon",
               "configs", "seed", "alphas", "gammas",
               "density_min_percent", "density_max_percent"},
    "prop36": {"alpha", "eps", "elements", "set_file", "horizon",
               "configs", "seed", "alphas", "epsilons", "size"},
    "lemma35": {"system", "x", "y", "center", "radius", "m", "horizon",
                "configs", "seed", "angles", "radii"},
    "preservation": {"family", "families", "alpha", "alphas", "gamma",
                     "generators", "sizes", "seed"},
}


def parse_config_text(text: str) -> tuple[str, dict[str, str]]:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep keys verbatim
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}")
    sections = parser.sections()
    if len(sections) != 1:
        raise ConfigError(f"expected exactly one [experiment] section, got {sections}")
    name = sections[0]
    if name not in _SCHEMAS:
        raise ConfigError(f"unknown experiment {name!r}; known: {EXPERIMENT_NAMES}")
    values = dict(parser.items(name))
    unknown = set(values) - _SCHEMAS[name]
    if unknown:
        raise ConfigError(f"unknown keys for {name}: {sorted(unknown)}")
    return name, values


def load_config(path: str) -> tuple[str, dict[str, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _split_list(raw: str) -> list[str]:
    return [tok.strip() for tok in raw.split(",") if tok.strip()]


def _parse_reals(raw: str) -> list[ExactReal]:
    return [parse_real(tok) for tok in _split_list(raw)]


def _window_from_config(values: dict[str, str]) -> WindowSet:
    horizon = int(values["horizon"]) if "horizon" in values else None
    if "elements" in values:
        text = "\n".join(_split_list(values["elements"]))
        if horizon is not None:
            text = f"#horizon {horizon}\n" + text
        return parse_window_text(text)
    if "set_file" in values:
        ws = load_window(values["set_file"])
        return ws.restrict(horizon) if horizon is not None else ws
    raise ConfigError("config needs either `elements` or `set_file`")


def _random_subset(rng: random.Random, horizon: int, density: float) -> WindowSet:
    return WindowSet.of((k for k in range(1, horizon + 1)
                         if rng.random() < density), horizon)


# -- corpus builders ----------------------------------------------------------------

def run_experiment_config(name: str, values: dict[str, str]) -> list[ExperimentReport]:
    """Run a parsed config; corpus configs yield one report per sub-config."""
    if name == "prop34":
        return _run_prop34(values)
    if name == "prop36":
        return _run_prop36(values)
    if name == "lemma35":
        return _run_lemma35(values)
    if name == "preservation":
        return _run_preservation(values)
    raise ConfigError(f"unknown experiment {name!r}")


def _require(values: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {missing}")


def _run_prop34(values: dict[str, str]) -> list[ExperimentReport]:
    if "configs" not in values:
        _require(values, "alpha", "gamma")
        A = _window_from_config(values)
        return [prop34_experiment(A, parse_real(values["alpha"]),
                                  parse_real(values["gamma"]))]
    _require(values, "seed", "horizon", "alphas", "gammas")
    count = int(values["configs"])
    seed = int(values["seed"])
    horizon = int(values["horizon"])
    alphas = _parse_reals(values["alphas"])
    gammas = _parse_reals(values["gammas"])
    d_lo = int(values.get("density_min_percent", 5)) / 100.0
    d_hi = int(values.get("density_max_percent", 50)) / 100.0
    reports = []
    for i in range(count):
        rng = random.Random(stable_seed(seed, "prop34", i))
        A = _random_subset(rng, horizon, rng.uniform(d_lo, d_hi))
        reports.append(prop34_experiment(A, rng.choice(alphas), rng.choice(gammas)))
    return reports


def _run_prop36(values: dict[str, str]) -> list[ExperimentReport]:
    if "configs" not in values:
        _require(values, "alpha", "eps")
        A = _window_from_config(values)
        return [prop36_experiment(A, parse_real(values["alpha"]),
                                  parse_real(values["eps"]))]
    _require(values, "seed", "horizon", "alphas", "epsilons")
    count = int(values["configs"])
    seed = int(values["seed"])
    horizon = int(values["horizon"])
    size = int(values.get("size", 200))
    alphas = _parse_reals(values["alphas"])
    epsilons = _parse_reals(values["epsilons"])
    reports = []
    for i in range(count):
        rng = random.Random(stable_seed(seed, "prop36", i))
        elems = rng.sample(range(1, horizon + 1), min(size, horizon))
        A = WindowSet.of(elems, horizon)
        alpha = rng.choice(alphas)
        legal = [e for e in epsilons
                 if (1 / (2 * alpha) - e).sign() > 0 and (1 - e).sign() > 0]
        if not legal:
            raise ConfigError("no legal eps for alpha in corpus (needs eps < 1/(2*alpha))")
        reports.append(prop36_experiment(A, alpha, rng.choice(legal)))
    return reports


def _run_lemma35(values: dict[str, str]) -> list[ExperimentReport]:
    from .dynamics import Ball, CircleRotation, parse_system, parse_state, \
        scan_pair_return_times

    if "configs" not in values:
        _require(values, "system", "x", "y", "center", "radius", "horizon")
        spec = values["system"]
        sys = parse_system(spec)
        x = parse_state(spec, sys, values["x"])
        y = parse_state(spec, sys, values["y"])
        U = Ball(parse_real(values["center"]), parse_real(values["radius"]))
        horizon = int(values["horizon"])
        m_raw = values.get("m", "least")
        if m_raw == "least":
            A = scan_pair_return_times(sys, x, y, U, horizon).times
            m = A.min() if A else 1
        else:
            m = int(m_raw)
        return [lemma35_experiment(sys, x, y, U, m, horizon)]
    _require(values, "seed", "horizon", "angles")
    count = int(values["configs"])
    seed = int(values["seed"])
    horizon = int(values["horizon"])
    angles = _parse_reals(values["angles"])
    radii = _parse_reals(values["radii"]) if "radii" in values else \
        [Rational(1, 5), Rational(1, 7), Rational(1, 9)]
    reports = []
    for i in range(count):
        rng = random.Random(stable_seed(seed, "lemma35", i))
        sys = CircleRotation(rng.choice(angles))
        radius = rng.choice(radii)
        y = Rational(rng.randrange(0, 997), 997)
        # keep the pair within co-visiting distance of the ball around y
        offset = Rational(rng.randrange(1, 1000), 10000)
        while (radius - offset).sign() <= 0:
            offset = offset * Rational(1, 2)
        x = (y + offset).frac_part()
        U = Ball(y, radius)
        A = scan_pair_return_times(sys, x, y, U, horizon).times
        m = A.min() if A else 1
        reports.append(lemma35_experiment(sys, x, y, U, m, horizon))
    return reports


def _run_preservation(values: dict[str, str]) -> list[ExperimentReport]:
    _require(values, "gamma", "generators", "sizes")
    families = _split_list(values.get("families", values.get("family", "")))
    if not families:
        raise ConfigError("preservation needs `family` or `families`")
    alphas = _parse_reals(values.get("alphas", values.get("alpha", "")))
    if not alphas:
        raise ConfigError("preservation needs `alpha` or `alphas`")
    gamma = parse_real(values["gamma"])
    generators = _split_list(values["generators"])
    sizes = [int(s) for s in _split_list(values["sizes"])]
    seed = int(values.get("seed", 0))
    return [preservation_suite(fam, alpha, gamma, generators, sizes, seed)
            for fam in families
            for alpha in alphas]


# -- the frozen suite ------------------------------------------------------------------

def shipped_corpus_names() -> list[str]:
    return [f"{name}.cfg" for name in EXPERIMENT_NAMES]


def load_shipped_config(filename: str) -> tuple[str, dict[str, str]]:
    text = resources.files("specdyn").joinpath("corpora", filename).read_text("utf-8")
    return parse_config_text(text)


def run_full_suite() -> list[ExperimentReport]:
    """Run every shipped corpus config, in a fixed order."""
    reports: list[ExperimentReport] = []
    for filename in shipped_corpus_names():
        name, values = load_shipped_config(filename)
        reports.extend(run_experiment_config(name, values))
    return reports
