import pytest

from specdyn.corpus import (load_shipped_config, parse_config_text,
                            run_experiment_config, shipped_corpus_names)
from specdyn.errors import ConfigError


class TestConfigParsing:
    def test_single_run_config(self):
        name, values = parse_config_text(
            "[prop34]\nalpha = sqrt(2)\ngamma = 1/2\nelements = 1,2,3\nhorizon = 3\n")
        assert name == "prop34"
        assert values["alpha"] == "sqrt(2)"

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("[prop34]\nalpha = 1\nwat = 2\n")

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("[wat]\nalpha = 1\n")

    def test_two_sections_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("[prop34]\na = 1\n[prop36]\nb = 2\n")

    def test_missing_required_key(self):
        with pytest.raises(ConfigError):
            run_experiment_config("prop34", {"alpha": "sqrt(2)"})

    def test_set_required_for_single_mode(self):
        with pytest.raises(ConfigError):
            run_experiment_config("prop34", {"alpha": "sqrt(2)", "gamma": "1/2"})


class TestSingleRuns:
    def test_prop34_inline_elements(self):
        reports = run_experiment_config(
            "prop34", {"alpha": "sqrt(2)", "gamma": "1/2",
                       "elements": "1,2,3", "horizon": "3"})
        assert len(reports) == 1 and reports[0].passed
        assert reports[0].artifacts["near_multiples"] == [1, 3, 4]

    def test_prop36_inline(self):
        reports = run_experiment_config(
            "prop36", {"alpha": "1", "eps": "1/3",
                       "elements": "5,10,15,20", "horizon": "20"})
        assert reports[0].passed

    def test_lemma35_single(self):
        reports = run_experiment_config(
            "lemma35", {"system": "rotation:1/4", "x": "0", "y": "0",
                        "center": "0", "radius": "1/10", "m": "4",
                        "horizon": "100"})
        assert reports[0].passed

    def test_preservation_single(self):
        reports = run_experiment_config(
            "preservation", {"family": "inf", "alpha": "sqrt(2)",
                             "gamma": "1/2", "generators": "evens",
                             "sizes": "100,200"})
        assert reports[0].passed


class TestCorpusDeterminism:
    def test_same_seed_same_reports(self):
        cfg = {"configs": "5", "seed": "123", "horizon": "200",
               "alphas": "sqrt(2), 3/2", "gammas": "1/2, 1/3"}
        a = run_experiment_config("prop34", cfg)
        b = run_experiment_config("prop34", cfg)
        assert [r.config for r in a] == [r.config for r in b]
        assert [r.artifacts for r in a] == [r.artifacts for r in b]

    def test_different_seed_differs(self):
        base = {"configs": "5", "horizon": "200",
                "alphas": "sqrt(2)", "gammas": "1/2"}
        a = run_experiment_config("prop34", dict(base, seed="1"))
        b = run_experiment_config("prop34", dict(base, seed="2"))
        assert [r.artifacts for r in a] != [r.artifacts for r in b]


class TestShippedCorpora:
    def test_all_files_parse(self):
        for fname in shipped_corpus_names():
            name, values = load_shipped_config(fname)
            assert name in fname
            assert values

    def test_prop34_subsample_passes(self):
        # the acceptance suite runs the full 200; here a fast 10-config slice
        _, values = load_shipped_config("prop34.cfg")
        values = dict(values, configs="10")
        reports = run_experiment_config("prop34", values)
        assert all(r.passed for r in reports)

    def test_lemma35_subsample_passes(self):
        _, values = load_shipped_config("lemma35.cfg")
        values = dict(values, configs="4", horizon="2000")
        reports = run_experiment_config("lemma35", values)
        solid = [r for r in reports if not r.hypothesis_failed]
        assert solid and all(r.passed for r in solid)
