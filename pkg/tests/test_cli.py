import json
import os
import subprocess
import sys

import pytest

from specdyn.cli import main


def run_cli(*argv, env=None):
    proc = subprocess.run([sys.executable, "-m", "specdyn.cli", *argv],
                          capture_output=True, text=True, env=env)
    return proc.returncode, proc.stdout, proc.stderr


@pytest.fixture
def evens_file(tmp_path):
    path = tmp_path / "evens.set"
    path.write_text("#horizon 100\n" + "\n".join(str(k) for k in range(2, 101, 2)) + "\n")
    return str(path)


class TestSpectraCommands:
    def test_gen_plain_lines(self):
        rc, out, _ = run_cli("spectra", "gen", "--alpha", "sqrt(2)",
                             "--gamma", "1/2", "--horizon", "10")
        assert rc == 0
        assert [int(v) for v in out.split()] == [1, 3, 4, 6, 7, 8, 10, 11, 13, 14]

    def test_gen_with_set_file(self, tmp_path):
        path = tmp_path / "a.set"
        path.write_text("1\n2\n3\n")
        rc, out, _ = run_cli("spectra", "gen", "--alpha", "sqrt(2)",
                             "--gamma", "1/2", "--horizon", "3", "--set", str(path))
        assert rc == 0 and [int(v) for v in out.split()] == [1, 3, 4]

    def test_gen_csv(self):
        rc, out, _ = run_cli("--format", "csv", "spectra", "gen", "--alpha", "1",
                             "--gamma", "1/2", "--horizon", "4")
        assert rc == 0 and out.strip() == "1,2,3,4"

    def test_beatty_partition_exit_zero(self):
        rc, out, _ = run_cli("--no-timestamp", "spectra", "beatty",
                             "--alpha", "(1+sqrt(5))/2", "--beta", "(3+sqrt(5))/2",
                             "--horizon", "1000")
        body = json.loads(out)
        assert rc == 0 and body["partition"] is True
        assert body["seed"] == 0 and "timestamp" not in body

    def test_beatty_violation_exit_one(self):
        rc, out, _ = run_cli("--no-timestamp", "spectra", "beatty",
                             "--alpha", "2", "--beta", "2", "--horizon", "10")
        body = json.loads(out)
        assert rc == 1 and body["first_violation"] == 1

    def test_ambiguity_exit_three(self):
        rc, _, err = run_cli("spectra", "gen", "--alpha", "1.4..1.5",
                             "--gamma", "0.55..0.56", "--horizon", "5")
        assert rc == 3 and "ambiguous" in err

    def test_usage_error_exit_two(self):
        rc, _, _ = run_cli("spectra", "gen", "--alpha", "sqrt(2)")
        assert rc == 2


class TestFamiliesCommands:
    def test_detect_report(self, evens_file):
        rc, out, _ = run_cli("--no-timestamp", "families", "detect",
                             "--family", "pud", "--set", evens_file)
        body = json.loads(out)
        assert rc == 0 and body["score"] == "1/2"

    def test_detect_ip_params(self, evens_file):
        rc, out, _ = run_cli("--no-timestamp", "families", "detect",
                             "--family", "ip-witness", "--set", evens_file,
                             "--k", "3", "--bound", "100")
        body = json.loads(out)
        assert rc == 0 and body["verdict"] == "consistent"
        assert body["witnesses"][0]["generators"] == [2, 4, 8]

    def test_detect_j_with_seqs(self, evens_file):
        rc, out, _ = run_cli("--no-timestamp", "families", "detect",
                             "--family", "j", "--set", evens_file,
                             "--seqs", "1,1,1,1;2,2,2,2",
                             "--r-bound", "64", "--f-bound", "4")
        body = json.loads(out)
        assert rc == 0 and body["witnesses"][0] == {"r": 2, "F": [1, 2]}

    def test_missing_set_file_exit_two(self):
        rc, _, _ = run_cli("families", "detect", "--family", "pud",
                           "--set", "/nonexistent.set")
        assert rc == 2

    def test_ramsey_seed_echo(self, evens_file):
        rc, out, _ = run_cli("--no-timestamp", "--seed", "9", "families", "ramsey",
                             "--family", "pud", "--set", evens_file,
                             "--trials", "4", "--threshold", "1/4")
        body = json.loads(out)
        assert rc == 0 and body["seed"] == 9 and body["details"]["seed"] == 9


class TestDynCommands:
    def test_return_times_set_file_format(self):
        rc, out, _ = run_cli("dyn", "return-times", "--system", "rotation:1/4",
                             "--x", "0", "--ball", "0,1/10", "--horizon", "20")
        assert rc == 0
        assert out.splitlines()[0] == "#horizon 20"
        data = [l for l in out.splitlines() if not l.startswith("#")]
        assert data == ["4", "8", "12", "16", "20"]

    def test_round_trips_as_input(self, tmp_path):
        out_path = tmp_path / "window.set"
        rc, _, _ = run_cli("--output", str(out_path), "dyn", "return-times",
                           "--system", "rotation:1/4", "--x", "0",
                           "--ball", "0,1/10", "--horizon", "20")
        assert rc == 0
        rc, out, _ = run_cli("--no-timestamp", "families", "detect",
                             "--family", "ap", "--set", str(out_path))
        body = json.loads(out)
        assert rc == 0 and body["witnesses"][0]["step"] == 4

    def test_proximal_json(self):
        rc, out, _ = run_cli("--no-timestamp", "dyn", "proximal",
                             "--system", "rotation:sqrt(2)-1", "--x", "0", "--y", "0",
                             "--eps-ladder", "1/2,1/4", "--horizon", "100")
        body = json.loads(out)
        assert rc == 0 and body["per_family"]["inf"] == "consistent"


class TestSuspCommands:
    def test_return_times(self):
        rc, out, _ = run_cli("susp", "return-times", "--system", "rotation:sqrt(2)-1",
                             "--alpha", "sqrt(2)", "--x", "0", "--y", "0",
                             "--gamma0", "1/2", "--band", "2/5,3/5",
                             "--ball", "0,1/4", "--horizon", "50")
        assert rc == 0 and out.startswith("#horizon 50")

    def test_lift_search_line_delimited(self):
        rc, out, _ = run_cli("--no-timestamp", "susp", "lift-search",
                             "--system", "rotation:sqrt(2)-1", "--alpha", "sqrt(2)",
                             "--x", "0", "--y", "0", "--ball", "0,1/4",
                             "--eps", "1/10", "--gamma-grid", "1/4,1/2,3/4",
                             "--horizon", "200")
        lines = out.strip().splitlines()
        assert rc == 0 and len(lines) == 3
        entries = [json.loads(l) for l in lines]
        assert all("return_set_size" in e and "gamma0" in e for e in entries)


class TestTheoremsCommands:
    def test_run_single_config(self, tmp_path):
        cfg = tmp_path / "p34.cfg"
        cfg.write_text("[prop34]\nalpha = sqrt(2)\ngamma = 1/2\n"
                       "elements = 1,2,3\nhorizon = 3\n")
        rc, out, _ = run_cli("--no-timestamp", "theorems", "run",
                             "--experiment", "prop34", "--config", str(cfg))
        lines = out.strip().splitlines()
        assert rc == 0
        report = json.loads(lines[0])
        summary = json.loads(lines[-1])
        assert report["passed"] is True and summary["suite_passed"] is True

    def test_experiment_config_mismatch(self, tmp_path):
        cfg = tmp_path / "p34.cfg"
        cfg.write_text("[prop34]\nalpha = sqrt(2)\ngamma = 1/2\nelements = 1\n")
        rc, _, err = run_cli("theorems", "run", "--experiment", "prop36",
                             "--config", str(cfg))
        assert rc == 2 and "does not match" in err

    def test_unknown_key_exit_two(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[prop34]\nwat = 1\n")
        rc, _, _ = run_cli("theorems", "run", "--experiment", "prop34",
                           "--config", str(cfg))
        assert rc == 2


@pytest.mark.slow
class TestTheoremsSuite:
    def test_frozen_suite_passes(self, capsys):
        rc = main(["--no-timestamp", "theorems", "suite"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        summary = json.loads(lines[-1])
        assert summary["suite_passed"] is True
        assert summary["reports"] == len(lines) - 1


class TestDeterminism:
    def test_byte_identical_reports_with_no_timestamp(self, tmp_path):
        cfg = tmp_path / "p34.cfg"
        cfg.write_text("[prop34]\nconfigs = 3\nseed = 7\nhorizon = 100\n"
                       "alphas = sqrt(2)\ngammas = 1/2\n")
        outs = []
        for _ in range(2):
            rc, out, _ = run_cli("--no-timestamp", "theorems", "run",
                                 "--experiment", "prop34", "--config", str(cfg))
            assert rc == 0
            outs.append(out)
        assert outs[0] == outs[1]

    def test_timestamp_present_by_default(self):
        rc, out, _ = run_cli("spectra", "beatty", "--alpha", "(1+sqrt(5))/2",
                             "--beta", "(3+sqrt(5))/2", "--horizon", "50")
        assert rc == 0 and "timestamp" in json.loads(out)


class TestEnvOverride:
    def test_spectra_max_digits_env(self):
        env = dict(os.environ, SPECTRA_MAX_DIGITS="6")
        code = ("from specdyn.exact import certified, default_max_digits;"
                "assert default_max_digits() == 6;"
                "assert certified('1.5','1.5').max_digits == 6; print('ok')")
        proc = subprocess.run([sys.executable, "-c", code],
                              capture_output=True, text=True, env=env)
        assert proc.returncode == 0 and proc.stdout.strip() == "ok"


class TestInProcessEntryPoint:
    def test_main_returns_exit_code(self, capsys):
        rc = main(["--no-timestamp", "spectra", "beatty", "--alpha", "2",
                   "--beta", "2", "--horizon", "10"])
        assert rc == 1
        captured = capsys.readouterr()
        assert json.loads(captured.out)["partition"] is False


@pytest.mark.slow
class TestRemoteClient:
    def test_cli_against_live_server(self, tmp_path):
        import socket
        import time
        import httpx
        import uvicorn
        import threading
        from specdyn.service import app

        with socket.socket() as s:
            s.bind(("127.0.0.1", 0))
            port = s.getsockname()[1]
        config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
        server = uvicorn.Server(config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{port}"
        for _ in range(100):
            try:
                if httpx.get(base + "/health", timeout=1.0).status_code == 200:
                    break
            except Exception:
                time.sleep(0.05)
        else:
            pytest.skip("server did not come up")
        try:
            rc, out, _ = run_cli("--server", base, "--no-timestamp", "spectra",
                                 "beatty", "--alpha", "(1+sqrt(5))/2",
                                 "--beta", "(3+sqrt(5))/2", "--horizon", "200")
            assert rc == 0 and json.loads(out)["partition"] is True
            rc, _, _ = run_cli("--server", base, "spectra", "gen",
                               "--alpha", "1.4..1.5", "--gamma", "0.55..0.56",
                               "--horizon", "5")
            assert rc == 3  # HTTP 409 mapped back to the ambiguity exit code
        finally:
            server.should_exit = True
            thread.join(timeout=5)
