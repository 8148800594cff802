"""End-to-end checks of the dtwar command-line tool. Usage: test_cli.py <dtwar binary>"""

import csv
import json
import os
import re
import subprocess
import sys
import tempfile
import unittest

BIN = None
QUICK = ["--epochs", "15", "--synth-count", "80", "--max-examples", "6"]


def run(args, cwd):
    return subprocess.run([BIN, *args], cwd=cwd, capture_output=True, text=True, timeout=600)


def read(path):
    with open(path, "rb") as f:
        return f.read()


def rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class CliTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.cwd = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def ok(self, args):
        r = run(args, self.cwd)
        self.assertEqual(r.returncode, 0, r.stderr)
        return r

    def p(self, *parts):
        return os.path.join(self.cwd, *parts)

    def test_help_lists_every_flag(self):
        r = self.ok(["--help"])
        for flag in ["--out", "--seed", "--jobs", "--plot-data", "--config", "--data", "--normalize",
                     "--arch", "--checkpoint", "--attack", "--rho", "--alpha1", "--alpha2", "--eta",
                     "--max-iters", "--delta", "--band", "--metric", "--gamma", "--eps"]:
            self.assertIn(flag, r.stdout)
        for cmd in ["train", "attack", "advtrain", "eval", "bench", "mds", "paths"]:
            self.assertIn(cmd, r.stdout)
            self.ok([cmd, "--help"])

    def test_exit_codes(self):
        self.assertEqual(run(["train", "--no-such-flag"], self.cwd).returncode, 2)
        self.assertEqual(run([], self.cwd).returncode, 2)
        self.assertEqual(run(["train", "--eta", "abc"], self.cwd).returncode, 2)
        self.assertEqual(run(["train", "--arch", "nonsense"], self.cwd).returncode, 2)
        r = run(["attack", "--checkpoint", "absent.ckpt"], self.cwd)
        self.assertEqual(r.returncode, 2)
        self.assertIn("absent.ckpt", r.stderr)
        r = run(["train", "--data", "absent.csv"], self.cwd)
        self.assertEqual(r.returncode, 2)
        self.assertIn("absent.csv", r.stderr)
        with open(self.p("bad.json"), "w") as f:
            json.dump({"attack": {"bogus": 1}}, f)
        self.assertEqual(run(["--config", "bad.json", "attack"], self.cwd).returncode, 2)
        # malformed data is a runtime failure, not a config error
        with open(self.p("bad.csv"), "w") as f:
            f.write("0,1,2,x\n")
        self.assertEqual(run(["train", "--data", "bad.csv", "--length", "3"], self.cwd).returncode, 1)

    def test_train_attack_deterministic_across_jobs(self):
        self.ok(["train", "--out", "a", *QUICK])
        self.ok(["attack", "--out", "a", *QUICK, "--max-iters", "200", "--jobs", "1", "--targets", "all"])
        self.ok(["attack", "--out", "b", "--checkpoint", "a/model.ckpt", *QUICK, "--max-iters", "200",
                 "--jobs", "3", "--targets", "all"])
        for name in ["results.csv", "adversarial.csv", "summary.csv", "pathsim.csv"]:
            self.assertEqual(read(self.p("a", name)), read(self.p("b", name)), name)
        res = rows(self.p("a", "results.csv"))
        self.assertEqual(len(res), 6)
        # path seeds differ per job
        self.assertGreater(len({r["path"] for r in res}), 1)
        summary = {r["metric"]: r["value"] for r in rows(self.p("a", "summary.csv"))}
        fooled = sum(int(r["fooled"]) for r in res)
        self.assertAlmostEqual(float(summary["alpha_eff"]), fooled / len(res))

    def test_training_is_byte_deterministic(self):
        self.ok(["train", "--out", "a", *QUICK])
        self.ok(["train", "--out", "b", *QUICK])
        self.assertEqual(read(self.p("a", "model.ckpt")), read(self.p("b", "model.ckpt")))
        self.assertEqual(read(self.p("a", "train_metrics.csv")), read(self.p("b", "train_metrics.csv")))

    def test_zero_eps_fgs_returns_inputs(self):
        self.ok(["train", "--out", "a", *QUICK])
        self.ok(["attack", "--out", "a", *QUICK, "--attack", "fgs", "--eps", "0"])
        for r in rows(self.p("a", "results.csv")):
            self.assertEqual(float(r["final_dtw"]), 0.0)
            self.assertEqual(float(r["final_l2sq"]), 0.0)
            self.assertEqual(r["prediction"], r["y_source"])

    def test_zero_eps_gradient_sign_keeps_accuracy(self):
        self.ok(["train", "--out", "a", *QUICK])
        self.ok(["eval", "--out", "a", *QUICK, "--eps", "0", "--skip-dtw-ar"])
        rep = {(r["metric"], r["attack"]): float(r["value"]) for r in rows(self.p("a", "report.csv"))}
        clean = rep[("clean_accuracy", "none")]
        self.assertEqual(rep[("robust_accuracy", "fgs")], clean)
        self.assertEqual(rep[("robust_accuracy", "pgd")], clean)

    def test_zero_rounds_matches_plain_training(self):
        common = [*QUICK, "--max-iters", "100"]
        self.ok(["train", "--out", "t", *common])
        self.ok(["eval", "--out", "t", *common])
        self.ok(["advtrain", "--out", "v", *common, "--rounds", "0"])
        self.assertEqual(read(self.p("t", "model.ckpt")), read(self.p("v", "model_adv.ckpt")))
        self.assertEqual(read(self.p("t", "report.csv")), read(self.p("v", "report.csv")))

    def test_config_file_and_overrides(self):
        with open(self.p("c.json"), "w") as f:
            json.dump({"out": "cfg", "epochs": 3, "synth-count": 40, "seed": 5,
                       "attack": {"targets": "per-class"}}, f)
        self.ok(["--config", "c.json", "train"])
        self.ok(["--config", "c.json", "--epochs", "4", "train", "--out", "cfg2"])
        self.assertEqual(len(rows(self.p("cfg", "train_metrics.csv"))), 3)
        self.assertEqual(len(rows(self.p("cfg2", "train_metrics.csv"))), 4)

    def test_outputs_stay_in_out_dir(self):
        before = set(os.listdir(self.cwd))
        self.ok(["train", "--out", "only", *QUICK, "--plot-data"])
        self.ok(["mds", "--out", "only", "--synth-count", "30", "--plot-data"])
        self.ok(["bench", "--out", "only", "--lengths", "8", "--min-window", "0.0005"])
        self.ok(["paths", "--out", "only", "--grid", "5", "--sample", "2"])
        self.assertEqual(set(os.listdir(self.cwd)) - before, {"only"})
        files = set(os.listdir(self.p("only")))
        for name in ["model.ckpt", "train_metrics.dat", "mds_dtw.csv", "mds_l2.gp", "silhouette.csv",
                     "bench.csv", "paths.txt"]:
            self.assertIn(name, files)
        with open(self.p("only", "bench.csv")) as f:
            self.assertEqual(f.readline().strip(),
                             "method,length,channels,repetitions,inner,mean_seconds,std_seconds")

    def test_paths_command(self):
        r = self.ok(["paths", "--out", "p", "--grid", "7", "--sample", "4", "--seed", "2"])
        lines = r.stdout.split()
        self.assertEqual(len(lines), 4)
        for line in lines:
            self.assertTrue(line.startswith("(1,1)") and line.endswith("(7,7)"))
        self.assertEqual(read(self.p("p", "paths.txt")).decode().split(), lines)
        r = self.ok(["paths", "--out", "p", "--sim", "(1,1)-(2,2)-(3,3)", "(1,1)-(2,1)-(3,2)-(3,3)"])
        self.assertAlmostEqual(float(re.search(r"= (\S+)", r.stdout).group(1)), 0.5)
        self.assertEqual(run(["paths", "--out", "p", "--sim", "(1,1)-(3,3)", "(1,1)-(2,2)-(3,3)"],
                             self.cwd).returncode, 2)


if __name__ == "__main__":
    BIN = os.path.abspath(sys.argv.pop(1))
    unittest.main()
