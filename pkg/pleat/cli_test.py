# pleat/cli_test.py

import contextlib
import io
import json
import tempfile
import unittest
from pathlib import Path

from pleat.cli import main
from pleat.config import PROFILES


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


class TestCli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_config(self, data):
        path = self.dir / "job.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    def test_show_defaults(self):
        code, out, _ = run(["--show-defaults"])
        self.assertEqual(code, 0)
        payload = json.loads(out)
        self.assertEqual(payload["settings"]["resolution"], 2048)
        self.assertEqual(set(payload["profiles"]), set(PROFILES))

    def test_invalid_config_names_field(self):
        data = dict(PROFILES["fig1"], resolution=-4)
        code, _, err = run(["ridge", "--config", self.write_config(data)])
        self.assertEqual(code, 2)
        self.assertIn("resolution", err)

    def test_bad_family_is_config_error(self):
        data = dict(PROFILES["fig1"], foldlines={"radii": [1.0, 0.9], "seed_index": 0})
        code, _, err = run(["ridge", "--config", self.write_config(data)])
        self.assertEqual(code, 2)
        self.assertIn("foldlines", err)

    def test_missing_job(self):
        code, _, err = run(["ridge"])
        self.assertEqual(code, 2)
        self.assertIn("error:", err)

    def test_fold_csv_is_deterministic(self):
        outputs = []
        for name in ("a", "b"):
            out_dir = self.dir / name
            code, stdout, _ = run(["fold", "--profile", "fig1", "--resolution", "256", "--out", str(out_dir)])
            self.assertEqual(code, 0)
            self.assertEqual(json.loads(stdout)["status"], "ok")
            outputs.append((out_dir / "seed_fold.csv").read_bytes())
        self.assertEqual(outputs[0], outputs[1])

    def test_report_is_written(self):
        out_dir = self.dir / "ridge"
        code, stdout, _ = run(["ridge", "--profile", "fig3", "--resolution", "256", "--out", str(out_dir)])
        self.assertEqual(code, 0)
        summary = json.loads(stdout)
        self.assertTrue((out_dir / "report.json").exists())
        self.assertTrue((out_dir / "ridge.csv").exists())
        workbooks = list(out_dir.glob("report_fig3_*.xlsx"))
        self.assertEqual(len(workbooks), 1)
        self.assertIn(summary["config_digest"][:12], workbooks[0].name)


if __name__ == "__main__":
    unittest.main()
