# pleat/io_test.py

import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

from pleat.geometry.curvekit import PlanarCurve, SpaceCurve
from pleat.geometry.surface import StripMesh
from pleat.io.export import write_fields_csv, write_obj
from pleat.io.ingest import CurveIngestor


def circle_frame(radius=2.0, rows=200, closing_row=True, with_s=False):
    t = 2.0 * np.pi * np.arange(rows) / rows
    df = pd.DataFrame({"x": radius * np.cos(t), "y": radius * np.sin(t)})
    if with_s:
        df.insert(0, "s", t)
    if closing_row:
        last = df.iloc[[0]].copy()
        if with_s:
            last["s"] = 2.0 * np.pi
        df = pd.concat([df, last], ignore_index=True)
    return df


class TestIngest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.ingestor = CurveIngestor()

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, df, name="curve.csv"):
        path = self.dir / name
        df.to_csv(path, index=False)
        return path

    def test_closed_planar_curve(self):
        curve = self.ingestor.ingest(self.write(circle_frame()), size=256)
        self.assertIsInstance(curve, PlanarCurve)
        self.assertEqual(curve.size, 256)
        self.assertAlmostEqual(curve.length, 4.0 * np.pi, places=7)
        np.testing.assert_allclose(np.linalg.norm(curve.positions, axis=1), 2.0, atol=1e-8)

    def test_parameter_column(self):
        curve = self.ingestor.ingest(self.write(circle_frame(with_s=True)), size=256)
        self.assertAlmostEqual(curve.length, 4.0 * np.pi, places=7)
        self.assertAlmostEqual(curve.total_turning(), 2.0 * np.pi, places=6)

    def test_space_curve(self):
        t = 2.0 * np.pi * np.arange(300) / 300
        df = pd.DataFrame({"X": np.cos(t), "Y": np.sin(t), "Z": 0.2 * np.sin(2 * t)})
        curve = self.ingestor.ingest(self.write(df), size=128)
        self.assertIsInstance(curve, SpaceCurve)

    def test_missing_column(self):
        df = circle_frame().drop(columns=["y"])
        with self.assertRaisesRegex(ValueError, "missing column 'y'"):
            self.ingestor.ingest(self.write(df))

    def test_non_finite_value(self):
        df = circle_frame()
        df.loc[17, "x"] = np.nan
        with self.assertRaisesRegex(ValueError, "column 'x' at row 17"):
            self.ingestor.ingest(self.write(df))


class TestExport(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_fields_csv_is_stable(self):
        df = pd.DataFrame({"s": [0.0, 0.5], "d": [1.0 / 3.0, np.inf]})
        first = Path(write_fields_csv(df, self.dir / "a.csv")).read_bytes()
        second = Path(write_fields_csv(df, self.dir / "b.csv")).read_bytes()
        self.assertEqual(first, second)
        self.assertNotIn(b"\r\n", first)
        self.assertIn(b"3.333333333333e-01", first)

    def test_obj_groups_and_creases(self):
        u, t = np.meshgrid(np.linspace(0.0, 1.0, 4), np.linspace(0.0, 1.0, 3), indexing="ij")
        grid = np.stack([u, t, np.zeros_like(u)], axis=-1)
        mesh = StripMesh.from_grid(grid, crease_rows=(0, 2))
        path = write_obj(self.dir / "sheet.obj", [("a", mesh), ("b", mesh)])
        lines = Path(path).read_text(encoding="utf-8").splitlines()

        kinds = [line.split()[0] for line in lines]
        self.assertEqual(kinds.count("g"), 2)
        self.assertEqual(kinds.count("v"), 24)
        self.assertEqual(kinds.count("vn"), 24)
        self.assertEqual(kinds.count("f"), 12)
        self.assertEqual(kinds.count("l"), 4)

        faces = [line for line in lines if line.startswith("f ")]
        self.assertEqual(faces[0], "f 1//1 4//4 5//5 2//2")
        self.assertEqual(faces[6], "f 13//13 16//16 17//17 14//14")
        creases = [line for line in lines if line.startswith("l ")]
        self.assertEqual(creases[2], "l 13 16 19 22")


if __name__ == "__main__":
    unittest.main()
