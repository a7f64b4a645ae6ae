"""Unit tests for run reports, the benchmark sweep and the random baseline"""
import os
import tempfile
from unittest import TestCase
from unittest.mock import patch

import pandas as pd
import pytest
import yaml

from vcsndp.builder import BuilderConfig, ConstructionResult, construct_family
from vcsndp.formats import write_family
from vcsndp.labels import Variant
from vcsndp.report import BENCH_COLUMNS, RunReport, run_benchmark, run_random_baseline, write_benchmark_csv


class TestRunReport(TestCase):
    """Tests for RunReport"""

    def test_from_construction(self):
        """The report carries the family numbers and the measurements"""
        result = construct_family(3, 2)
        report = RunReport.from_construction(result, BuilderConfig())
        self.assertTrue(report.strongly_good)
        self.assertEqual(result.family.params.subset_count, report.subset_count)
        self.assertEqual(result.steps, report.steps)
        data = report.as_dict()
        self.assertEqual(result.max_steps, data["max_steps"])
        self.assertEqual(4, data["params"]["A"])

    def test_load_recomputes(self):
        """Loading trusts the family file over the report"""
        config = BuilderConfig()
        result = construct_family(3, 2, config=config)
        with tempfile.TemporaryDirectory() as tmp:
            fam_path = os.path.join(tmp, "fam.txt")
            report_path = os.path.join(tmp, "report.yaml")
            write_family(result.family, fam_path)
            RunReport.from_construction(result, config, family_path="fam.txt").write(report_path)

            with open(report_path, encoding="utf-8") as f:
                data = yaml.safe_load(f)
            data["R_size"] = 1
            data["escalations"] = 7
            data["params"]["gamma"] = 4
            with open(report_path, "w", encoding="utf-8") as f:
                yaml.safe_dump(data, f)

            with self.assertLogs("vcsndp.report", level="WARNING"):
                loaded = RunReport.load(report_path)
        self.assertEqual(result.family.params.subset_count, loaded.subset_count)
        self.assertEqual(result.family.params.escalations, loaded.escalations)
        self.assertEqual(result.family.params.gamma, loaded.params["gamma"])
        self.assertEqual(result.steps, loaded.steps)
        self.assertTrue(loaded.strongly_good)

    def test_load_needs_family(self):
        """A report without a family path cannot be recomputed"""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "report.yaml")
            with open(path, "w", encoding="utf-8") as f:
                yaml.safe_dump({"steps": [1]}, f)
            with self.assertRaises(ValueError):
                RunReport.load(path)


class TestBenchmark(TestCase):
    """Tests for the benchmark sweep"""

    def test_small_grid(self):
        """One row per grid point, identical across trials"""
        frame = run_benchmark([2, 3], [2], variants=["general", "ss"], trials=2)
        self.assertEqual(4, len(frame))
        self.assertEqual(BENCH_COLUMNS + ["identical"], list(frame.columns))
        self.assertTrue(frame["identical"].all())
        self.assertTrue((frame["R_size"] == frame["gamma"] * 4).all())

    def test_csv(self):
        """The CSV holds exactly the benchmark columns"""
        frame = run_benchmark([2], [1], trials=1)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bench.csv")
            write_benchmark_csv(frame, path)
            loaded = pd.read_csv(path)
        self.assertEqual(BENCH_COLUMNS, list(loaded.columns))
        self.assertEqual(4, int(loaded["gamma"].iloc[0]))

    def test_median_wall_time(self):
        """wall_ms is the median over the trials"""
        fam = construct_family(2, 1).family
        timed = [ConstructionResult(family=fam, iterations=[], wall_ms=ms) for ms in (5.0, 1.0, 3.0)]
        with patch("vcsndp.report.construct_family", side_effect=timed):
            frame = run_benchmark([2], [1], trials=3)
        self.assertEqual(3.0, frame["wall_ms"].iloc[0])
        self.assertTrue(frame["identical"].iloc[0])

    def test_bad_trials(self):
        """At least one trial"""
        with self.assertRaises(ValueError):
            run_benchmark([2], [1], trials=0)

    @pytest.mark.slow
    def test_large_grid(self):
        """Every grid point builds, with gamma a multiple of the alphabet size"""
        frame = pd.concat([run_benchmark([16], [2, 3, 4], variants=[Variant.GENERAL]),
                           run_benchmark([16, 64, 256], [3], variants=[Variant.SINGLE_SOURCE])], ignore_index=True)
        self.assertEqual(6, len(frame))
        for _, row in frame.iterrows():
            self.assertEqual(0, row["gamma"] % (2 * row["k"]))
            self.assertEqual(row["gamma"] * 2 * row["k"], row["R_size"])
            self.assertLessEqual(row["escalations"], 8)


class TestRandomBaseline(TestCase):
    """Tests for the random baseline measurement"""

    def test_rows(self):
        """One row per seed with consistent counts"""
        frame = run_random_baseline(8, 2, seeds=range(5))
        self.assertEqual(list(range(5)), frame["seed"].tolist())
        for _, row in frame.iterrows():
            self.assertEqual(bool(row["success"]), row["violations"] == 0 and row["duplicates"] == 0)

    def test_deterministic(self):
        """Seeds fix the outcome"""
        first = run_random_baseline(8, 2, Variant.SINGLE_SOURCE, seeds=range(4))
        second = run_random_baseline(8, 2, Variant.SINGLE_SOURCE, seeds=range(4))
        pd.testing.assert_frame_equal(first, second)
