import shutil
import sys
import tempfile
from contextlib import contextmanager
from cProfile import Profile
from os import environ
from os.path import join
from pstats import Stats
from sys import stdout
from unittest import TestCase, skipUnless

import subspace_sparsify.cli
from subspace_sparsify import generators, pipeline


@contextmanager
def cprofile():
    profiler = Profile()

    profiler.enable()
    yield
    profiler.disable()

    stats = Stats(profiler, stream=stdout)
    stats.strip_dirs()
    stats.sort_stats("cumtime")
    stats.print_stats()


@skipUnless(environ.get("PROFILING"), "Profiling not enabled")
class TestProfiling(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp_dir = tempfile.mkdtemp()
        cls.matrix_path = join(cls.tmp_dir, "a.mtx")
        size = environ.get("PROFILING_SIZE", "40")
        subspace_sparsify.cli.main(["gen", "--n", size, "--output", cls.matrix_path, "--no-exit", "--no-verbose"])

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.tmp_dir, ignore_errors=True)

    def test_profile_sparsify(self):
        sparsify_run = subspace_sparsify.cli.main
        sys.argv = ["", "sparsify", "--no-exit", "--no-verbose", "--input", self.matrix_path]
        sys.argv += ["--output", join(self.tmp_dir, "x.mtx"), "--report", join(self.tmp_dir, "report.json")]
        with cprofile():
            res = sparsify_run()

        self.assertEqual(res.status, 0)

    def test_profile_sweep_bins(self):
        a = generators.gen_test_matrix("oscillatory", int(environ.get("PROFILING_SIZE", "40")))
        with cprofile():
            rows = pipeline.sweep_bins(a, 0.8, 1, [8, 64, 512])

        self.assertEqual(len(rows), 3)

    @skipUnless(environ.get("PROFILING_MATRIX"), "No custom matrix set for profiling")
    def test_profile_sparsify_custom(self):
        sparsify_run = subspace_sparsify.cli.main
        matrix_path = environ.get("PROFILING_MATRIX")
        sys.argv = ["", "sparsify", "--no-exit", "--no-verbose", "--input", matrix_path]
        sys.argv += ["--output", join(self.tmp_dir, "custom.mtx"), "--report", join(self.tmp_dir, "custom.json")]

        print(f"Running subspace-sparsify sparsify on {matrix_path}")
        with cprofile():
            sparsify_run()
