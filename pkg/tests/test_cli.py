import csv
import io
import json
import os
import subprocess
import tempfile
from contextlib import redirect_stderr, redirect_stdout

import numpy as np

from subspace_sparsify import cli, matrix_market, utils
from subspace_sparsify.errors import MatrixMarketError
from subspace_sparsify.pattern import pattern_from_mask
from subspace_sparsify.solver import csr_on_pattern
from . import common

# fixture -> line the reader must blame
EXPECTED_ERRORS = {
    "duplicate_entry.mtx": 5,
    "malformed_header.mtx": 1,
    "nan_value.mtx": 4,
    "out_of_bounds.mtx": 4,
    "upper_in_symmetric.mtx": 3,
}


def entry_lines(content: bytes):
    """Entry lines of a rendered Matrix Market file, without header, comments and size line"""
    lines = [line for line in content.decode("UTF-8").splitlines() if line.strip() and not line.startswith("%")]
    return lines[1:]


class TestMatrixMarket(common.SparsifyCommon):
    def test_read_array_column_major(self):
        np.testing.assert_array_equal(
            matrix_market.read_matrix_market(common.matrix_path("example_3x4.mtx")), common.EXAMPLE_3X4
        )

    def test_read_pattern(self):
        path = common.matrix_path("example_3x4_pattern.mtx")
        self.assertEqual(matrix_market.read_pattern(path), pattern_from_mask(common.EXAMPLE_3X4_PATTERN))
        np.testing.assert_array_equal(matrix_market.read_matrix_market(path), common.EXAMPLE_3X4_PATTERN)
        # the nonzeros of an array file
        self.assertEqual(
            matrix_market.read_pattern(common.matrix_path("example_3x4.mtx")).nnz,
            np.count_nonzero(common.EXAMPLE_3X4),
        )

    def test_symmetric_storage(self):
        np.testing.assert_array_equal(
            matrix_market.read_matrix_market(common.matrix_path("symmetric_storage.mtx")),
            [[4.0, -1.5, 0.0], [-1.5, 3.0, 0.25], [0.0, 0.25, 0.0]],
        )
        content = matrix_market.read_matrix_market_content(common.matrix_path("symmetric_storage.mtx"))
        self.assertEqual(content.symmetry, "symmetric")
        self.assertEqual(int(content.stored.sum()), 6)

    def test_hermitian_storage(self):
        np.testing.assert_array_equal(
            matrix_market.read_matrix_market(common.matrix_path("hermitian_storage.mtx")),
            [[2.0, 1.0 + 3.0j], [1.0 - 3.0j, 5.0]],
        )

    def test_skew_symmetric_array(self):
        np.testing.assert_array_equal(
            matrix_market.read_matrix_market(common.matrix_path("skew_symmetric_array.mtx")),
            [[0.0, -1.0, -2.0], [1.0, 0.0, -3.0], [2.0, 3.0, 0.0]],
        )

    def test_errors_name_the_line(self):
        for name, line in EXPECTED_ERRORS.items():
            path = common.matrix_path(name)
            with self.subTest(name=name), self.assertRaises(MatrixMarketError) as err:
                matrix_market.read_matrix_market(path)
            self.assertEqual(err.exception.line, line, f"Wrong line for {name}: {err.exception}")
            self.assertTrue(err.exception.path.endswith(name))
            self.assertIn(f"{name}:{line}: ", str(err.exception))

    def test_missing_file(self):
        with self.assertRaises(OSError):
            matrix_market.read_matrix_market(common.matrix_path("does_not_exist.mtx"))

    def test_dense_round_trip_is_exact(self):
        with tempfile.TemporaryDirectory() as tmp_dir:
            for is_complex in (False, True):
                a = self.random_matrix(5, 3, is_complex) * 10.0 ** self.rng.integers(-300, 300, (5, 3))
                path = os.path.join(tmp_dir, "a.mtx")
                matrix_market.write_matrix_market(path, a)
                with self.subTest(is_complex=is_complex):
                    np.testing.assert_array_equal(matrix_market.read_matrix_market(path), a)

    def test_sparse_sorted_with_stored_zeros(self):
        a = self.random_matrix(4, 5)
        pattern = pattern_from_mask(np.abs(a) > 0.5)
        values = a[pattern.rows, pattern.cols]
        values[0] = 0.0
        x = csr_on_pattern(pattern, values)
        lines = entry_lines(matrix_market.dumps_matrix_market(x))
        positions = [tuple(int(token) for token in line.split()[:2]) for line in lines]
        self.assertEqual(positions, sorted(positions))
        self.assertEqual(len(positions), pattern.nnz)
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = os.path.join(tmp_dir, "x.mtx")
            matrix_market.write_matrix_market(path, x)
            read_back = matrix_market.read_sparse(path)
        self.assertEqual(read_back.nnz, pattern.nnz)
        np.testing.assert_array_equal(read_back.toarray(), x.toarray())


class TestCli(common.SparsifyCommon):
    def setUp(self):
        super().setUp()
        tmp_dir = tempfile.TemporaryDirectory()  # pylint: disable=consider-using-with
        self.addCleanup(tmp_dir.cleanup)
        self.tmp_dir = tmp_dir.name

    def path(self, name):
        return os.path.join(self.tmp_dir, name)

    def run_cli(self, *argv, verbose=False):
        args = list(argv) + ["--no-exit"]
        if not verbose:
            args.append("--no-verbose")
        stderr = io.StringIO()
        with redirect_stderr(stderr):
            res = cli.main(args)
        return res, stderr.getvalue()

    def gen(self, name="a.mtx", *extra):
        res, __ = self.run_cli("gen", "--output", self.path(name), *extra)
        self.assertEqual(res.status, 0)
        return self.path(name)

    def test_help(self):
        help_content = subprocess.check_output(["subspace-sparsify", "--help"], stderr=subprocess.STDOUT).decode(
            "UTF-8"
        )
        for command in cli.COMMANDS:
            self.assertIn(command, help_content)

    def test_gen(self):
        path = self.gen("a.mtx", "--n", "5")
        a = matrix_market.read_matrix_market(path)
        self.assertEqual(a.shape, (5, 5))
        self.assertAlmostEqual(a[0, 0], np.cos(3**0.25) ** 5, places=15)
        for kind in ("paper40", "oscillatory"):
            with self.subTest(kind=kind):
                res, __ = self.run_cli("gen", "--kind", kind, "--n", "5", "--output", self.path(f"{kind}.mtx"))
                self.assertEqual(res.status, 0)
                np.testing.assert_array_equal(matrix_market.read_matrix_market(self.path(f"{kind}.mtx")), a)
        res, __ = self.run_cli("gen", "--kind", "rankdef", "--n", "6", "--rank", "2", "--output", self.path("r.mtx"))
        self.assertEqual(np.linalg.matrix_rank(res.value), 2)

    def test_gen_sparsify_diagnose(self):
        a_path = self.gen()
        res, __ = self.run_cli(
            "sparsify",
            "--input",
            a_path,
            "--output",
            self.path("x.mtx"),
            "--max-bins",
            "64",
            "--report",
            self.path("report.json"),
        )
        self.assertEqual(res.status, 0)
        with open(self.path("report.json"), encoding="UTF-8") as f_report:
            report = json.load(f_report)
        self.assertEqual(report["schema_version"], 1)
        self.assertEqual(report["rank"], 40)
        self.assertEqual(report["solver"], "cholesky")
        self.assertIn("timing", report)
        x = matrix_market.read_sparse(self.path("x.mtx"))
        self.assertEqual(x.nnz, report["nnz"])

        res, __ = self.run_cli(
            "diagnose", "--input", a_path, "--sparse", self.path("x.mtx"), "--output", self.path("diag.json")
        )
        self.assertEqual(res.status, 0)
        with open(self.path("diag.json"), encoding="UTF-8") as f_diag:
            diag = json.load(f_diag)
        self.assertEqual(diag["rank"], 40)
        self.assertEqual(diag["nnz"], report["nnz"])
        self.assertTrue(np.isfinite(diag["cond_pinv_product"]))
        self.assertIsNone(diag["hessian_condition"])

    def test_diagnose_text_to_stdout(self):
        a_path = self.gen("a.mtx", "--n", "6")
        stdout = io.StringIO()
        with redirect_stdout(stdout):
            res, __ = self.run_cli(
                "diagnose", "--input", a_path, "--sparse", a_path, "--hessian", "--format", "text", verbose=True
            )
        self.assertEqual(res.status, 0)
        self.assertIn("cond(A^+ X) = 1", stdout.getvalue())
        self.assertIn("pattern Hessian (36 unknowns)", stdout.getvalue())

    def test_no_timing_is_reproducible(self):
        a_path = self.gen("a.mtx", "--n", "10")
        contents = []
        for run in range(2):
            res, __ = self.run_cli(
                "sparsify",
                "--input",
                a_path,
                "--output",
                self.path(f"x{run}.mtx"),
                "--report",
                self.path(f"r{run}.json"),
                "--no-timing",
            )
            self.assertEqual(res.status, 0)
            with open(self.path(f"r{run}.json"), "rb") as f_report, open(self.path(f"x{run}.mtx"), "rb") as f_x:
                contents.append((f_report.read(), f_x.read()))
        self.assertEqual(contents[0], contents[1])
        self.assertNotIn(b"timing", contents[0][0])

    def test_invalid_ratio(self):
        for argv in (
            ["sparsify", "--input", "a.mtx", "--output", "x.mtx", "--ratio", "1.5"],
            ["pattern", "--input", "a.mtx", "--output", "x.mtx", "--p", "-1"],
            ["sweep-bins", "--input", "a.mtx", "--bins", ","],
        ):
            with self.subTest(argv=argv), self.assertRaises(SystemExit) as exit_err:
                self.run_cli(*argv)
            self.assertEqual(exit_err.exception.code, 2)

    def test_input_error_leaves_no_output(self):
        output = self.path("x.mtx")
        res, stderr = self.run_cli("sparsify", "--input", common.matrix_path("nan_value.mtx"), "--output", output)
        self.assertEqual(res.status, 1)
        self.assertFalse(os.path.exists(output))
        self.assertIn("nan_value.mtx:4:", stderr)
        self.assertTrue(stderr.startswith("subspace-sparsify sparsify: "))
        self.assertEqual(os.listdir(self.tmp_dir), [])

    def test_missing_input_message(self):
        res, stderr = self.run_cli("pattern", "--input", self.path("missing.mtx"), "--output", self.path("p.mtx"))
        self.assertEqual(res.status, 1)
        self.assertIn("No such file or directory", stderr)
        self.assertIn("missing.mtx", stderr)
        self.assertNotIn("malformed header", stderr)

    def test_unwritable_report_leaves_no_output(self):
        a_path = self.gen("a.mtx", "--n", "5")
        report = os.path.join(self.tmp_dir, "no_such_dir", "r.json")
        res, stderr = self.run_cli("sparsify", "--input", a_path, "--output", self.path("x.mtx"), "--report", report)
        self.assertEqual(res.status, 1)
        self.assertFalse(os.path.exists(self.path("x.mtx")))
        self.assertIn(os.path.join("no_such_dir", "r.json"), stderr)
        self.assertNotIn(".tmp-", stderr)
        self.assertEqual(os.listdir(self.tmp_dir), ["a.mtx"])

    def test_atomic_write_all(self):
        utils.atomic_write_all({self.path("one.txt"): "1", self.path("two.txt"): b"2"})
        with open(self.path("one.txt"), encoding="UTF-8") as f_one, open(self.path("two.txt"), "rb") as f_two:
            self.assertEqual((f_one.read(), f_two.read()), ("1", b"2"))
        with self.assertRaises(OSError):
            utils.atomic_write_all({self.path("three.txt"): "3", self.path("missing/four.txt"): "4"})
        self.assertEqual(sorted(os.listdir(self.tmp_dir)), ["one.txt", "two.txt"])

    def test_structure_error_keeps_old_output(self):
        a_path = self.gen("a.mtx", "--kind", "rankdef", "--n", "5")
        output = self.path("x.mtx")
        with open(output, "w", encoding="UTF-8") as f_old:
            f_old.write("old")
        res, stderr = self.run_cli("sparsify", "--input", a_path, "--output", output, "--matrix-type", "hermitian")
        self.assertEqual(res.status, 1)
        self.assertIn("[structure]", stderr)
        with open(output, encoding="UTF-8") as f_old:
            self.assertEqual(f_old.read(), "old")

    def test_exit_code(self):
        with redirect_stderr(io.StringIO()), self.assertRaises(SystemExit) as exit_err:
            cli.main(
                ["sparsify", "--input", self.path("missing.mtx"), "--output", self.path("x.mtx"), "--no-verbose"]
            )
        self.assertEqual(exit_err.exception.code, 1)

    def test_pattern_command(self):
        res, __ = self.run_cli(
            "pattern",
            "--input",
            common.matrix_path("example_3x4.mtx"),
            "--output",
            self.path("pattern.mtx"),
            "--ratio",
            "0.6",
            "--p",
            "1",
        )
        self.assertEqual(res.status, 0)
        self.assertEqual(res.value.nnz, 9)
        self.assertEqual(matrix_market.read_pattern(self.path("pattern.mtx")), res.value)
        content = matrix_market.read_matrix_market_content(self.path("pattern.mtx"))
        self.assertEqual(content.field, "pattern")
        np.testing.assert_array_equal(content.matrix, common.EXAMPLE_3X4_PATTERN)

    def test_bins_command(self):
        res, __ = self.run_cli(
            "bins",
            "--input",
            common.matrix_path("example_3x4.mtx"),
            "--output",
            self.path("bins.mtx"),
            "--pattern",
            common.matrix_path("example_3x4_pattern.mtx"),
            "--max-bins",
            "8",
        )
        self.assertEqual(res.status, 0)
        content = matrix_market.read_matrix_market_content(self.path("bins.mtx"))
        self.assertEqual(content.field, "integer")
        np.testing.assert_array_equal(content.matrix, [[3, 0, 0, 2], [2, 5, 1, 4], [0, 6, 1, 2]])

    def test_bins_command_complex(self):
        res, __ = self.run_cli(
            "bins",
            "--input",
            common.matrix_path("hermitian_storage.mtx"),
            "--output",
            self.path("bins.mtx"),
            "--ratio",
            "1",
        )
        self.assertEqual(res.status, 0)
        bins = res.value
        self.assertTrue(bins.is_complex)
        ids = matrix_market.read_matrix_market(self.path("bins.mtx"))
        np.testing.assert_array_equal(ids.real, bins.id_matrix())
        np.testing.assert_array_equal(ids[bins.pattern.rows, bins.pattern.cols].imag, bins.imag_ids)

    def test_sparsify_for_pattern(self):
        res, __ = self.run_cli(
            "sparsify",
            "--input",
            common.matrix_path("example_3x4.mtx"),
            "--pattern",
            common.matrix_path("example_3x4_pattern.mtx"),
            "--output",
            self.path("x.mtx"),
            "--report",
            self.path("report.txt"),
            "--format",
            "text",
        )
        self.assertEqual(res.status, 0)
        self.assertEqual(res.value.nnz, 9)
        self.assertEqual(
            matrix_market.read_pattern(self.path("x.mtx")), pattern_from_mask(common.EXAMPLE_3X4_PATTERN)
        )
        with open(self.path("report.txt"), encoding="UTF-8") as f_report:
            self.assertIn("9 unknowns", f_report.read())

    def test_sparsify_exact(self):
        a_path = self.gen("a.mtx", "--kind", "rankdef", "--n", "6", "--rank", "4")
        res, __ = self.run_cli(
            "sparsify", "--input", a_path, "--output", self.path("x.mtx"), "--exact", "--impose-nullspaces"
        )
        self.assertEqual(res.status, 0)
        self.assertEqual(res.value.solver, "exact")
        self.assertEqual(res.value.rank, 4)
        self.assertLess(res.value.right_null_residual, 1e-8)
        self.assertLess(res.value.left_null_residual, 1e-8)

    def test_sweep_bins_json(self):
        a_path = self.gen("a.mtx", "--n", "12")
        res, __ = self.run_cli(
            "sweep-bins", "--input", a_path, "--bins", "16,4", "--output", self.path("sweep.json"), "--no-timing"
        )
        self.assertEqual(res.status, 0)
        with open(self.path("sweep.json"), encoding="UTF-8") as f_sweep:
            document = json.load(f_sweep)
        self.assertEqual(document["schema_version"], 1)
        self.assertEqual(document["ratio"], 0.8)
        self.assertEqual(document["p"], 1.0)
        self.assertNotIn("timing", document)
        self.assertEqual([row["max_bins"] for row in document["rows"]], [4, 16])
        self.assertEqual([row["n_bins"] for row in document["rows"]], [row.n_bins for row in res.value])

    def test_sweep_bins_csv(self):
        a_path = self.gen("a.mtx", "--n", "12")
        res, __ = self.run_cli(
            "sweep-bins", "--input", a_path, "--bins", "4,16,64", "--output", self.path("sweep.csv")
        )
        self.assertEqual(res.status, 0)
        with open(self.path("sweep.csv"), encoding="UTF-8", newline="") as f_sweep:
            rows = list(csv.reader(f_sweep))
        self.assertEqual(tuple(rows[0]), cli.SWEEP_CSV_COLUMNS)
        self.assertEqual([int(row[0]) for row in rows[1:]], [4, 16, 64])
        self.assertEqual([float(row[4]) for row in rows[1:]], [row.objective_value for row in res.value])
