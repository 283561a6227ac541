import json
import os
import tempfile
import unittest
from fractions import Fraction

try:
    from l1_basis import basis_file, report
    from l1_basis.seq_core import SingularMatrix, Vector
    from l1_basis.basis_constants import Basis
    from l1_basis.basis_file import BasisFile, BasisFileError
except ImportError:
    import basis_file
    import report
    from seq_core import SingularMatrix, Vector
    from basis_constants import Basis
    from basis_file import BasisFile, BasisFileError

F = Fraction

BLOCK_CSV = """# l1-basis v1 n=3
# labels: x1,x2,x3
1/3,1,1
1/3,1,0
1/3,0,1
"""


class TestParse(unittest.TestCase):
    def test_csv(self):
        bf = basis_file.parse(BLOCK_CSV)
        self.assertEqual(bf.n, 3)
        self.assertEqual(bf.labels, ("x1", "x2", "x3"))
        self.assertEqual(bf.columns[0], (F(1, 3),) * 3)
        self.assertEqual(bf.columns[1], (1, 1, 0))

    def test_csv_round_trip_is_byte_identical(self):
        self.assertEqual(basis_file.serialize(basis_file.parse(BLOCK_CSV)), BLOCK_CSV)

    def test_decimals_are_exact(self):
        bf = basis_file.parse("0.1,0\n0,2.5\n")
        self.assertEqual(bf.columns[0][0], F(1, 10))
        self.assertEqual(bf.columns[1][1], F(5, 2))

    def test_json(self):
        text = basis_file.serialize(basis_file.parse(BLOCK_CSV), "json")
        doc = json.loads(text)
        self.assertEqual(doc["columns"][0], ["1/3", "1/3", "1/3"])
        again = basis_file.parse(text)
        self.assertEqual(again, basis_file.parse(BLOCK_CSV))

    def test_json_integers_accepted(self):
        bf = basis_file.parse('{"format": "l1-basis", "version": 1, "columns": [[1, 0], ["1/2", 1]]}')
        self.assertEqual(bf.columns[1], (F(1, 2), 1))

    def test_json_float_rejected(self):
        with self.assertRaises(BasisFileError) as ctx:
            basis_file.parse('{"format": "l1-basis", "version": 1, "columns": [[0.5, 0], [0, 1]]}')
        self.assertIn("not exact", str(ctx.exception))


class TestParseErrors(unittest.TestCase):
    def test_bad_cell_reports_line(self):
        with self.assertRaises(BasisFileError) as ctx:
            basis_file.parse("# l1-basis v1 n=2\n1,0\n0,abc\n", source="bad.csv")
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn("bad.csv:3", str(ctx.exception))

    def test_ragged_row(self):
        with self.assertRaises(BasisFileError) as ctx:
            basis_file.parse("1,0\n0,1,2\n")
        self.assertEqual(ctx.exception.line, 2)

    def test_not_square(self):
        with self.assertRaises(BasisFileError):
            basis_file.parse("1,0,0\n0,1,0\n")

    def test_header_mismatch(self):
        with self.assertRaises(BasisFileError):
            basis_file.parse("# l1-basis v1 n=3\n1,0\n0,1\n")

    def test_unknown_version(self):
        with self.assertRaises(BasisFileError):
            basis_file.parse("# l1-basis v2\n1\n")

    def test_empty(self):
        with self.assertRaises(BasisFileError):
            basis_file.parse("# l1-basis v1\n")

    def test_missing_file(self):
        with self.assertRaises(BasisFileError):
            basis_file.load(os.path.join(tempfile.gettempdir(), "no-such-basis.csv"))

    def test_singular_is_found_on_conversion(self):
        bf = basis_file.parse("1,2\n2,4\n")
        with self.assertRaises(SingularMatrix):
            bf.to_basis()


class TestBasisConversion(unittest.TestCase):
    def test_from_and_to_basis(self):
        b = Basis.from_vectors([Vector.of(1, 0), Vector.of(1, 1)], labels=["a", "b"])
        bf = BasisFile.from_basis(b)
        self.assertTrue(bf.to_basis().same_vectors(b))
        self.assertEqual(bf.labels, ("a", "b"))

    def test_labels_with_commas_and_edge_spaces_round_trip(self):
        b = Basis.from_vectors([Vector.of(1, 0, 0), Vector.of(0, 1, 0), Vector.of(0, 0, 1)],
                               labels=["a,b", " x", "y "])
        bf = BasisFile.from_basis(b)
        again = basis_file.parse(basis_file.serialize(bf))
        self.assertEqual(again, bf)
        self.assertEqual(again.labels, ("a,b", " x", "y "))

    def test_json_labels_survive_the_csv_form(self):
        doc = '{"format": "l1-basis", "version": 1, "labels": [" x", "p,q"], "columns": [[1, 0], [0, 1]]}'
        bf = basis_file.parse(doc)
        self.assertEqual(basis_file.parse(basis_file.serialize(bf)).labels, (" x", "p,q"))

    def test_plain_labels_stay_unquoted(self):
        self.assertIn("# labels: x1,x2,x3\n", basis_file.serialize(basis_file.parse(BLOCK_CSV)))

    def test_label_line_breaks_rejected(self):
        with self.assertRaises(BasisFileError):
            basis_file.parse('{"format": "l1-basis", "version": 1, "labels": ["a\\nb", "c"], '
                             '"columns": [[1, 0], [0, 1]]}')

    def test_load_from_disk(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "block.csv")
            with open(path, "w", encoding="utf-8") as f:
                f.write(BLOCK_CSV)
            self.assertEqual(basis_file.load(path).n, 3)

    def test_digest_ignores_labels_and_form(self):
        bf = basis_file.parse(BLOCK_CSV)
        unlabeled = BasisFile(bf.version, bf.n, bf.columns, None)
        self.assertEqual(basis_file.digest(bf), basis_file.digest(unlabeled))
        self.assertTrue(basis_file.digest(bf).startswith("sha256:"))
        other = basis_file.parse("1,0\n0,1\n")
        self.assertNotEqual(basis_file.digest(bf), basis_file.digest(other))


class TestReport(unittest.TestCase):
    def test_scalar_entry(self):
        self.assertEqual(report.scalar_entry(F(1, 3), 4), {'exact': '1/3', 'decimal': '0.3333'})

    def test_jsonable(self):
        doc = report.jsonable({'v': Vector.of(1, "1/2"), 'ok': True, 'k': F(2)}, 2)
        self.assertEqual(doc, {'v': ['1', '1/2'], 'ok': True, 'k': {'exact': '2', 'decimal': '2'}})

    def test_dumps_is_deterministic(self):
        a = report.new_report('x', {'b': F(1, 2), 'a': 1})
        b = report.new_report('x', {'a': 1, 'b': F(1, 2)})
        self.assertEqual(report.dumps(a), report.dumps(b))
        self.assertNotIn('time', report.dumps(a))

    def test_trials_frame_drops_instance(self):
        rows = [{'trial': 0, 'holds': True, 'instance': 'x'}, {'trial': 1, 'holds': False, 'instance': 'y'}]
        frame = report.trials_frame(rows)
        self.assertEqual(len(frame), 2)
        self.assertNotIn('instance', frame.columns)

    def test_write_csv(self):
        rows = [{'trial': 0, 'value': F(1, 3), 'holds': True}]
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "rows.csv")
            report.write_csv(rows, path)
            with open(path, encoding="utf-8") as f:
                text = f.read()
        self.assertIn("1/3", text)


if __name__ == '__main__':
    unittest.main()
