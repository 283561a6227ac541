import io
import json
import os
import tempfile
import unittest
from unittest.mock import patch

try:
    from l1_basis import cli
    from l1_basis.engine import SuiteResult
    from l1_basis.seq_core import BasisError
except ImportError:
    import cli
    from engine import SuiteResult
    from seq_core import BasisError

BLOCK = "# l1-basis v1 n=3\n1/3,1,1\n1/3,1,0\n1/3,0,1\n"
TWO_BY_TWO = "1,1\n0,1\n"
STANDARD_2 = "1,0\n0,1\n"
SHIFTED_2 = "5/4,1/4\n0,1\n"


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name
        self.config = os.path.join(self.tmp, "settings.json")

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, name: str, text: str) -> str:
        path = os.path.join(self.tmp, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def run_cli(self, *argv: str):
        out = io.StringIO()
        code = cli.run(list(argv) + ["--config", self.config], stdout=out)
        return code, out.getvalue()

    def run_json(self, *argv: str):
        code, text = self.run_cli(*argv, "--json")
        return code, json.loads(text)


class TestParserExits(CliTestCase):
    def test_version(self):
        with patch('sys.stdout', new_callable=io.StringIO):
            self.assertEqual(cli.run(["--version"]), cli.EXIT_OK)

    def test_missing_command(self):
        with patch('sys.stderr', new_callable=io.StringIO):
            self.assertEqual(cli.run([]), cli.EXIT_INPUT)

    def test_unknown_statement(self):
        with patch('sys.stderr', new_callable=io.StringIO):
            self.assertEqual(self.run_cli("verify", "lemma2")[0], cli.EXIT_INPUT)


class TestAnalyze(CliTestCase):
    def test_construction_block(self):
        code, rep = self.run_json("analyze", self.write("block.csv", BLOCK))
        self.assertEqual(code, cli.EXIT_OK)
        c = rep['constants']
        self.assertEqual(c['k1']['exact'], "1/5")
        self.assertEqual(c['k2']['exact'], "2")
        self.assertEqual([d['exact'] for d in rep['dual_norms']], ["3", "1", "1"])
        self.assertTrue(rep['input_digest'].startswith("sha256:"))
        self.assertIn('K', rep['provenance'])

    def test_two_by_two_witnesses_are_one_based(self):
        code, rep = self.run_json("analyze", self.write("t.csv", TWO_BY_TWO))
        self.assertEqual(code, cli.EXIT_OK)
        c = rep['constants']
        self.assertEqual((c['k1']['exact'], c['k2']['exact'], c['K']['exact']), ("1/2", "2", "3"))
        self.assertEqual(c['K_witness'], [1, -1])
        self.assertEqual(c['k2_witness'], 2)

    def test_json_is_deterministic(self):
        path = self.write("block.csv", BLOCK)
        self.assertEqual(self.run_cli("analyze", path, "--json")[1], self.run_cli("analyze", path, "--json")[1])

    def test_against(self):
        x, y = self.write("x.csv", STANDARD_2), self.write("y.csv", SHIFTED_2)
        code, rep = self.run_json("analyze", x, "--against", y, "--delta", "1/3")
        self.assertEqual(code, cli.EXIT_OK)
        section = rep['perturbation']['against']
        self.assertEqual(section['m']['exact'], "1/4")
        self.assertTrue(section['dominated'])
        self.assertEqual((section['K1']['exact'], section['K2']['exact']), ("4/5", "6/5"))
        self.assertEqual((section['sandwich_low']['exact'], section['sandwich_high']['exact']), ("4/5", "4/3"))
        self.assertTrue(section['sandwich_holds'])

    def test_against_dimension_mismatch(self):
        code, _ = self.run_cli("analyze", self.write("x.csv", STANDARD_2), "--against", self.write("b.csv", BLOCK))
        self.assertEqual(code, cli.EXIT_INPUT)

    def test_delta_needs_a_target(self):
        code, _ = self.run_cli("analyze", self.write("x.csv", STANDARD_2), "--delta", "1/3")
        self.assertEqual(code, cli.EXIT_INPUT)

    def test_min_delta(self):
        normalized = "# l1-basis v1 n=3\n1/3,1/2,1/2\n1/3,1/2,0\n1/3,0,1/2\n"
        code, rep = self.run_json("analyze", self.write("nb.csv", normalized), "--min-delta", "--delta", "3/2")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(rep['perturbation']['delta_min']['exact'], "4/3")
        self.assertTrue(rep['perturbation']['dominated_for_delta'])

    def test_thm2_needs_normalized(self):
        code, rep = self.run_json("analyze", self.write("block.csv", BLOCK), "--thm2")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn('not_applicable', rep['certificates']['thm2'])

    def test_thm2_on_standard(self):
        code, rep = self.run_json("analyze", self.write("s.csv", STANDARD_2), "--thm2")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertTrue(rep['certificates']['thm2']['holds'])

    def test_text_report(self):
        code, text = self.run_cli("analyze", self.write("block.csv", BLOCK))
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("1/5", text)

    def test_singular(self):
        self.assertEqual(self.run_cli("analyze", self.write("s.csv", "1,2\n2,4\n"))[0], cli.EXIT_SINGULAR)

    def test_malformed_and_missing(self):
        self.assertEqual(self.run_cli("analyze", self.write("bad.csv", "1,x\n0,1\n"))[0], cli.EXIT_INPUT)
        self.assertEqual(self.run_cli("analyze", os.path.join(self.tmp, "absent.csv"))[0], cli.EXIT_INPUT)

    def test_cap(self):
        path = self.write("i5.csv", "1,0,0,0,0\n0,1,0,0,0\n0,0,1,0,0\n0,0,0,1,0\n0,0,0,0,1\n")
        code, rep = self.run_json("analyze", path, "--cap", "3")
        self.assertEqual(code, cli.EXIT_CAP)
        self.assertIsNone(rep['constants']['K'])
        self.assertIn('--force-cap', rep['constants']['K_skipped'])
        code, rep = self.run_json("analyze", path, "--cap", "3", "--force-cap")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(rep['constants']['K']['exact'], "1")


class TestConstruct(CliTestCase):
    def test_prop1_csv(self):
        code, text = self.run_cli("construct", "prop1", "--n", "3")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(text, BLOCK)

    def test_prop1_verify_json(self):
        code, rep = self.run_json("construct", "prop1", "--n", "6", "--verify")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertTrue(all(rep['checks'].values()))
        self.assertIn("# l1-basis v1 n=6", rep['basis_file'])

    def test_prop1_sum_to_file(self):
        path = os.path.join(self.tmp, "sum.json")
        code, text = self.run_cli("construct", "prop1_sum", "--sizes", "3,4,5", "--verify",
                                  "--format", "json", "-o", path)
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(text, "")
        with open(path, encoding="utf-8") as f:
            self.assertEqual(json.load(f)['n'], 12)

    def test_random_is_seeded(self):
        first = self.run_cli("construct", "random", "--n", "4", "--seed", "5", "--normalized", "--verify")
        second = self.run_cli("construct", "random", "--n", "4", "--seed", "5", "--normalized", "--verify")
        self.assertEqual(first, second)
        self.assertEqual(first[0], cli.EXIT_OK)

    def test_input_errors(self):
        self.assertEqual(self.run_cli("construct", "prop1")[0], cli.EXIT_INPUT)
        self.assertEqual(self.run_cli("construct", "prop1", "--n", "2")[0], cli.EXIT_INPUT)
        self.assertEqual(self.run_cli("construct", "prop1_sum")[0], cli.EXIT_INPUT)
        self.assertEqual(self.run_cli("construct", "random", "--n", "3", "--mode", "near_standard",
                                      "--radius=-1/4")[0], cli.EXIT_INPUT)

    def test_biorthogonality_failure_is_recorded(self):
        code, rep = self.run_json("construct", "random", "--n", "3", "--verify")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertTrue(rep['checks']['biorthogonal'])
        with patch.object(cli, 'coefficient_functionals', side_effect=BasisError("biorthogonality failed")):
            code, rep = self.run_json("construct", "random", "--n", "3", "--verify")
        self.assertEqual(code, cli.EXIT_VIOLATION)
        self.assertFalse(rep['checks']['biorthogonal'])


class TestVerify(CliTestCase):
    def test_lemma1(self):
        code, rep = self.run_json("verify", "lemma1", "--trials", "10", "--n", "3")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(rep['status'], "ok")
        self.assertEqual(rep['summary']['trials'], 10)

    def test_prop1_text(self):
        code, text = self.run_cli("verify", "prop1", "--n-range", "3..6", "--precision", "3")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("2/7", text)

    def test_c2_with_csv(self):
        path = os.path.join(self.tmp, "c2.csv")
        code, _ = self.run_cli("verify", "c2", "--n-range", "3..5", "--csv", path)
        self.assertEqual(code, cli.EXIT_OK)
        with open(path, encoding="utf-8") as f:
            self.assertIn("4/3", f.read())

    def test_basis_file(self):
        code, rep = self.run_json("verify", "unconditional", "--basis", self.write("t.csv", TWO_BY_TWO))
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(rep['rows'][0]['K']['exact'], "3")

    def test_cap(self):
        self.assertEqual(self.run_cli("verify", "unconditional", "--n", "30", "--trials", "1")[0], cli.EXIT_CAP)

    def test_violation_exit_code(self):
        failed = SuiteResult('lemma1', {}, [{'trial': 0, 'n': 2, 'holds': False, 'instance': STANDARD_2}],
                             summary={'trials': 1, 'violations': 1, 'not_applicable': 0})
        with patch.object(cli.VerifyEngine, 'run', return_value=failed):
            code, rep = self.run_json("verify", "lemma1", "--trials", "1")
        self.assertEqual(code, cli.EXIT_VIOLATION)
        self.assertEqual(rep['status'], "violations")


class TestSearchC(CliTestCase):
    def test_prop1_family(self):
        code, rep = self.run_json("search-c", "--family", "prop1", "--n-range", "3..5")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(rep['summary']['best']['exact'], "8/5")

    def test_text(self):
        code, text = self.run_cli("search-c", "--n-range", "2..4", "--trials", "5")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertTrue(text)


class TestSettings(CliTestCase):
    def test_save_and_reuse(self):
        self.run_cli("construct", "prop1", "--n", "3", "--seed", "9", "--save-config")
        with open(self.config, encoding="utf-8") as f:
            self.assertEqual(json.load(f)['seed'], 9)
        code, rep = self.run_json("construct", "random", "--n", "3")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(rep['params']['seed'], 9)


if __name__ == '__main__':
    unittest.main()
