import json

import pytest

from src.utils.linear_code import LinearCode, code_equal

EXAMPLE1 = "1+D^2, 1+D+D^2"
EXAMPLE2 = "1+D^2, 2+D, 0; 1, 0, 2"

SPC_REALIZATION = {
    "p": 2,
    "fragment": True,
    "vars": [
        {"id": "S0", "kind": "state", "dim": 1},
        {"id": "A0", "kind": "symbol", "dim": 1},
        {"id": "S1", "kind": "state", "dim": 1},
    ],
    "constraints": [
        {
            "id": "C0",
            "generators": ["011", "101"],
            "ports": [
                {"var": "S0", "sign": 1},
                {"var": "A0", "sign": 1},
                {"var": "S1", "sign": 1},
            ],
        }
    ],
}


def invoke(runner, *args):
    return runner.invoke(args=["codes", *[str(a) for a in args]])


def read(path):
    return json.loads(path.read_text())


def block_code(document, index=0):
    return LinearCode.from_digit_strings(
        document["p"], document["constraints"][index]["generators"]
    )


@pytest.fixture
def example1_file(runner, tmp_path):
    out = tmp_path / "example1.json"
    result = invoke(runner, "build", "--p", 2, "--generators", EXAMPLE1, "--out", out)
    assert result.exit_code == 0, result.output
    return out


@pytest.fixture
def example2_file(runner, tmp_path):
    out = tmp_path / "example2.json"
    result = invoke(runner, "build", "--p", 3, "--generators", EXAMPLE2, "--out", out)
    assert result.exit_code == 0, result.output
    return out


@pytest.fixture
def cycle_file(runner, tmp_path):
    out = tmp_path / "cycle.json"
    result = invoke(
        runner,
        "build",
        "--p", 2,
        "--generators", EXAMPLE1,
        "--sections", 2,
        "--closure", "tailbite",
        "--out", out,
    )
    assert result.exit_code == 0, result.output
    return out


class TestBuildCommand:
    """codes build"""

    def test_example1_section(self, example1_file):
        """Test the (6, 3) constraint of the binary section."""
        document = read(example1_file)
        assert document["fragment"] is True
        expected = LinearCode.from_digit_strings(2, ["001110", "100101", "011100"])
        assert code_equal(block_code(document), expected)

    def test_example2_section(self, example2_file):
        """Test the (7, 4) constraint of the ternary section."""
        code = block_code(read(example2_file))
        assert (code.n, code.dimension) == (7, 4)

    def test_output_is_deterministic(self, runner, example1_file):
        """Test that building twice writes the same bytes."""
        result = invoke(runner, "build", "--p", 2, "--generators", EXAMPLE1)
        assert result.output == example1_file.read_text()

    def test_bad_coefficient(self, runner):
        """Test exit code 2 and the error location for a coefficient >= p."""
        result = invoke(runner, "build", "--p", 2, "--generators", "1+2D, 1")
        assert result.exit_code == 2
        assert "error: coefficient 2" in result.output
        assert "offset 2" in result.output

    def test_non_prime(self, runner):
        """Test that p must be prime."""
        result = invoke(runner, "build", "--p", 4, "--generators", "1, 1")
        assert result.exit_code == 2


class TestDualCommand:
    """codes dual"""

    def test_example1_dual(self, runner, example1_file, tmp_path):
        """Test the dual constraint and the sign inverter report."""
        out = tmp_path / "dual.json"
        result = invoke(runner, "dual", example1_file, "--out", out)
        assert result.exit_code == 0, result.output
        assert "sign inverter: S1 at C0 port 2 (-)" in result.output
        expected = LinearCode.from_digit_strings(2, ["001101", "011010", "101100"])
        assert code_equal(block_code(read(out)), expected)

    def test_dual_twice_keeps_the_code(self, runner, cycle_file, tmp_path):
        """Test that two dualizations realize the original code."""
        once, twice = tmp_path / "once.json", tmp_path / "twice.json"
        assert invoke(runner, "dual", cycle_file, "--out", once).exit_code == 0
        assert invoke(runner, "dual", once, "--out", twice).exit_code == 0

        original = invoke(runner, "behavior", cycle_file)
        restored = invoke(runner, "behavior", twice)
        assert original.exit_code == 0
        assert json.loads(original.output) == json.loads(restored.output)

    def test_missing_file(self, runner, tmp_path):
        """Test a realization file that does not exist."""
        result = invoke(runner, "dual", tmp_path / "nope.json")
        assert result.exit_code == 2


class TestWamCommand:
    """codes wam"""

    def test_primal_cwam(self, runner, example1_file):
        """Test the JSON rendering of the binary CWAM."""
        result = invoke(runner, "wam", example1_file)
        assert result.exit_code == 0, result.output
        document = json.loads(result.output)
        assert document["rows"] == ["00", "10", "01", "11"]
        assert document["entries"][0][0] == [
            {"exps": [2, 0], "coeff": {"den": "1", "num": ["1"]}}
        ]
        assert document["entries"][1][0] == []

    def test_dual_domains_agree(self, runner, example1_file):
        """Test that the transformed and the enumerated dual WAMs print the same."""
        transformed = invoke(runner, "wam", example1_file, "--domain", "dual-transform")
        direct = invoke(runner, "wam", example1_file, "--domain", "dual-direct")
        assert transformed.exit_code == 0
        assert transformed.output == direct.output
        assert json.loads(direct.output)["domain"] == "dual"

    def test_hwam(self, runner, example1_file):
        """Test the HWAM rendering."""
        result = invoke(runner, "wam", example1_file, "--kind", "hwam")
        document = json.loads(result.output)
        assert document["kind"] == "hwam"
        assert document["entries"][0][1] == ["0", "0", "1"]

    def test_generating_function(self, runner, example1_file):
        """Test the generating-function rendering."""
        result = invoke(runner, "wam", example1_file, "--render", "gf")
        assert "w0 w1 (y_10 z_01" in result.output

    def test_unknown_constraint(self, runner, example1_file):
        """Test a constraint id that is not in the file."""
        result = invoke(runner, "wam", example1_file, "--constraint", "C7")
        assert result.exit_code == 2


class TestVerifyCommand:
    """codes verify"""

    def test_example1_passes(self, runner, example1_file):
        """Test PASS on the binary section."""
        result = invoke(runner, "verify", example1_file)
        assert result.exit_code == 0, result.output
        assert "C0: CWAM PASS, HWAM PASS" in result.output
        assert result.output.strip().splitlines()[-1] == "PASS"

    def test_example2_passes(self, runner, example2_file):
        """Test PASS on the ternary section."""
        result = invoke(runner, "verify", example2_file, "--all")
        assert result.exit_code == 0, result.output

    def test_cycle_checks_code_duality(self, runner, cycle_file):
        """Test the realized-code duality line for a closed realization."""
        result = invoke(runner, "verify", cycle_file)
        assert result.exit_code == 0, result.output
        assert "realized code duality: PASS" in result.output

    def test_corrupted_claimed_dual(self, runner, cycle_file, tmp_path):
        """Test exit code 1 when a claimed dual constraint is wrong."""
        dual_file = tmp_path / "dual.json"
        assert invoke(runner, "dual", cycle_file, "--out", dual_file).exit_code == 0
        corrupted = read(dual_file)
        corrupted["constraints"][0]["generators"] = read(cycle_file)["constraints"][0][
            "generators"
        ]
        dual_file.write_text(json.dumps(corrupted))

        result = invoke(runner, "verify", cycle_file, "--against", dual_file)
        assert result.exit_code == 1
        assert result.output.strip().splitlines()[-1] == "FAIL"

    def test_correct_claimed_dual(self, runner, cycle_file, tmp_path):
        """Test that the computed dual passes as a claimed dual."""
        dual_file = tmp_path / "dual.json"
        assert invoke(runner, "dual", cycle_file, "--out", dual_file).exit_code == 0
        result = invoke(runner, "verify", cycle_file, "--against", dual_file)
        assert result.exit_code == 0, result.output

    def test_constraint_and_all_conflict(self, runner, example1_file):
        """Test that --constraint and --all cannot be combined."""
        result = invoke(runner, "verify", example1_file, "--constraint", "C0", "--all")
        assert result.exit_code == 2


class TestSpaCommand:
    """codes spa"""

    def setup_method(self):
        """Set up test fixtures before each test method."""
        self.message = {"group": {"p": 2, "dim": 1}, "values": ["2", "3"]}
        self.weights = {"group": {"p": 2, "dim": 1}, "values": ["5", "7"]}

    def spa(self, runner, tmp_path, *options):
        realization, m, f = self.write_inputs(tmp_path)
        args = ["spa", realization, "--message", m, "--weights", f, *options]
        return invoke(runner, *args)

    def write_inputs(self, tmp_path):
        realization = tmp_path / "spc.json"
        realization.write_text(json.dumps(SPC_REALIZATION))
        m = tmp_path / "m.json"
        m.write_text(json.dumps(self.message))
        f = tmp_path / "f.json"
        f.write_text(json.dumps(self.weights))
        return realization, m, f

    def test_both_paths(self, runner, tmp_path):
        """Test equal outputs and 4 against 2 multiplications."""
        result = self.spa(runner, tmp_path, "--path", "both")
        assert result.exit_code == 0, result.output
        document = json.loads(result.output)
        assert document["equal"] is True
        assert document["direct"]["values"] == ["31", "29"]
        assert (document["direct_muls"], document["dual_muls"]) == (4, 2)

    def test_dual_path(self, runner, tmp_path):
        """Test the dual path alone."""
        result = self.spa(runner, tmp_path, "--path", "dual")
        assert json.loads(result.output)["values"] == ["31", "29"]

    def test_missing_weights(self, runner, tmp_path):
        """Test exit code 2 when a symbol has no weight message."""
        realization, m, _ = self.write_inputs(tmp_path)
        result = invoke(runner, "spa", realization, "--message", m)
        assert result.exit_code == 2


class TestBehaviorCommand:
    """codes behavior"""

    def test_code(self, runner, cycle_file):
        """Test the realized code of a two-section cycle."""
        result = invoke(runner, "behavior", cycle_file)
        document = json.loads(result.output)
        assert (document["n"], document["k"]) == (4, 2)

    def test_behavior(self, runner, cycle_file):
        """Test the configuration listing."""
        result = invoke(runner, "behavior", cycle_file, "--emit", "behavior")
        document = json.loads(result.output)
        assert document["size"] == 4
        assert {"S0": "00", "A0": "00", "S1": "00", "A1": "00"} in document["configs"]

    def test_budget_exit_code(self, runner, tmp_path):
        """Test exit code 3 when the enumeration budget is exceeded."""
        out = tmp_path / "big.json"
        invoke(
            runner,
            "build",
            "--p", 3,
            "--generators", EXAMPLE2,
            "--sections", 4,
            "--closure", "tailbite",
            "--out", out,
        )
        result = invoke(runner, "--budget", 100, "behavior", out)
        assert result.exit_code == 3
        assert "exceeds the budget of 100" in result.output
