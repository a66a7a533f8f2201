"""Command lines with checked-in expected output (``tests/golden``)."""

from pathlib import Path

HERE = Path(__file__).parent
DATA = HERE / "data"
GOLDEN = HERE / "golden"

GOLDEN_CASES = {
    "coeffs_float.json": ["coeffs", "1", "2", "3"],
    "coeffs_exact.csv": ["coeffs", "1/2,1/3", "3", "--mode", "exact", "--format", "csv"],
    "law_table.csv": ["law", "1,2", "--format", "csv"],
    "law_eval.json": ["law", "1x2", "--eval", "0.367879441", "--eval", "1"],
    "law_sample.json": ["law", "2x2", "--sample", "5", "--seed", "42"],
    "transform_check.json": ["transform", str(DATA / "standard.json"), "--betas", "1,2", "--check",
                             "--radii", "0.5", "--radii", "1"],
    "transform_exact.csv": ["transform", str(DATA / "standard.json"), "--betas", "1/2x2,3", "--mode", "exact",
                            "--format", "csv"],
    "verify_identities.json": ["verify", "--suite", "identities", "--seed", "42"],
}
