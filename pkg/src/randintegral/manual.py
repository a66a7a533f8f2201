"""Render the command-line manual (``docs/cli.md``) from the argument parser.

Run ``python -m randintegral.manual > docs/cli.md`` after changing options;
the test suite fails when the checked-in file is stale.
"""

from __future__ import annotations

import inspect
import sys

from . import cli, triple_io

HELP_WIDTH = 88

INTRO = """\
# randintegral command line

`randintegral COMMAND [options]`, also available as `python -m randintegral`.

The flags `--output`, `--format`, `--seed` and `--mode` are accepted before or
after the command name.  Every output carries a `metadata` block (a leading
`# key=value` comment line in CSV) holding the command, the package version,
the seed and the mode.  The `timestamp` entry is always last; set
`SOURCE_DATE_EPOCH` to pin it.  With a fixed seed the rest of the output is
byte-for-byte reproducible.

Floats are written so that they read back to the same double: shortest
round-trip form in JSON, 17 significant digits in CSV.  In `--mode exact`
rational exponents and coefficients are printed as `"p/q"` strings.

Randomized commands (`law --sample`, `verify`, `simulate`) use `--seed` when
given, otherwise they draw a seed, print `seed: N` on standard error and record
it in the metadata.

## Exit codes

| code | meaning |
| ---- | ------- |
| 0 | success |
| 1 | a verification check or a cf comparison failed, or a numerical failure |
| 2 | invalid input: bad arguments, unreadable or malformed files, unsupported requests |

## Multisets

A multiset of exponents is written `1,2,3` or `2x3` (value `x` integer
multiplicity); the forms mix freely, e.g. `1/2x2,3.5`.  Values may be
integers, decimals or fractions `p/q`.
"""

OUTPUTS = """\
## Outputs

| command | JSON fields | CSV columns |
| ------- | ----------- | ----------- |
| coeffs | `betas`, `C`, `c`, `sum_C` | `beta,C,c` (sum in the comment line) |
| law | `terms` (coef, exponent, logpow), `table` (t, pdf, cdf) or `samples` | `t,pdf,cdf` or `value` |
| transform | `triple` (re-readable triple file), `masses`, `check` | `quantity,value` |
| verify | `checks` (name, passed, residual, tolerance, detail, informational), `passed` | one row per check |
| simulate | `mean`, `mean_standard_error`, `points`, `max_deviation`, `passed` | one row per y point |

`law` terms describe the cdf as a sum of `coef * t**exponent * (-log t)**logpow`.
The pdf is `null` at t = 0, where it may be unbounded.
"""


def _subparsers(parser):
    for action in parser._actions:
        if action.choices and hasattr(action, "_name_parser_map"):
            return action.choices
    return {}


def _schema_section() -> str:
    # the module docstring is reStructuredText; turn its literal block into a fence
    doc = inspect.getdoc(triple_io).split("\n\n", 1)[1].replace("``", "`")
    head, rest = doc.split("::\n\n", 1)
    block, tail = rest.split("\n\n", 1)
    block = "\n".join(line[4:] for line in block.splitlines())
    return f"## Triple files\n\n{head}:\n\n```text\n{block}\n```\n\n{tail}\n"


def render() -> str:
    parser = cli.build_parser(width=HELP_WIDTH)
    parts = [INTRO, "## Synopsis\n", "```text\n" + parser.format_help() + "```\n"]
    for name, sub in _subparsers(parser).items():
        parts.append(f"## {name}\n")
        parts.append("```text\n" + sub.format_help() + "```\n")
    parts.append(OUTPUTS)
    parts.append(_schema_section())
    return "\n".join(parts)


def main() -> int:
    sys.stdout.write(render())
    return 0


if __name__ == "__main__":
    sys.exit(main())
