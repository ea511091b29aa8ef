import pytest

from helpers import waiter_problem
from maxreal.ltl import SoftSpec, SpecProblem, parse
from maxreal.specfile import SpecFileError, emit_spec, parse_spec

WAITER = """\
# restaurant robot
name: waiter
inputs: req1 req2
outputs: table1 table2
hard: G (!table1 | !table2)
soft: G (req1 -> X table1)   # first table
soft: G (req2 -> X table2)
"""


def test_parse_waiter():
    assert parse_spec(WAITER) == waiter_problem()


def test_round_trip_default():
    p = waiter_problem()
    assert parse_spec(emit_spec(p)) == p


def test_round_trip_chain_and_weights():
    chain = (parse("G q"), parse("F G q"), parse("G F q"))
    p = SpecProblem(("p",), ("q",), (parse("G (p -> X !q)"),),
                    (SoftSpec(chain[0], chain, (1, 3, 9)),
                     SoftSpec.default(parse("G (p -> q)"), (2, 2, 2))),
                    scheme="user", name="weighted")
    text = emit_spec(p)
    assert "options: scheme=user" in text
    assert parse_spec(text) == p


def test_explicit_chain_syntax():
    p = parse_spec("inputs: a\noutputs: b\nsoft[relax=chain]: G b ; G F b\noptions: scheme=general\n")
    assert p.soft[0].relax_chain == (parse("G b"), parse("G F b"))


def test_empty_problem():
    p = parse_spec("inputs:\noutputs: x\n")
    assert p.inputs == () and p.outputs == ("x",) and p.hard == () and p.soft == ()


@pytest.mark.parametrize("text,line", [
    ("inputs: a\nbogus: x\n", 2),
    ("inputs: a\noutputs: b\nhard: a &\n", 3),
    ("inputs: a\nhard[x=1]: a\n", 2),
    ("inputs: a\noutputs: b\nsoft[color=red]: G b\n", 3),
    ("inputs: a\noutputs: b\nsoft[weight=1/x/2]: G b\n", 3),
    ("inputs: a\noutputs: b\nsoft[relax=weird]: G b\n", 3),
    ("inputs: a\noutputs: b\nsoft: G F b\n", 3),
    ("inputs: a\noutputs: b\noptions: speed=fast\n", 3),
    ("just words\n", 1),
])
def test_errors_name_the_line(text, line):
    with pytest.raises(SpecFileError) as ei:
        parse_spec(text)
    assert ei.value.line == line
    assert f"line {line}" in str(ei.value)


def test_problem_level_errors():
    with pytest.raises(SpecFileError, match="undeclared"):
        parse_spec("inputs: a\noutputs: b\nhard: G c\n")
    with pytest.raises(SpecFileError, match="scheme"):
        parse_spec("inputs: a\noutputs: b\noptions: scheme=lexi\n")
