"""CNF container, conjunction, and DIMACS round trips."""

import pytest

from relcount.cnf import CnfFormula, DimacsError, cnf, conjoin, emit_dimacs, parse_dimacs
from relcount.counter import count_bruteforce, count_exact
from relcount.props import Property, PropertySpec, encode

SAMPLE = """c a comment
p cnf 4 3
1 -2 0
c ind 1 2 0
3 4 0
-1
-3 0
"""


def test_parse_basic():
    f = parse_dimacs(SAMPLE)
    assert f.num_vars == 4
    assert f.clauses == ((1, -2), (3, 4), (-1, -3))
    assert f.projection == frozenset({1, 2})


def test_parse_multiline_clause_and_multiple_ind_lines():
    f = parse_dimacs("p cnf 5 1\nc ind 1 2 0\nc ind 4 0\n1 2\n3\n-4 0\n")
    assert f.clauses == ((1, 2, 3, -4),)
    assert f.projection == frozenset({1, 2, 4})


def test_round_trip_is_byte_exact():
    f = parse_dimacs(SAMPLE)
    text = emit_dimacs(f)
    assert emit_dimacs(parse_dimacs(text)) == text


def test_round_trip_of_encodings():
    for prop, scope in ((Property.EQUIVALENCE, 3), (Property.TOTALORDER, 4)):
        f = encode(PropertySpec(prop, scope))
        text = emit_dimacs(f)
        g = parse_dimacs(text)
        assert g.num_vars == f.num_vars
        assert g.clauses == f.clauses
        assert emit_dimacs(g) == text


def test_empty_projection_round_trips():
    f = CnfFormula(2, ((1, 2),), frozenset())
    g = parse_dimacs(emit_dimacs(f))
    assert g.projection == frozenset()
    assert emit_dimacs(g) == emit_dimacs(f)


def test_full_projection_omits_ind_line():
    f = cnf(3, [(1, 2), (-3,)])
    assert not f.has_aux
    assert "ind" not in emit_dimacs(f)
    assert parse_dimacs(emit_dimacs(f)).projection == frozenset({1, 2, 3})


def test_empty_clause_emitted_and_parsed():
    f = CnfFormula(2, ((),))
    text = emit_dimacs(f)
    assert "\n0\n" in text
    assert parse_dimacs(text).clauses == ((),)


def test_clause_validation():
    with pytest.raises(ValueError):
        CnfFormula(2, ((0,),))
    with pytest.raises(ValueError):
        CnfFormula(2, ((3,),))
    with pytest.raises(ValueError):
        CnfFormula(2, ((1, -1),))  # tautology
    with pytest.raises(ValueError):
        CnfFormula(2, ((1, 1),))  # duplicate literal
    with pytest.raises(ValueError):
        CnfFormula(2, ((1,),), frozenset({5}))  # projection out of range
    with pytest.raises(ValueError):
        CnfFormula(-1, ())


@pytest.mark.parametrize("text,fragment", [
    ("1 2 0\n", "clause before header"),
    ("p cnf 2 1\np cnf 2 1\n1 0\n", "duplicate header"),
    ("p cnf x 1\n1 0\n", "header"),
    ("p cnf 2 1\n1 x 0\n", "literal"),
    ("p cnf 2 1\n3 0\n", "range"),
    ("p cnf 2 2\n1 0\n", "declares 2 clauses"),
    ("p cnf 2 1\n1 2\n", "unterminated"),
    ("p cnf 2 1\nc ind 9 0\n1 0\n", "range"),
    ("", "missing header"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(DimacsError) as err:
        parse_dimacs(text)
    assert fragment in str(err.value)


def test_parse_error_carries_line_number():
    with pytest.raises(DimacsError) as err:
        parse_dimacs("p cnf 2 1\n1 x 0\n")
    assert "line 2" in str(err.value)


def test_conjoin_combines_vars_clauses_projection():
    f1 = CnfFormula(3, ((1, 2),), frozenset({1, 2}))
    f2 = CnfFormula(5, ((4, 5),), frozenset({4}))
    g = conjoin(f1, f2)
    assert g.num_vars == 5
    assert g.clauses == ((1, 2), (4, 5))
    assert g.projection == frozenset({1, 2, 4})


def test_conjoin_of_full_projections_stays_full():
    f1 = cnf(2, [(1,)])
    f2 = cnf(3, [(3,)])
    g = conjoin(f1, f2)
    assert g.projection == frozenset({1, 2, 3})


def test_conjoin_contradictory_properties_is_unsatisfiable():
    # a relation cannot be reflexive and irreflexive on a non-empty domain
    f = conjoin(encode(PropertySpec(Property.REFLEXIVE, 3)),
                encode(PropertySpec(Property.IRREFLEXIVE, 3)))
    assert count_bruteforce(f).count == 0
    assert count_exact(f).count == 0


def test_projection_defaults_to_all_vars():
    f = cnf(4, [(1,)])
    assert f.projection == frozenset({1, 2, 3, 4})
    g = CnfFormula(4, ((1,),), frozenset({1}))
    assert g.has_aux
