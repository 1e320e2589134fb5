import math

import pytest

from ldsda import logic as lg
from ldsda.errors import ArityTooSmall, DuplicateName, ModelFrozen, UndeclaredVariable
from ldsda.expr import Expr, evaluate
from ldsda.model import Disjunct, Model, eq, ge, le, validate
from ldsda.models import build_small_batch, synthetic_params


def two_term():
    m = Model("two")
    x = m.add_continuous("x", 0, 10, 1)
    y1, y2 = m.add_boolean("y1"), m.add_boolean("y2")
    dj = m.add_disjunction([Disjunct(y1, [le(x - 2)]), Disjunct(y2, [ge(x - 5)])], "choice")
    m.set_objective(x)
    return m, x, dj


def test_small_batch_model_validates():
    m, _ = build_small_batch(synthetic_params())
    assert validate(m).ok


def test_reversed_bounds_reported():
    m, _, _ = two_term()
    m.add_continuous("bad", 5, 1)
    assert "BoundsReversed" in validate(m).codes()


def test_shared_indicator_reported():
    m, x, dj = two_term()
    y1 = m.boolean("y1")
    y3 = m.add_boolean("y3")
    m.add_disjunction([Disjunct(y1, []), Disjunct(y3, [])], "again")
    report = validate(m)
    assert "SharedIndicator" in report.codes()
    assert any(i.entity == "y1" for i in report.issues)


def test_other_validation_codes():
    m = Model()
    m.add_continuous("free", -math.inf, 1)
    a = m.add_boolean("a")
    m.add_logic_prop(lg.Exactly(3, [a]))
    codes = validate(m).codes()
    assert {"NonFiniteBound", "ExactlyArity", "MissingObjective"} <= set(codes)


def test_variable_handle_resolves():
    m = Model()
    v = m.add_continuous("V", 0, 100)
    assert m.var("V") is v
    assert evaluate(v * 2, [3.0]) == 6.0


def test_single_disjunct_rejected():
    m = Model()
    y = m.add_boolean("y")
    with pytest.raises(ArityTooSmall):
        m.add_disjunction([Disjunct(y, [])])


def test_duplicate_and_undeclared_names():
    m = Model()
    m.add_continuous("x", 0, 1)
    with pytest.raises(DuplicateName):
        m.add_boolean("x")
    with pytest.raises(UndeclaredVariable):
        m.add_global_constraint(le(Expr.variable(3)))
    with pytest.raises(UndeclaredVariable):
        m.add_logic_prop(lg.BoolRef(0))


def test_exactly_registered_with_disjunction_and_removed_with_it():
    m, _, dj = two_term()
    props = m.all_propositions()
    assert len(props) == 1 and isinstance(props[0], lg.Exactly)
    assert [b.name for b in props[0].args] == ["y1", "y2"]
    m.remove_disjunction(dj)
    assert m.all_propositions() == []


def test_user_exactly_is_registered():
    m = Model()
    ys = [m.add_boolean(f"YF[{n}]") for n in range(1, 4)]
    m.add_logic_prop(lg.Exactly(1, ys))
    assert isinstance(m.all_propositions()[0], lg.Exactly)


def test_frozen_model_rejects_builders():
    m, _, _ = two_term()
    m.freeze()
    with pytest.raises(ModelFrozen):
        m.add_continuous("z", 0, 1)


def test_serialization_round_trip_preserves_validation():
    m, _ = build_small_batch(synthetic_params())
    back = Model.from_data(m.to_data())
    assert validate(back).codes() == validate(m).codes()
    assert back.to_data() == m.to_data()
    bad, _, _ = two_term()
    bad.add_continuous("rev", 3, 2)
    assert validate(Model.from_data(bad.to_data())).codes() == validate(bad).codes()


def test_constraint_helpers():
    x = Expr.variable(0)
    assert evaluate(ge(x, 3).body, [5.0]) == -2.0
    assert eq(x, 1).relation == "eq"
    assert le(x, 1, "cap").label == "cap"
