import itertools
import math
from dataclasses import replace

import pytest

from ldsda import logic as lg
from ldsda import nlp as solver
from ldsda.errors import InvalidParams
from ldsda.model import validate
from ldsda.models import (BatchParams, CstrParams, build_cstr, build_small_batch, data_text,
                          literature_params, load_model, synthetic_params)
from ldsda.models.params import parse_params_text
from ldsda.search import LOGIC_INFEASIBLE, enumerate_lattice, SearchConfig
from ldsda.subproblem import LogicallyInfeasible, Nlp, build, resolve


def logic_feasible(R):
    m, specs = build_cstr(CstrParams(R=R))
    pts = itertools.product(range(1, R + 1), repeat=2)
    return {z for z in pts if not isinstance(resolve(m, specs, z), lg.Conflict)}


def test_two_reactor_feasible_set():
    assert logic_feasible(2) == {(1, 1), (2, 1), (2, 2)}


@pytest.mark.parametrize("R", range(1, 9))
def test_feasible_set_is_lower_triangle(R):
    assert logic_feasible(R) == {(a, b) for a in range(1, R + 1) for b in range(1, a + 1)}


def test_single_reactor():
    m, specs = build_cstr(CstrParams(R=1))
    assert validate(m).ok
    sub = build(m, specs, (1,  1))
    assert isinstance(sub, Nlp)
    assert {"rate[1]", "recycle_flow[A,1]"} <= set(sub.eq_labels)
    assert solver.solve(sub).optimal


def test_unit_pattern_for_feed_four_recycle_two():
    m, specs = build_cstr(CstrParams(R=6))
    sub = build(m, specs, (4, 2))
    units = [sub.assignment[m.boolean(f"YP[{n}]").index] for n in range(1, 7)]
    assert units == [True] * 4 + [False] * 2


def test_cstr_model_contents():
    m, specs = build_cstr(CstrParams(R=4))
    assert validate(m).ok
    labels = {c.label for c in m.constraints}
    assert {"purity", "split_continuity", "equal_volume[2]", "feed_balance[A]"} <= labels
    exactly = [p for p in m.all_propositions() if isinstance(p, lg.Exactly) and p.m == 1]
    names = {tuple(b.name for b in p.args) for p in exactly}
    assert tuple(f"YF[{n}]" for n in range(1, 5)) in names
    assert tuple(f"YR[{n}]" for n in range(1, 5)) in names


def test_small_batch_lattice_all_logic_feasible():
    m, specs = build_small_batch(synthetic_params())
    assert validate(m).ok
    assert [s.size for s in specs] == [3, 3, 3]
    for z in itertools.product((1, 2, 3), repeat=3):
        assert isinstance(build(m, specs, z), Nlp)


def test_small_batch_unit_counts_forced():
    m, specs = build_small_batch(synthetic_params())
    res = solver.solve(build(m, specs, (2, 2, 1)))
    x = dict(zip([v.name for v in m.continuous], res.point))
    assert x["n[mixer]"] == pytest.approx(math.log(2), abs=1e-6)
    assert x["n[reactor]"] == pytest.approx(math.log(2), abs=1e-6)
    assert x["n[centrifuge]"] == pytest.approx(0.0, abs=1e-6)


def test_bundled_files_match_builders():
    m, _ = load_model("smallbatch")
    assert m.to_data() == build_small_batch(literature_params())[0].to_data()
    synth = BatchParams.from_mapping(parse_params_text(data_text("small_batch_synthetic.params")))
    assert synth == synthetic_params()
    m, specs = load_model("cstr", size=3)
    assert [s.size for s in specs] == [3, 3]
    assert load_model("cstr")[1][0].size == 5


def test_loader_errors(tmp_path):
    with pytest.raises(ValueError):
        load_model("smallbatch", size=3)
    with pytest.raises(ValueError):
        load_model("column")
    bad = tmp_path / "bad.params"
    bad.write_text("R = 3\nmystery = 1\n")
    with pytest.raises(InvalidParams):
        load_model("cstr", str(bad))
    bad.write_text("R = 3\nR = 4\n")
    with pytest.raises(InvalidParams):
        load_model("cstr", str(bad))
    bad.write_text("spec = 1.5\n")
    with pytest.raises(InvalidParams):
        load_model("cstr", str(bad))
    bad.write_text("just words\n")
    with pytest.raises(InvalidParams):
        load_model("cstr", str(bad))
    good = tmp_path / "good.params"
    good.write_text("# comment\nR = 2  # two reactors\nk_rate = 3\n")
    assert load_model("cstr", str(good))[1][0].size == 2


@pytest.mark.parametrize("change", [dict(R=0), dict(k_rate=-1), dict(F0_A=0), dict(QF0=0),
                                    dict(spec=0), dict(volume_upper=0)])
def test_cstr_params_validated(change):
    with pytest.raises(InvalidParams):
        build_cstr(replace(CstrParams(), **change))


def test_batch_params_validated():
    with pytest.raises(InvalidParams):
        build_small_batch(replace(synthetic_params(), horizon=0))
    with pytest.raises(InvalidParams):
        build_small_batch(replace(synthetic_params(), volume_bounds=(10, 5)))


def test_cstr_three_enumeration_statuses():
    m, specs = build_cstr(CstrParams(R=3))
    table = enumerate_lattice(m, SearchConfig(), specs=specs)
    assert len(table) == 9
    infeasible = {r.z for r in table if r.status == LOGIC_INFEASIBLE}
    assert infeasible == {(1, 2), (1, 3), (2, 3)}
