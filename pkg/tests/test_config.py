"""
Tests for JSON configuration validation and construction of inputs.
"""

import copy
import json

import pytest

from soficlab.config import (
    ExperimentConfig,
    GraphOfGroupsConfig,
    NormalFormConfig,
    VerifyConfig,
    build_actions,
    build_graph_of_groups,
    dump_config,
    load_config,
    validate_config,
)
from soficlab.core_groups import IntegerGroup
from soficlab.errors import SchemaError
from soficlab.utils import parse_budget_override, resolve_budget

FREE_PRODUCT = {
    "graph": {"n": 2, "edges": []},
    "vertex_groups": [{"kind": "cyclic", "order": 2}, {"kind": "cyclic", "order": 2}],
    "actions": [{"kind": "regular"}, {"kind": "regular"}],
    "N": 6,
}

DEGRADED = {
    "graph": {"n": 2, "edges": [[1, 0]]},
    "vertex_groups": [{"kind": "cyclic", "order": 4}, {"kind": "integers"}],
    "actions": [
        {"kind": "degraded", "base": {"kind": "regular"}, "delta": "1/4", "seed": 3},
        {"kind": "shift", "carrier": 11, "range": 2},
    ],
    "N": 2,
    "mode": "general",
    "budget": {"samples": 500},
    "seed": 9,
}


def with_changes(base, **changes):
    data = copy.deepcopy(base)
    data.update(changes)
    return data


def test_valid_config():
    config = validate_config(ExperimentConfig, FREE_PRODUCT)
    assert config.N == 6
    assert config.mode == "exact"
    assert config.seed == 0
    assert config.threads == 1


def test_loop_edge_names_the_loop_ban():
    data = with_changes(FREE_PRODUCT, graph={"n": 2, "edges": [[0, 0]]})
    with pytest.raises(SchemaError, match="simple graphs forbid loops") as info:
        validate_config(ExperimentConfig, data)
    assert info.value.pointer == "/graph/edges"


def test_repeated_and_out_of_range_edges():
    with pytest.raises(SchemaError, match="repeated"):
        validate_config(ExperimentConfig, with_changes(FREE_PRODUCT, graph={"n": 2, "edges": [[0, 1], [1, 0]]}))
    with pytest.raises(SchemaError, match="outside"):
        validate_config(ExperimentConfig, with_changes(FREE_PRODUCT, graph={"n": 2, "edges": [[0, 2]]}))


def test_unknown_fields_are_rejected():
    with pytest.raises(SchemaError) as info:
        validate_config(ExperimentConfig, with_changes(FREE_PRODUCT, colour="red"))
    assert info.value.pointer == "/colour"


def test_one_action_per_vertex():
    with pytest.raises(SchemaError, match="actions for n=2"):
        validate_config(ExperimentConfig, with_changes(FREE_PRODUCT, actions=[{"kind": "regular"}]))


def test_shift_needs_its_fields():
    data = with_changes(FREE_PRODUCT, actions=[{"kind": "shift", "carrier": 7}, {"kind": "regular"}])
    with pytest.raises(SchemaError, match="'carrier' and 'range'") as info:
        validate_config(ExperimentConfig, data)
    assert info.value.pointer.startswith("/actions/0")


@pytest.mark.parametrize("delta", ["3/2", "0.5", "one half"])
def test_delta_must_be_a_rational_below_one(delta):
    action = {"kind": "degraded", "base": {"kind": "regular"}, "delta": delta, "seed": 0}
    data = with_changes(FREE_PRODUCT, actions=[action, {"kind": "regular"}])
    with pytest.raises(SchemaError) as info:
        validate_config(ExperimentConfig, data)
    assert info.value.pointer == "/actions/0/delta"


def test_round_trip():
    for model, data in [(ExperimentConfig, FREE_PRODUCT), (ExperimentConfig, DEGRADED)]:
        config = validate_config(model, data)
        assert validate_config(model, dump_config(config)) == config
    assert dump_config(validate_config(ExperimentConfig, DEGRADED))["actions"][1]["range"] == 2


def test_load_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(FREE_PRODUCT))
    assert load_config(ExperimentConfig, path).N == 6

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(SchemaError, match="not valid JSON"):
        load_config(ExperimentConfig, broken)
    with pytest.raises(SchemaError, match="cannot read"):
        load_config(ExperimentConfig, tmp_path / "missing.json")


def test_build_actions():
    context, actions = build_actions(validate_config(ExperimentConfig, DEGRADED))
    assert context.graph.adjacent(0, 1)
    assert isinstance(context.groups[1], IntegerGroup)
    assert actions[0].table.carrier_size == 4
    assert actions[1].F == (-2, -1, 0, 1, 2)
    assert -4 in actions[1].table and 4 in actions[1].table


def test_shift_on_a_finite_group_is_refused():
    data = with_changes(FREE_PRODUCT, actions=[{"kind": "regular"}, {"kind": "shift", "carrier": 5, "range": 1}])
    with pytest.raises(SchemaError, match="integers") as info:
        build_actions(validate_config(ExperimentConfig, data))
    assert info.value.pointer == "/actions/1"


def test_verify_config_defaults():
    config = validate_config(VerifyConfig, {"group": {"kind": "cyclic", "order": 3}, "action": {"kind": "regular"}})
    assert config.epsilon == "0/1"
    assert config.F is None


def test_normal_form_config_checks_k():
    data = {"graph": {"n": 2}, "vertex_groups": [{"kind": "cyclic", "order": 2}] * 2, "k": 2, "g1": []}
    with pytest.raises(SchemaError, match="k=2"):
        validate_config(NormalFormConfig, data)


def test_normal_form_config_short_form():
    data = {"graph": {"n": 2}, "groups": [{"kind": "cyclic", "order": 2}] * 2, "word": [[1, 1], [0, 1]]}
    config = validate_config(NormalFormConfig, data)
    assert config.k == 0
    assert config.g1 == [(1, 1), (0, 1)]
    assert config.g2 == []
    assert len(config.vertex_groups) == 2


def test_graph_of_groups_config():
    data = {
        "vertices": [
            {"name": "A", "group": {"generators": ["a"]}},
            {"name": "B", "group": {"generators": ["b"]}},
        ],
        "edges": [{"ends": [0, 1], "group": {"generators": ["x"]}, "theta1": {"x": "a^2"}, "theta2": {"x": "b^3"}}],
    }
    gog = build_graph_of_groups(validate_config(GraphOfGroupsConfig, data))
    assert len(gog.edges) == 1

    data["edges"][0]["theta2"] = {"x": "c"}
    with pytest.raises(SchemaError) as info:
        build_graph_of_groups(validate_config(GraphOfGroupsConfig, data))
    assert info.value.pointer == "/edges/0"


def test_infinite_groups_must_be_presentations():
    data = {"vertices": [{"name": "Z", "group": {"kind": "integers"}}]}
    with pytest.raises(SchemaError, match="presentations"):
        build_graph_of_groups(validate_config(GraphOfGroupsConfig, data))


def test_budget_layers(monkeypatch):
    monkeypatch.delenv("SOFICLAB_BUDGET", raising=False)
    assert resolve_budget({"samples": 10})["samples"] == 10
    monkeypatch.setenv("SOFICLAB_BUDGET", "samples=20,f_size=5")
    budget = resolve_budget({"samples": 10})
    assert budget["samples"] == 20
    assert budget["f_size"] == 5
    assert parse_budget_override('{"bfs_moves": null}') == {"bfs_moves": None}
    with pytest.raises(SchemaError):
        parse_budget_override("colour=3")
    with pytest.raises(SchemaError):
        parse_budget_override("samples=0")
