import numpy as np
import pytest

from tensiform import Model, Node, LinearMember, build_dof_map, validate
from tensiform.model import CABLE, STRUT, ModelError, PowerLength, SpringLength, TriElement, PowerArea
from tensiform import fixtures


def test_dof_map_single_free_node():
    nodes = [Node(0, np.zeros(3), fixed=True), Node(1, np.ones(3), fixed=True),
             Node(2, np.zeros(3), fixed=True), Node(3, np.ones(3), fixed=False)]
    model = Model(nodes=nodes, members=[])
    assert build_dof_map(model).n == 3


def test_dof_map_x_tensegrity_all_free():
    model = fixtures.make_x_tensegrity()
    assert build_dof_map(model).n == 12


def test_dof_map_fully_fixed_errors():
    nodes = [Node(0, np.zeros(3), fixed=True), Node(1, np.ones(3), fixed=True)]
    model = Model(nodes=nodes, members=[])
    with pytest.raises(ModelError, match="fully fixed"):
        build_dof_map(model)


def test_dof_map_is_bijection(rng):
    model = fixtures.make_net(4, 5)
    dof = model.dof_map
    coords = rng.standard_normal(dof.n)
    positions = dof.unpack(coords, model.positions)
    assert np.array_equal(dof.pack(positions), coords)
    seen = set()
    for node in model.nodes:
        if node.fixed:
            assert dof.node_offset[node.id] == -1
            continue
        for axis in range(3):
            idx = dof.index(node.id, axis)
            assert 0 <= idx < dof.n
            seen.add(idx)
    assert len(seen) == dof.n


def test_validate_simplex_clean():
    assert validate(fixtures.make_simplex()) == []


def test_validate_all_fixtures_clean():
    for name in fixtures.fixture_names():
        assert validate(fixtures.build_fixture(name)) == [], name


def test_validate_identical_endpoints():
    nodes = [Node(0, np.zeros(3)), Node(1, np.ones(3))]
    bad = LinearMember(0, (1, 1), CABLE, functional=PowerLength(1.0, 2))
    violations = validate(Model(nodes=nodes, members=[bad]))
    assert len(violations) == 1
    assert "member 0" in violations[0] and "distinct" in violations[0]


def test_validate_strut_zero_length_bar():
    nodes = [Node(0, np.zeros(3)), Node(1, np.ones(3))]
    bad = LinearMember(0, (0, 1), STRUT, prescribed_length=0.0)
    violations = validate(Model(nodes=nodes, members=[bad]))
    assert len(violations) == 1
    assert "member 0" in violations[0]


def test_validate_sparse_node_ids():
    nodes = [Node(0, np.zeros(3)), Node(5, np.ones(3))]
    violations = validate(Model(nodes=nodes, members=[]))
    assert any("dense" in v for v in violations)


def test_validate_nonpositive_weight():
    nodes = [Node(0, np.zeros(3)), Node(1, np.ones(3))]
    bad = LinearMember(0, (0, 1), CABLE, functional=PowerLength(-1.0, 2))
    assert any("weight" in v for v in validate(Model(nodes=nodes, members=[bad])))


def test_validate_power_out_of_range():
    nodes = [Node(0, np.zeros(3)), Node(1, np.ones(3))]
    bad = LinearMember(0, (0, 1), CABLE, functional=PowerLength(1.0, 9))
    assert any("power" in v for v in validate(Model(nodes=nodes, members=[bad])))


def test_validate_area_functional_on_cable():
    nodes = [Node(0, np.zeros(3)), Node(1, np.ones(3))]
    bad = LinearMember(0, (0, 1), CABLE, functional=PowerArea(1.0, 2))
    assert any("length functional" in v for v in validate(Model(nodes=nodes, members=[bad])))


def test_validate_element_with_repeated_vertex():
    nodes = [Node(i, np.array([i, 0.0, 0.0])) for i in range(3)]
    bad = TriElement(0, (0, 1, 1), functional=PowerArea(1.0, 2))
    assert any("element 0" in v for v in validate(Model(nodes=nodes, members=[],
                                                        elements=[bad])))


def test_validate_spring_rest_length():
    nodes = [Node(0, np.zeros(3)), Node(1, np.ones(3))]
    bad = LinearMember(0, (0, 1), CABLE, functional=SpringLength(1.0, -2.0))
    assert any("rest length" in v for v in validate(Model(nodes=nodes, members=[bad])))


def test_fixed_positions_never_modified_by_unpack(rng):
    model = fixtures.make_net(3, 3)
    coords = rng.standard_normal(model.dof_map.n)
    positions = model.full_positions(coords)
    for node in model.nodes:
        if node.fixed:
            assert np.array_equal(positions[node.id], node.position)
