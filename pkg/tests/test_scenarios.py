import json
from dataclasses import replace

import numpy as np
import pytest

from parkopt.geometry import EmptyPolygon, batch_inside, vertices_from_halfspaces
from parkopt.scenarios import (SCENARIO_NAMES, TABLE1_PUBLISHED, CostWeights, builtin_scenario, get_scenario,
                               load_scenario, save_scenario, thin_wall_scenario)
from parkopt.transcription import check_boundary
from parkopt.vehicle import body_vertices_batch


@pytest.mark.parametrize("name", SCENARIO_NAMES)
def test_builtin_valid(name):
    sc = builtin_scenario(name)
    sc.validate()
    check_boundary(sc)
    assert len(sc.obstacles) == 2 and all(o.n_edges == 4 for o in sc.obstacles)
    inside = [bool(batch_inside(o.vertices[None], sc.environment)[0]) for o in sc.obstacles]
    # the published oblique O1 extends past the left wall (x from -7 to -4); the rest lie inside
    assert inside == ([False, True] if name == "oblique" else [True, True])
    for o in sc.obstacles:
        assert any(np.all(sc.environment.normals @ v <= sc.environment.offsets + 1e-9) for v in o.vertices)
    assert sc.weights == CostWeights(1.0, (1.0, 2.0))


def test_final_poses():
    assert np.rad2deg(builtin_scenario("vertical").final[2]) == pytest.approx(90)
    assert np.rad2deg(builtin_scenario("oblique").final[2]) == pytest.approx(45)
    np.testing.assert_allclose(builtin_scenario("parallel").final, [6.9, -4.3, 0, 0, 0])


def test_published_rows_are_unusable():
    # as printed, the vertical O2 rows describe an empty set
    rows = np.array(TABLE1_PUBLISHED["vertical_O2"], dtype=float)
    with pytest.raises(EmptyPolygon):
        vertices_from_halfspaces(rows[:, :2], rows[:, 2])
    # and the parallel O2 rows describe a region left of the environment
    rows = np.array(TABLE1_PUBLISHED["parallel_O2"], dtype=float)
    P = vertices_from_halfspaces(rows[:, :2], rows[:, 2])
    assert P.vertices[:, 0].max() < builtin_scenario("parallel").environment.vertices[:, 0].min()


def test_json_round_trip_degrees(tmp_path):
    sc = builtin_scenario("oblique")
    path = tmp_path / "sc.json"
    save_scenario(sc, path)
    data = json.loads(path.read_text())
    assert data["final"][2] == pytest.approx(45.0)
    back = load_scenario(path)
    np.testing.assert_allclose(back.final, sc.final, atol=1e-15)
    np.testing.assert_allclose(back.obstacles[1].vertices, sc.obstacles[1].vertices)
    np.testing.assert_allclose(back.bounds.state_upper, sc.bounds.state_upper)
    assert get_scenario(str(path)).name == "oblique"


def test_get_scenario():
    assert get_scenario("parallel").name == "parallel"
    assert get_scenario("thin-wall").name == "thin-wall"
    sc = thin_wall_scenario()
    assert get_scenario(sc) is sc
    with pytest.raises(KeyError):
        builtin_scenario("garage")


def test_thin_wall_layout():
    sc = thin_wall_scenario(thickness=0.3)
    sc.validate()
    check_boundary(sc)
    wall = sc.obstacles[0].vertices
    assert np.ptp(wall[:, 0]) == pytest.approx(0.3) and np.ptp(wall[:, 1]) == pytest.approx(2.0)
    assert sc.pose_is_free(sc.init) and not sc.pose_is_free(np.array([6.0, 0, 0, 0, 0]))


def test_validate_rejects_outside_start():
    sc = builtin_scenario("vertical")
    with pytest.raises(ValueError):
        replace(sc, init=np.array([14.0, 0, 0, 0, 0])).validate()
    assert body_vertices_batch(sc.init[None], sc.vehicle).shape == (1, 4, 2)
