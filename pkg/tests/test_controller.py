import pytest

from cayleywalk.config import EngineConfig
from cayleywalk.controller import GroupController, controller_for
from cayleywalk.errors import BallCapExceededError, UnknownGroupError, UnsupportedGroupError, ValidationError


def test_load_builtin_group():
    controller = GroupController()
    assert controller.load_group("Z2")
    info = controller.get_group_info()
    assert info["loaded"]
    assert info["group"] == "z2"
    assert info["has_oracle"]
    assert info["presentation"]["generators"] == ["x", "y"]


def test_ball_cache():
    controller = controller_for("tree:3", None, EngineConfig())
    first = controller.ball(3)
    assert controller.ball(3) is first
    assert controller.get_group_info()["cached_radii"] == [3]
    controller.load_group("z2")
    assert controller.get_group_info()["cached_radii"] == []


def test_presentation_only_group():
    controller = controller_for("higman", None, EngineConfig())
    assert controller.require_presentation().rank == 4
    with pytest.raises(UnsupportedGroupError):
        controller.require_oracle()
    with pytest.raises(UnsupportedGroupError):
        controller.ball(2)


def test_presentation_file(tmp_path):
    path = tmp_path / "dihedral.txt"
    path.write_text("gens a b\ninv a b\nrel (a b)^3\n")
    controller = GroupController()
    controller.load_group(presentation_file=path)
    info = controller.get_group_info()
    assert info["group"] == "dihedral"
    assert info["presentation_file"] == str(path)
    assert not info["has_oracle"]


def test_load_errors(tmp_path):
    controller = GroupController()
    with pytest.raises(ValidationError):
        controller.load_group()
    with pytest.raises(ValidationError):
        controller.load_group("z2", tmp_path / "x.txt")
    with pytest.raises(ValidationError):
        controller.load_group(presentation_file=tmp_path / "missing.txt")
    with pytest.raises(UnknownGroupError):
        controller.load_group("nosuch")
    with pytest.raises(ValidationError):
        controller.require_presentation()


def test_unload():
    controller = controller_for("z2", None, EngineConfig())
    controller.ball(2)
    controller.unload_group()
    info = controller.get_group_info()
    assert not info["loaded"]
    assert info["group"] is None
    assert info["cached_radii"] == []


def test_vertex_cap_from_config():
    controller = controller_for("z2", None, EngineConfig(vertex_cap=50))
    with pytest.raises(BallCapExceededError):
        controller.ball(10)


def test_available_groups():
    groups = GroupController.get_available_groups()
    assert "bs12" in groups["available_groups"]
    assert groups["presentation_only"] == ["grig-hnn", "higman", "higman-variant"]
