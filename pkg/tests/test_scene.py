import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lidar_deploy.scene import (
    BadValue, EmptyScenario, MissingColumn, Scenario, ScenarioFrame, Vehicle,
    load_scenario, normalize_angle, obb_corners, save_scenario,
)

HEADER = "frame_id,vehicle_id,x_m,y_m,heading_deg,length_m,width_m,height_m\n"


def write(tmp_path, text, name="scene.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestCanonicalCsv:
    def test_single_row(self, tmp_path):
        sc = load_scenario(write(tmp_path, HEADER + "0,7,10.0,3.5,90,4.5,1.8,1.5\n"))
        assert len(sc.frames) == 1
        (v,) = sc.frames[0].vehicles
        assert v.id == 7
        assert v.center == (10.0, 3.5, 0.75)
        assert v.heading == pytest.approx(math.pi / 2)
        assert (v.length, v.width, v.height) == (4.5, 1.8, 1.5)

    def test_header_only(self, tmp_path):
        with pytest.raises(EmptyScenario):
            load_scenario(write(tmp_path, HEADER))

    def test_missing_column(self, tmp_path):
        with pytest.raises(MissingColumn) as err:
            load_scenario(write(tmp_path, HEADER.replace(",height_m", "") + "0,1,0,0,0,4,2\n"))
        assert err.value.name == "height_m"

    @pytest.mark.parametrize("row,column", [
        ("0,1,abc,0,0,4.5,1.8,1.5", "x_m"),
        ("0,1,0,0,0,-4.5,1.8,1.5", "length_m"),
        ("0,1,0,0,0,4.5,0,1.5", "width_m"),
        ("0.5,1,0,0,0,4.5,1.8,1.5", "frame_id"),
    ])
    def test_bad_value(self, tmp_path, row, column):
        with pytest.raises(BadValue) as err:
            load_scenario(write(tmp_path, HEADER + row + "\n"))
        assert err.value.column == column
        assert err.value.row == 1

    def test_frames_grouped_and_sorted(self, tmp_path):
        text = HEADER + "5,1,0,0,0,4,2,1.5\n2,1,1,0,0,4,2,1.5\n5,2,9,0,0,4,2,1.5\n"
        sc = load_scenario(write(tmp_path, text))
        assert [f.frame_id for f in sc.frames] == [2, 5]
        assert [v.id for v in sc.frames[1].vehicles] == [1, 2]

    def test_duplicate_vehicle_in_frame(self, tmp_path):
        with pytest.raises(ValueError):
            load_scenario(write(tmp_path, HEADER + "0,1,0,0,0,4,2,1\n0,1,5,0,0,4,2,1\n"))

    def test_heading_normalized(self, tmp_path):
        sc = load_scenario(write(tmp_path, HEADER + "0,1,0,0,270,4,2,1\n"))
        assert sc.frames[0].vehicles[0].heading == pytest.approx(-math.pi / 2)


class TestNgsim:
    def test_feet_to_meters(self, tmp_path):
        # Vehicle_ID Frame_ID Total_Frames Global_Time Local_X Local_Y Global_X Global_Y v_Length v_Width v_Class ...
        row = "3 12 500 1113433136100 16.467 35.381 6042842.116 2133117.662 14.76 6.0 2 40.0 0.0 2 0 0 0.0 0.0\n"
        sc = load_scenario(write(tmp_path, row, "traj.txt"), format="ngsim")
        (v,) = sc.frames[0].vehicles
        assert v.length == pytest.approx(14.76 * 0.3048, abs=1e-12)
        assert v.length == pytest.approx(4.4988, abs=1e-3)
        assert v.width == pytest.approx(6.0 * 0.3048)
        assert v.center[0] == pytest.approx(16.467 * 0.3048)
        assert v.center[1] == pytest.approx(35.381 * 0.3048 - v.length / 2)
        assert v.height == 1.5
        assert sc.frames[0].frame_id == 12

    def test_header_and_class_height(self, tmp_path):
        text = ("Vehicle_ID,Frame_ID,Local_X,Local_Y,v_Length,v_Width,v_Class\n"
                "1,1,10,100,40,8.5,3\n2,1,20,50,15,6,2\n")
        sc = load_scenario(write(tmp_path, text), format="ngsim")
        heights = {v.id: v.height for v in sc.frames[0].vehicles}
        assert heights == {1: 3.5, 2: 1.5}

    def test_header_without_class_uses_default(self, tmp_path):
        text = "Vehicle_ID,Frame_ID,Local_X,Local_Y,v_Length,v_Width\n1,1,10,100,15,6\n"
        sc = load_scenario(write(tmp_path, text), format="ngsim", default_height=1.7)
        assert sc.frames[0].vehicles[0].height == 1.7

    def test_missing_ngsim_column(self, tmp_path):
        with pytest.raises(MissingColumn):
            load_scenario(write(tmp_path, "Vehicle_ID,Frame_ID,Local_X\n1,1,10\n"), format="ngsim")

    def test_empty(self, tmp_path):
        with pytest.raises(EmptyScenario):
            load_scenario(write(tmp_path, ""), format="ngsim")


class TestObbCorners:
    def extents(self, v):
        c = obb_corners(v)
        return c.min(axis=0), c.max(axis=0)

    def test_axis_aligned(self):
        lo, hi = self.extents(Vehicle(0, (0, 0, 0.75), 4, 2, 1.5, 0.0))
        np.testing.assert_allclose(lo, [-2, -1, 0], atol=1e-12)
        np.testing.assert_allclose(hi, [2, 1, 1.5], atol=1e-12)

    def test_quarter_turn(self):
        lo, hi = self.extents(Vehicle(0, (0, 0, 0.75), 4, 2, 1.5, math.pi / 2))
        np.testing.assert_allclose(lo[:2], [-1, -2], atol=1e-12)
        np.testing.assert_allclose(hi[:2], [1, 2], atol=1e-12)

    def test_diagonal_extent(self):
        lo, hi = self.extents(Vehicle(0, (0, 0, 0.75), 4, 2, 1.5, math.pi / 4))
        half = (4 * math.cos(math.pi / 4) + 2 * math.sin(math.pi / 4)) / 2
        assert half == pytest.approx(3 * math.sqrt(2) / 2, abs=1e-12)
        assert hi[0] == pytest.approx(half, abs=1e-9)
        assert lo[0] == pytest.approx(-half, abs=1e-9)

    def test_ordering(self):
        c = obb_corners(Vehicle(0, (0, 0, 1), 4, 2, 2, 0.0))
        np.testing.assert_allclose(c[0], [-2, -1, 0])
        np.testing.assert_allclose(c[7], [2, 1, 2])
        np.testing.assert_allclose(c[4], [2, -1, 0])

    @given(
        st.tuples(*[st.floats(-100, 100)] * 3),
        st.floats(0.5, 20), st.floats(0.5, 5), st.floats(0.5, 5), st.floats(-math.pi, math.pi),
    )
    def test_centroid_and_radius(self, center, l, w, h, heading):
        v = Vehicle(1, center, l, w, h, heading)
        c = obb_corners(v)
        np.testing.assert_allclose(c.mean(axis=0), v.center, atol=1e-12)
        radius = math.sqrt((l / 2) ** 2 + (w / 2) ** 2 + (h / 2) ** 2)
        np.testing.assert_allclose(np.linalg.norm(c - v.center, axis=1), radius, atol=1e-12)


vehicle_st = st.builds(
    lambda vid, x, y, hd, l, w, h: Vehicle.on_ground(vid, x, y, hd, l, w, h),
    st.integers(0, 10**6), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-math.pi, math.pi),
    st.floats(0.1, 30), st.floats(0.1, 5), st.floats(0.1, 5),
)


@given(st.lists(st.lists(vehicle_st, min_size=1, max_size=4, unique_by=lambda v: v.id), min_size=1, max_size=4))
@settings(max_examples=40, deadline=None)
def test_csv_round_trip(tmp_path_factory, frames):
    sc = Scenario(tuple(ScenarioFrame(i * 3, tuple(vs)) for i, vs in enumerate(frames)))
    path = tmp_path_factory.mktemp("rt") / "s.csv"
    save_scenario(sc, path)
    back = load_scenario(path)
    assert [f.frame_id for f in back.frames] == [f.frame_id for f in sc.frames]
    for fa, fb in zip(sc.frames, back.frames):
        for a, b in zip(fa.vehicles, fb.vehicles):
            assert a.id == b.id
            np.testing.assert_allclose(a.center, b.center, atol=1e-9)
            np.testing.assert_allclose([a.length, a.width, a.height], [b.length, b.width, b.height], atol=1e-9)
            assert abs(normalize_angle(a.heading - b.heading)) < 1e-9


def test_normalize_angle_range():
    for t in np.linspace(-20, 20, 401):
        n = normalize_angle(t)
        assert -math.pi <= n < math.pi
        assert math.isclose(math.cos(n), math.cos(t), abs_tol=1e-12)


def test_subsample():
    sc = Scenario(tuple(ScenarioFrame(i) for i in range(10)))
    assert [f.frame_id for f in sc.subsample(3).frames] == [0, 3, 6, 9]
    with pytest.raises(ValueError):
        sc.subsample(0)
