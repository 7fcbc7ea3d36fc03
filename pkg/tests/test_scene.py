import json
import math

import numpy as np
import pytest

from fieldlab.analysis import extract_equipotentials, field_at, trace_field_lines
from fieldlab.grid import CoordSystem, Dirichlet, Neumann
from fieldlab.scene import (
    PRESET_NAMES,
    Annulus,
    Circle,
    Pin,
    Rect,
    SceneError,
    SetEps,
    TiltedPlate,
    load_scene,
    parse_scene,
    preset,
    preset_names,
    rasterize,
    scene_to_dict,
    serialize_scene,
    solve_scene,
)

MINIMAL = {
    "grid": {"n1": 10, "n2": 10},
    "boundaries": {"low2": {"type": "dirichlet", "value": 0}, "high2": {"type": "dirichlet", "value": 100}},
}


def _doc(**extra):
    doc = json.loads(json.dumps(MINIMAL))
    doc.update(extra)
    return doc


class TestParse:
    def test_minimal(self):
        s = parse_scene(json.dumps(MINIMAL))
        assert s.regions == () and s.grid.shape == (10, 10)
        assert s.boundaries.low2 == Dirichlet(0) and s.boundaries.low1 == Neumann()

    def test_tube_preset_document(self):
        s = preset("pr2_tube")
        (region,) = s.regions
        assert isinstance(region.shape, Annulus) and region.effect == SetEps(3.0)

    def test_annulus_radii_order(self):
        doc = _doc(regions=[{"shape": {"type": "annulus", "center": [5, 5], "r_in": 4, "r_out": 2},
                             "effect": {"type": "set_eps", "value": 2}}])
        with pytest.raises(SceneError) as exc:
            parse_scene(doc)
        assert any(e.startswith("regions[0].shape") and "r_in" in e for e in exc.value.errors)

    @pytest.mark.parametrize("doc, where", [
        ({"boundaries": {}}, "$"),
        (_doc(regions=[{"shape": {"type": "hexagon"}, "effect": {"type": "pin", "volts": 0}}]), "regions[0].shape"),
        (_doc(regions=[{"shape": {"type": "circle", "center": [1, 1], "radius": -2},
                        "effect": {"type": "pin", "volts": 0}}]), "regions[0].shape"),
        (_doc(regions=[{"shape": {"type": "rect", "i": [1, 2], "j": [1, 2]},
                        "effect": {"type": "glow"}}]), "regions[0].effect"),
        (_doc(grid={"n1": 1, "n2": 10}), "grid"),
        (_doc(solver={"tolerance": -1}), "solver"),
    ])
    def test_errors_carry_location(self, doc, where):
        with pytest.raises(SceneError) as exc:
            parse_scene(doc)
        assert any(e.startswith(where) for e in exc.value.errors), exc.value.errors

    def test_all_errors_reported(self):
        doc = _doc(regions=[
            {"shape": {"type": "circle", "center": [1, 1], "radius": -2}, "effect": {"type": "pin", "volts": 0}},
            {"shape": {"type": "hexagon"}, "effect": {"type": "pin", "volts": 0}},
        ])
        with pytest.raises(SceneError) as exc:
            parse_scene(doc)
        assert len(exc.value.errors) == 2

    def test_bad_json_location(self):
        with pytest.raises(SceneError) as exc:
            parse_scene('{"grid": {"n1": 10,,}}')
        assert "line 1" in exc.value.errors[0]

    def test_curvilinear_rejects_set_eps(self):
        doc = _doc(grid={"n1": 10, "n2": 10, "h1": 0.1, "h2": 0.1, "system": "polar", "r0": 1.0},
                   regions=[{"shape": {"type": "rect", "i": [1, 3], "j": [1, 3]},
                             "effect": {"type": "set_eps", "value": 2}}])
        with pytest.raises(SceneError):
            parse_scene(doc)

    def test_load_missing_file_names_path(self, tmp_path):
        with pytest.raises(SceneError) as exc:
            load_scene(tmp_path / "nope.json")
        assert "nope.json" in str(exc.value)


class TestRasterize:
    def test_pr1(self):
        r = rasterize(preset("pr1"))
        i, j = np.meshgrid(np.arange(1, 71), np.arange(1, 71), indexing="ij")
        np.testing.assert_allclose(r.eps.values, 1 + 0.015 * i * j)
        pos = (i > 20) & (i < 30) & (j > 30) & (j < 35)
        neg = (i > 40) & (i < 55) & (j > 40) & (j < 55)
        assert (r.rho.values[pos] == 500).all() and (r.rho.values[neg] == -300).all()
        assert not r.rho.values[~(pos | neg)].any()
        strip = (i == 55) & (j >= 15) & (j <= 25)
        np.testing.assert_array_equal(r.mask.pinned, strip)
        assert (r.mask.values[strip] == 0).all()

    def test_empty_regions(self):
        r = rasterize(parse_scene(_doc(background={"eps": 2.5})))
        assert (r.eps.values == 2.5).all() and not r.rho.values.any() and len(r.mask) == 0

    def test_later_region_wins(self):
        doc = _doc(regions=[
            {"shape": {"type": "rect", "i": [0, 5], "j": [0, 5]}, "effect": {"type": "set_eps", "value": 2}},
            {"shape": {"type": "rect", "i": [4, 8], "j": [4, 8]}, "effect": {"type": "set_eps", "value": 7}},
        ])
        eps = rasterize(parse_scene(doc)).eps.values
        assert eps[5, 5] == 7 and eps[3, 3] == 2 and eps[0, 9] == 1

    def test_properties_independent(self):
        doc = _doc(regions=[
            {"shape": {"type": "rect", "i": [1, 5], "j": [1, 5]}, "effect": {"type": "set_rho", "value": 4}},
            {"shape": {"type": "rect", "i": [1, 5], "j": [1, 5]}, "effect": {"type": "set_eps", "value": 3}},
        ])
        r = rasterize(parse_scene(doc))
        assert r.rho.values[3, 3] == 4 and r.eps.values[3, 3] == 3

    def test_deterministic(self):
        s = preset("pr2_tilted_plate")
        a, b = rasterize(s), rasterize(s)
        np.testing.assert_array_equal(a.eps.values, b.eps.values)

    def test_tilted_plate_geometry(self):
        (region,) = preset("pr2_tilted_plate").regions
        shape = region.shape
        assert isinstance(shape, TiltedPlate) and shape.angle == 45 and shape.thickness == 8
        eps = rasterize(preset("pr2_tilted_plate")).eps.values
        assert 0 < (eps == 3).sum() < eps.size / 4


class TestPresets:
    def test_names(self):
        assert preset_names() == list(PRESET_NAMES) and len(PRESET_NAMES) == 10

    def test_unknown_lists_names(self):
        with pytest.raises(SceneError) as exc:
            preset("pr9")
        assert "pr2_tube" in str(exc.value)

    def test_tube_grid(self):
        s = preset("pr2_tube")
        assert s.grid.shape == (80, 95)
        (region,) = s.regions
        assert region.shape.r_out == 34
        assert s.boundaries.low2 == Dirichlet(100) and s.boundaries.high2 == Dirichlet(-100)

    def test_polar_grid(self):
        s = preset("pr4_polar")
        g = s.grid
        assert g.system is CoordSystem.POLAR and g.r0 == 3.0 and g.h1 == 0.1
        assert g.h2 == pytest.approx(math.pi / 200)
        assert s.boundaries.high1 == Dirichlet(20)
        volts = sorted(r.effect.volts for r in s.regions if isinstance(r.effect, Pin))
        assert volts == [-80, 50]

    def test_metal_cylinder_is_pinned(self):
        (region,) = preset("pr2_metal_cylinder").regions
        assert isinstance(region.shape, Circle) and region.effect == Pin(0.0)

    def test_brick_variants(self):
        low, high = preset("pr2_brick_low"), preset("pr2_brick_high")
        assert high.background_eps == 1 and high.regions[0].effect == SetEps(3.0)
        assert low.background_eps == 3 and low.regions[0].effect == SetEps(1.0)
        assert isinstance(high.regions[0].shape, Rect)

    def test_slab_layout(self):
        r = rasterize(preset("pr3_slab1d"))
        eps, rho = r.eps.values[0], r.rho.values[0]
        assert r.spec.shape == (1, 101)
        assert (eps == 5).sum() in (33, 34, 35) and (eps == 2).sum() in (16, 17, 18)
        assert rho[eps == 5].min() > 0 and not rho[eps == 1].any()

    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_round_trip(self, name):
        s = preset(name)
        again = parse_scene(serialize_scene(s))
        assert again == s
        assert scene_to_dict(again) == scene_to_dict(s)

    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_solves_to_convergence(self, name):
        s = preset(name)
        result = solve_scene(s)
        assert result.converged, (name, result.iterations, result.final_residual)
        assert result.final_residual < s.solver.tolerance
        pinned = rasterize(s).mask
        np.testing.assert_array_equal(result.potential.values[pinned.pinned], pinned.values[pinned.pinned])

    def test_override_directory(self, tmp_path, monkeypatch):
        doc = json.loads(serialize_scene(preset("pr2_tube")))
        doc["description"] = "patched"
        (tmp_path / "pr2_tube.json").write_text(json.dumps(doc))
        (tmp_path / "extra.json").write_text(json.dumps(MINIMAL))
        monkeypatch.setenv("FIELDLAB_PRESET_DIR", str(tmp_path))
        assert preset("pr2_tube").description == "patched"
        assert "extra" in preset_names() and preset("extra").grid.shape == (10, 10)
        assert preset("pr1").name == "pr1"

    def test_seed_count(self):
        s = preset("pr2_tube")
        assert len(s.trace.seeds.points()) == 16
        assert len(s.trace.seeds.points(5)) == 5


@pytest.mark.parametrize("name", ["pr2_tube", "pr2_cylinder"])
def test_lines_cross_contours_at_right_angles(name):
    s = preset(name)
    phi = solve_scene(s).potential
    contours = extract_equipotentials(phi, np.linspace(-80, 80, 9))
    dots = []
    for c in contours:
        for p, q in zip(c.points[:-1:4], c.points[1::4]):
            t = q - p
            if np.hypot(*t) == 0:
                continue
            mid = (p + q) / 2
            if not (2 < mid[0] < 77 and 2 < mid[1] < 92):
                continue
            e = field_at(phi, *mid)
            if e.magnitude == 0:
                continue
            dots.append(abs(np.dot(t, (e.e1, e.e2))) / (np.hypot(*t) * e.magnitude))
    assert len(dots) > 50 and np.mean(dots) < 0.1


def test_tube_lines_reach_negative_plate():
    s = preset("pr2_tube")
    phi = solve_scene(s).potential
    lines = trace_field_lines(phi, s.trace.seeds.points(),
                              s.trace.trace_config())
    assert len(lines) == 16
    for line in lines:
        assert line.points[-1, 1] > 93.0
