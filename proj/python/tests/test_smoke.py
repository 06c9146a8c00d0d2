import json
import math

import numpy as np
import pytest

import orbitfit


@pytest.fixture(scope="module")
def sample_case(tmp_path_factory):
    root = tmp_path_factory.mktemp("case") / "case"
    orbitfit.write_sample_case(root)
    return root


def tetrahedron():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    f = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
    return orbitfit.Mesh(v, f)


def rotation_z(angle, t):
    m = np.eye(4)
    c, s = math.cos(angle), math.sin(angle)
    m[:2, :2] = [[c, -s], [s, c]]
    m[:3, 3] = t
    return m


def test_mesh_roundtrip(tmp_path):
    mesh = tetrahedron()
    assert mesh.is_watertight()
    for name in ("t.stl", "t.ply"):
        orbitfit.save_mesh(mesh, tmp_path / name)
        back = orbitfit.load_mesh(tmp_path / name)
        assert back.triangle_count == 4
        assert np.allclose(np.sort(back.vertices, axis=0), np.sort(mesh.vertices, axis=0))


def test_closest_points_on_a_face():
    index = orbitfit.SpatialIndex(tetrahedron())
    hit = index.closest_points(np.array([[0.2, 0.2, -2.0]]))
    assert hit["distances"][0] == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(hit["points"][0], [0.2, 0.2, 0.0])
    assert hit["signed_distances"][0] == pytest.approx(2.0, abs=1e-12)


def test_landmark_align_and_icp_recover_a_pose(sample_case):
    bone = orbitfit.load_mesh(sample_case / "bone.stl")
    truth = rotation_z(0.2, [3.0, -2.0, 1.5])
    moved = bone.transformed(truth)
    labels = {f"p{i}": bone.vertices[i * 97] for i in range(6)}
    target = {k: (truth[:3, :3] @ v + truth[:3, 3]) for k, v in labels.items()}
    init = orbitfit.landmark_rigid_align({k: list(v) for k, v in labels.items()}, {k: list(v) for k, v in target.items()})
    assert np.allclose(init, truth, atol=1e-9)
    r = orbitfit.icp_rigid(bone.vertices, moved, init, trim_fraction=0.0)
    assert r["residual_rms"] < 1e-3
    assert np.allclose(r["transform"], truth, atol=1e-6)


def test_heatmap_anchors_and_histogram():
    assert orbitfit.heat_color(-5.0) == (255, 0, 0)
    assert orbitfit.heat_color(0.0) == (0, 255, 0)
    assert orbitfit.heat_color(5.0) == (0, 0, 255)
    h = orbitfit.distance_histogram([-7.0, -1.0, 0.0, 4.9, 9.0])
    assert h["total"] == 5
    assert sum(h["counts"]) + h["underflow"] + h["overflow"] == 5


def test_session_fit_rank_export(sample_case, tmp_path):
    s = orbitfit.Session(sample_case)
    assert s.case_id == "synthetic_orbit_001"
    with pytest.raises(orbitfit.OrbitfitError) as err:
        s.ranking()
    assert err.value.kind == "conflict"
    s.register()
    assert len(s.events()) == 2 * len(s.plate_ids)
    reports = s.fit_all()
    assert [r["plate_id"] for r in reports] == s.plate_ids
    ranking = s.ranking()
    assert [e["rank"] for e in ranking["ranking"]] == sorted(e["rank"] for e in ranking["ranking"])
    assert len(ranking["ranking"]) == 4
    a = s.export(tmp_path / "a")
    b = s.export(tmp_path / "b")
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    assert files == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_rejected_transform_and_replay(sample_case, tmp_path):
    s = orbitfit.Session(sample_case)
    s.register(["vendorB_small"])
    with pytest.raises(orbitfit.OrbitfitError) as err:
        s.mutate("set_transform", "vendorB_small", {"matrix": np.diag([1, 1, 0.9, 1]).tolist()})
    assert err.value.kind == "rejected-transform"
    for k in range(10):
        s.mutate("pivot_rotate", "vendorB_small", {"axis": [0, 1, 0.3], "angle": 0.01 * k})
        s.mutate("nudge", "vendorB_small", {"delta": [0.0, 0.05, -0.02]})
    events = s.events()
    assert len(events) == 22

    other = orbitfit.Session(sample_case)
    other.replay(json.loads(json.dumps(events)))
    assert other.placements() == s.placements()
    s.save(tmp_path / "saved")
    assert orbitfit.Session(tmp_path / "saved").placements() == s.placements()
