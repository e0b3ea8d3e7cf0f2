import json
import math

import numpy as np
import pytest

import soliton_lab as sl

P = sl.Params(2.0)


def test_params():
    assert P.C == 2.0 and P.n == 2
    assert P.ctilde == pytest.approx(math.sqrt(0.75), abs=1e-15)
    with pytest.raises(sl.ArgumentError):
        sl.Params(0.5)


def test_hyperplane_residual_vanishes():
    u = sl.sample_square(lambda x, y: P.ctilde * x, 5.0, 0.5)
    assert np.max(np.abs(u.residual(P))) < 1e-12


def test_radial_profile_and_fit():
    prof = sl.solve_radial(P, 300.0)
    assert prof.ddphi[0] == pytest.approx(0.5, abs=1e-6)
    assert np.all(np.diff(prof.phi) > 0.0)
    fit = sl.asymptotic_fit(prof, 50.0, 200.0)
    assert fit.slope == pytest.approx(P.ctilde, abs=1e-3)
    assert fit.logcoef == pytest.approx(-0.25, abs=0.025)


def test_dirichlet_disk_matches_radial():
    prof = sl.solve_radial(P, 10.0)
    u, report = sl.solve_dirichlet_disk(P, 4.0, 0.2)
    assert report.converged
    r = np.linalg.norm(u.positions, axis=1)
    exact = np.array([prof.value(s) for s in r]) - prof.value(4.0)
    assert np.max(np.abs(u.values - exact)) <= 0.5 * 0.2**2
    assert np.min(u.mean_curvature(P)) > 0.0


def test_dirichlet_rejects_tiny_domain():
    with pytest.raises(sl.RefinementError):
        sl.solve_dirichlet_disk(P, 0.3, 0.1)


def test_smooth_min():
    assert sl.smooth_min([3.0, 1.0, 2.0], 0.0) == 1.0
    assert sl.smooth_min([1.0, 1.0], 0.1) < 1.0


def test_hessian_identity_converges():
    fn = lambda x, y: 0.3 * math.sin(x) * math.cos(y)
    e1 = sl.hessian_identity_check(sl.sample_square(fn, 1.0, 0.04))
    e2 = sl.hessian_identity_check(sl.sample_square(fn, 1.0, 0.02))
    assert 3.5 <= e1 / e2 <= 4.5


def test_blowdown_of_plane():
    cone = sl.blowdown(lambda x, y: 0.5 * x, 360, [10.0, 20.0, 40.0])
    assert sl.eikonal_check(cone, sl.Params(1.0 / math.sqrt(0.75))) < 1e-6


def test_split_lift_is_affine_in_trivial_direction():
    reduced = sl.solve_radial(sl.Params(1.6, 1), 10.0)
    u, c_reduced, lam = sl.split_lift(lambda x: reduced.value(abs(x[0])), 1, [0.6], P)
    assert c_reduced == pytest.approx(1.6)
    assert u([0.3, 1.7]) - u([0.3, 0.2]) == pytest.approx(0.9, abs=1e-12)


def test_small_construction():
    f = sl.SphereFunction.cosine(0.3, 3, P)
    res = sl.exhaustion_construct(f, P, [10.0, 20.0], 5.0, 0.5, n_angles=180)
    assert len(res.solutions) == 2
    assert min(res.lower_gaps) > -0.02 and min(res.upper_gaps) > -0.02
    assert res.angular_std(4.0) > 0.01


def test_flow_of_soliton_translates():
    prof = sl.solve_radial(P, 10.0)
    u0 = sl.sample_disk(lambda x, y: prof.value(math.hypot(x, y)), P, 3.0, 0.2)
    run = sl.flow(u0, P, 0.2, snapshots=3, observe_radius=1.5)
    assert run.time == pytest.approx(0.2)
    assert len(run.series) == 3
    assert run.series[-1]["s"] < 0.05


def test_field_roundtrip(tmp_path):
    u = sl.sample_square(lambda x, y: 0.1 * x + 0.05 * y, 1.0, 0.25)
    path = str(tmp_path / "u.csv")
    u.write(path, P)
    v = sl.Field.read(path)
    assert np.allclose(u.values, v.values)
    assert v.interpolate(0.1, 0.2) == pytest.approx(0.02, abs=1e-12)


def test_cli(tmp_path):
    assert sl.cli(["--out", str(tmp_path), "radial", "--C", "2", "--rmax", "250"]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["pass"] is True
    assert sl.cli(["--out", str(tmp_path), "nonsense"]) == 2
