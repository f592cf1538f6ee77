import numpy as np
import pytest

from poropinn import evaluation, pde
from poropinn.sampling import GridSpec

from conftest import zero_net


def exact(q):
    return pde.analytic_solution(q)


def test_analytic_vs_analytic_slice(params):
    fs = evaluation.field_slice(params, 0.5, 11, 11, predict=exact)
    assert np.all(fs.abs_error == 0.0)
    assert np.all(fs.relative_l2() == 0.0)


def test_slice_values_and_layout(params):
    fs = evaluation.field_slice(params, 0.5, 5, 11)
    assert fs.analytic.shape == (5, 11, 3) and fs.grid == (5, 11)
    # p(x, 0.5, 0.5) = 0.75 exp(-0.75)
    assert fs.analytic[2, 5, 2] == pytest.approx(0.35427491455576104, rel=1e-15)
    np.testing.assert_allclose(fs.predicted[1, 3], evaluation.net.forward(params, (fs.x[1], fs.z[3], 0.5)),
                               rtol=1e-14, atol=1e-15)


def test_t0_slice_has_zero_displacements(params):
    fs = evaluation.field_slice(params, 0.0, 7, 7)
    assert np.all(fs.analytic[..., 0] == 0.0) and np.all(fs.analytic[..., 1] == 0.0)


def test_slice_rejects_out_of_range(params):
    with pytest.raises(ValueError):
        evaluation.field_slice(params, 1.5)


def test_profile_default_times(params):
    table = evaluation.profile(params, 1.0, nz=9)
    assert len(table.times) == 11
    assert table.times[0] == 0.0 and table.times[-1] == 1.0
    assert len(list(table.rows())) == 99


def test_profile_x0_has_zero_u(params):
    table = evaluation.profile(params, 0.0, nz=9)
    assert np.all(table.analytic[..., 0] == 0.0)


def test_analytic_columns_repeatable(params):
    a = evaluation.profile(params, 0.5, nz=13)
    b = evaluation.profile(params, 0.5, nz=13)
    assert a.analytic.tobytes() == b.analytic.tobytes()


def test_error_norms_exact_is_zero(params):
    norms = evaluation.error_norms(params, GridSpec(6, 6, 6), predict=exact)
    assert norms == {f: (0.0, 0.0) for f in evaluation.FIELDS}


def test_error_norms_zero_network(spec):
    gs = GridSpec(6, 7, 8)
    norms = evaluation.error_norms(zero_net(spec), gs)
    for f, (rel, mx) in norms.items():
        assert rel == pytest.approx(1.0, rel=1e-15)
    q = evaluation.make_grid(gs)
    assert norms["p"][1] == np.max(np.abs(exact(q)[:, 2]))


def test_writers(tmp_path, params):
    fs = evaluation.field_slice(params, 0.5, 3, 4)
    evaluation.write_slice_csv(fs, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "# t=0.5"
    assert lines[1] == "x,z,u_exact,v_exact,p_exact,u_pred,v_pred,p_pred"
    assert len(lines) == 2 + 12

    evaluation.write_profile_csv(evaluation.profile(params, 0.5, nz=3), tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "z,t,u_exact,u_pred,v_exact,v_pred,p_exact,p_pred" and len(lines) == 34

    evaluation.write_norms({"u": (0.5, 1.0), "v": (0.25, 2.0), "p": (0.0, 0.0)}, tmp_path / "n.txt")
    assert (tmp_path / "n.txt").read_text().splitlines() == [
        "field,rel_l2,max_abs", "u,0.5,1.0", "v,0.25,2.0", "p,0.0,0.0"]
