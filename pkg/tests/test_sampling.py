import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from poropinn import pde, sampling
from poropinn.errors import ConfigError
from poropinn.sampling import GridSpec


def stratum_counts(points, n, box=sampling.UNIT_CUBE):
    """Per-axis occupancy of the n equal strata."""
    out = []
    for k, (lo, hi) in enumerate(box):
        idx = np.floor((points[:, k] - lo) / (hi - lo) * n).astype(int)
        out.append(np.bincount(np.clip(idx, 0, n - 1), minlength=n))
    return out


def brute_boundary(nx, nz, nt):
    return sum(1 for i, j, _ in itertools.product(range(nx), range(nz), range(nt))
               if i in (0, nx - 1) or j in (0, nz - 1))


# -- grid and data extraction -------------------------------------------------------------


def test_grid_corners():
    g = sampling.make_grid(GridSpec(2, 2, 2))
    assert len(g) == 8
    assert {tuple(p) for p in g} == set(itertools.product((0.0, 1.0), repeat=3))


def test_grid_order_t_outermost():
    g = sampling.make_grid(GridSpec(3, 4, 5))
    assert np.array_equal(g[:3, 0], [0.0, 0.5, 1.0])
    assert np.all(g[:12, 2] == 0.0) and g[12, 2] == 0.25


def test_default_counts():
    gs = GridSpec()
    assert len(sampling.make_grid(gs)) == 125000
    assert len(sampling.extract_ic(gs)) == 2500
    assert len(sampling.extract_bc(gs)) == 9800
    assert len(sampling.training_data(gs)) == 12300


@pytest.mark.parametrize("shape", [(2, 2, 2), (3, 3, 2), (4, 6, 3), (7, 5, 4)])
def test_counts_match_enumeration(shape):
    gs = GridSpec(*shape)
    assert len(sampling.extract_ic(gs)) == shape[0] * shape[1]
    assert len(sampling.extract_bc(gs)) == brute_boundary(*shape)


def test_small_bc_example():
    assert len(sampling.extract_bc(GridSpec(3, 3, 2))) == 16
    assert len(sampling.extract_ic(GridSpec(2, 2, 2))) == 4


def test_labels_are_analytic():
    gs = GridSpec(5, 5, 5)
    for ds in (sampling.extract_ic(gs), sampling.extract_bc(gs)):
        assert np.array_equal(ds.targets, pde.analytic_solution(ds.points))
    ic = sampling.extract_ic(gs)
    assert np.all(ic.points[:, 2] == 0.0)
    bc = sampling.extract_bc(gs).points
    assert np.all((bc[:, 0] == 0) | (bc[:, 0] == 1) | (bc[:, 1] == 0) | (bc[:, 1] == 1))


@pytest.mark.parametrize("bad", [1, 0, 2.5])
def test_grid_rejects_bad_sizes(bad):
    with pytest.raises(ConfigError):
        GridSpec(bad, 5, 5)


# -- Latin hypercube ---------------------------------------------------------------------------------


def test_lhs_single_point():
    box = ((2.0, 3.0), (0.0, 1.0), (0.5, 0.6))
    p = sampling.lhs_sample(1, box, seed=3).points
    assert p.shape == (1, 3)
    assert all(lo <= v <= hi for v, (lo, hi) in zip(p[0], box))


def test_lhs_five_strata():
    for counts in stratum_counts(sampling.lhs_sample(5, seed=0).points, 5):
        assert np.all(counts == 1)


def test_lhs_1000_in_10_bins():
    p = sampling.lhs_sample(1000, seed=9).points
    for counts in stratum_counts(p, 10):
        assert np.all(counts == 100)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 400), seed=st.integers(0, 2**32 - 1), centered=st.booleans(),
       lo=st.floats(-5, 5), width=st.floats(0.1, 10))
def test_lhs_stratified_property(n, seed, centered, lo, width):
    box = ((lo, lo + width), (0.0, 1.0), (0.3, 0.4))
    p = sampling.lhs_sample(n, box, seed=seed, centered=centered).points
    for counts in stratum_counts(p, n, box):
        assert np.all(counts == 1)


def test_lhs_seed_reproducible():
    a = sampling.lhs_sample(100, seed=5).points
    assert np.array_equal(a, sampling.lhs_sample(100, seed=5).points)
    assert not np.array_equal(a, sampling.lhs_sample(100, seed=6).points)


def test_lhs_centered_uses_midpoints():
    p = sampling.lhs_sample(4, seed=0, centered=True).points
    assert sorted(p[:, 0]) == [0.125, 0.375, 0.625, 0.875]


def test_lhs_rejects_bad_args():
    with pytest.raises(ValueError):
        sampling.lhs_sample(0)
    with pytest.raises(ValueError):
        sampling.lhs_sample(3, ((1.0, 0.0),))


# -- curriculum schedule ----------------------------------------------------------------------------------


def test_default_schedule_counts():
    s = sampling.build_schedule(GridSpec(), n_intervals=10, colloc_per_interval=100)
    assert [len(d) for d in s.per_interval_data] == [2500 + 980] + [980] * 9
    assert all(len(c) == 100 for c in s.per_interval_colloc)
    assert sum(len(c) for c in s.per_interval_colloc) == 1000


def test_single_interval_is_standard_split():
    gs = GridSpec(6, 6, 6)
    s = sampling.build_schedule(gs, n_intervals=1, colloc_per_interval=50, seed=4)
    data, colloc = s.stage(0)
    full = sampling.training_data(gs)
    assert np.array_equal(data.points, full.points)
    assert np.array_equal(colloc.points, sampling.lhs_sample(50, seed=4).points)


def test_partition_covers_training_data():
    gs = GridSpec(6, 5, 11)
    s = sampling.build_schedule(gs, n_intervals=4, colloc_per_interval=8)
    merged = sampling.concat_labeled(s.per_interval_data)
    full = sampling.training_data(gs)
    key = lambda a: sorted(map(tuple, a))
    assert key(merged.points) == key(full.points)


def test_time_ranges_tile_unit_interval():
    s = sampling.build_schedule(GridSpec(5, 5, 21), n_intervals=4, colloc_per_interval=30)
    for i, c in enumerate(s.per_interval_colloc):
        lo, hi = s.edges[i], s.edges[i + 1]
        assert c.t_range == (lo, hi)
        assert np.all((c.points[:, 2] >= lo) & (c.points[:, 2] <= hi))
    assert s.edges[0] == 0.0 and s.edges[-1] == 1.0


def test_edge_levels_go_to_earlier_interval():
    # 11 levels, 5 intervals: level 2 (t=0.2) sits on the first shared edge
    assert list(sampling.interval_of_level(np.arange(11), 11, 5)) == [0, 0, 0, 1, 1, 2, 2, 3, 3, 4, 4]


def test_cumulative_stage_accumulates():
    s = sampling.build_schedule(GridSpec(5, 5, 9), n_intervals=4, colloc_per_interval=10, mode="cumulative")
    data, colloc = s.stage(2)
    assert len(data) == sum(len(d) for d in s.per_interval_data[:3])
    assert len(colloc) == 30 and colloc.t_range == (0.0, 0.75)


def test_ic_subsample():
    s = sampling.build_schedule(GridSpec(), ic_subsample=250, subsample_seed=1)
    assert len(s.per_interval_data[0]) == 250 + 980
    again = sampling.build_schedule(GridSpec(), ic_subsample=250, subsample_seed=1)
    assert np.array_equal(s.per_interval_data[0].points, again.per_interval_data[0].points)


def test_schedule_errors():
    with pytest.raises(ConfigError, match="grid.nt"):
        sampling.build_schedule(GridSpec(5, 5, 5), n_intervals=10)
    with pytest.raises(ConfigError):
        sampling.build_schedule(GridSpec(5, 5, 11), n_intervals=2, mode="sideways")
    with pytest.raises(ConfigError):
        sampling.build_schedule(GridSpec(5, 5, 11), ic_subsample=0)


def test_write_csv(tmp_path):
    gs = GridSpec(3, 3, 2)
    sampling.write_csv(sampling.extract_ic(gs), tmp_path / "ic.csv")
    lines = (tmp_path / "ic.csv").read_text().splitlines()
    assert lines[0] == "x,z,t,u,v,p" and len(lines) == 10
    sampling.write_csv(sampling.lhs_sample(4), tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().splitlines()[0] == "x,z,t"
