import numpy as np
import pytest

from projlab import serialize
from projlab.additive import GridSet, PairGraph
from projlab.delta_core import DirectionSet, PointSet2D, ScalarSet
from projlab.errors import CsvFormatError
from projlab.product_construction import ProductLikeSet


def test_scalar_roundtrip_17_digits(tmp_path):
    rng = np.random.default_rng(1)
    s = ScalarSet(rng.uniform(0, 1, 50))
    path = tmp_path / "s.csv"
    serialize.write_scalars(path, s)
    back = serialize.read_scalars(path)
    assert np.array_equal(back.values, s.values)
    # byte stability: write(read(x)) == write(x)
    path2 = tmp_path / "s2.csv"
    serialize.write_scalars(path2, back)
    assert path.read_bytes() == path2.read_bytes()


def test_points_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    p = PointSet2D(rng.uniform(0, 1, (40, 2)))
    path = tmp_path / "p.csv"
    serialize.write_points(path, p)
    back = serialize.read_points(path)
    assert np.array_equal(back.points, p.points)


def test_directions_roundtrip(tmp_path):
    e = DirectionSet.net(16)
    path = tmp_path / "e.csv"
    serialize.write_directions(path, e)
    assert np.array_equal(serialize.read_directions(path).thetas, e.thetas)


def test_gridset_roundtrip_and_header(tmp_path):
    g = GridSet([3, 1, 8], 2.0 ** -6)
    path = tmp_path / "g.csv"
    serialize.write_gridset(path, g)
    back = serialize.read_gridset(path)
    assert back == g
    text = path.read_text()
    assert text.startswith("# delta=")


def test_product_roundtrip(tmp_path):
    d = 2.0 ** -8
    base = ScalarSet([0.125, 0.5])
    fibers = {0.125: ScalarSet([0.0, 4 * d]), 0.5: ScalarSet([8 * d])}
    p = ProductLikeSet(base, fibers, d, 0.5, 0.5)
    path = tmp_path / "prod.csv"
    serialize.write_product(path, p)
    back = serialize.read_product(path)
    assert back.delta == p.delta and back.s == p.s and back.tau == p.tau
    assert list(back.base) == list(p.base)
    for b in base:
        assert list(back.fibers[b]) == list(p.fibers[b])


def test_pairgraph_roundtrip(tmp_path):
    g = GridSet(range(5), 0.25)
    pg = PairGraph(g, g, [(0, 1), (2, 3)])
    path = tmp_path / "pg.csv"
    serialize.write_pairgraph(path, pg)
    assert serialize.read_pairgraph_edges(path) == [(0, 1), (2, 3)]


def test_report_writers(tmp_path):
    sweep = tmp_path / "sweep.csv"
    serialize.write_sweep(sweep, [(0.0, 5, 12), (0.5, 3, 4)])
    assert sweep.read_text().splitlines()[0] == "theta,N_projection,close_pairs"
    prof = tmp_path / "prof.csv"
    serialize.write_profile(prof, [(0.0, 7)])
    assert "theta,N" in prof.read_text()
    trip = tmp_path / "trip.csv"
    serialize.write_triples(trip, [(0.0, 0.5, 1.0, 9)])
    assert trip.read_text().splitlines()[0] == "b1,b2,b3,intersection_size"


def test_weighted_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    pts = PointSet2D(rng.uniform(0, 1, (20, 2)))
    w = rng.uniform(0, 1, 20)
    path = tmp_path / "w.csv"
    serialize.write_weighted(path, pts, w)
    back_pts, back_w = serialize.read_weighted(path)
    assert np.array_equal(back_pts.points, pts.points)
    assert np.allclose(back_w, w)


def test_two_scale_directory(tmp_path):
    from projlab.generators import gen_random_frostman
    from projlab.scale_blowup import frostman_weights, two_scale_decomposition

    d = 2.0 ** -6
    pts = gen_random_frostman(64, 1.0, d, seed=4)
    mu = frostman_weights(pts, 1.0, min_scale=d)
    ts = two_scale_decomposition(pts, mu, d)
    out = tmp_path / "ts"
    serialize.write_two_scale(out, ts)
    assert (out / "anchors.csv").exists()
    assert (out / "fine.csv").exists()
    assert (out / "balls.csv").exists()
    manifest = (out / "manifest").read_text()
    assert f"balls={len(ts.balls)}" in manifest


def test_parse_errors_carry_line_numbers(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("v\n0.5\nnot-a-number\n")
    with pytest.raises(CsvFormatError) as err:
        serialize.read_scalars(bad)
    assert err.value.line == 3
    missing = tmp_path / "missing.csv"
    missing.write_text("wrong_header\n1.0\n")
    with pytest.raises(CsvFormatError):
        serialize.read_scalars(missing)
    short = tmp_path / "short.csv"
    short.write_text("x,y\n0.5\n")
    with pytest.raises(CsvFormatError) as err:
        serialize.read_points(short)
    assert err.value.line == 2
    nodelta = tmp_path / "nodelta.csv"
    nodelta.write_text("k\n1\n")
    with pytest.raises(CsvFormatError):
        serialize.read_gridset(nodelta)
