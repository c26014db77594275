"""Space construction, generators, and ingestion."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rectiflat import kernels
from rectiflat.core import (Ambient, GeneratorSpec, build_space, diam,
                            generate, load_csv, load_json, parse_generator,
                            save_csv, save_json)
from rectiflat.errors import (AmbientError, DomainError, MetricError,
                              SpecError, WeightError)


def test_collinear_reals_distances():
    sp = build_space(np.array([0.0, 1.0, 3.0]), "euclidean:1")
    assert sp.dist(0, 2) == 3.0
    assert diam(sp, [0, 1, 2]) == 3.0


def test_two_point_matrix():
    sp = build_space(np.array([[0.0, 1.0], [1.0, 0.0]]), "abstract")
    assert sp.n == 2 and sp.dist(0, 1) == 1.0


def test_triangle_violation_rejected():
    M = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
    with pytest.raises(MetricError):
        build_space(M, "abstract")


def test_asymmetric_and_nonzero_diag_rejected():
    with pytest.raises(MetricError):
        build_space(np.array([[0.0, 1.0], [2.0, 0.0]]), "abstract")
    with pytest.raises(MetricError):
        build_space(np.array([[0.5, 1.0], [1.0, 0.0]]), "abstract")


def test_nonpositive_weight_rejected():
    with pytest.raises(WeightError):
        build_space(np.array([[0.0, 1.0], [1.0, 0.0]]), "abstract", weights=[1.0, 0.0])


def test_default_weights_are_uniform_hs_surrogate():
    sp = build_space(np.array([0.0, 1.0, 3.0]), "euclidean:1", s=1.0)
    assert sp.default_weights
    np.testing.assert_allclose(sp.weights, 3.0 / 3)
    sp2 = build_space(np.array([0.0, 2.0]), "euclidean:1", s=2.0)
    np.testing.assert_allclose(sp2.weights, 4.0 / 2)


def test_diam_examples():
    sp = build_space(np.array([0.0, 1.0, 3.0]), "euclidean:1")
    assert diam(sp, [1]) == 0.0
    with pytest.raises(DomainError):
        diam(sp, [])
    circle = generate(GeneratorSpec("circle", n=16))
    # oracle: exact pairwise max (antipodal pair present for even n)
    assert abs(diam(circle, circle.all_ids()) - 2.0) < 1e-2


def test_line_generator_matches_stated_points():
    sp = generate(GeneratorSpec("line", n=4))
    np.testing.assert_allclose(sp.coords[:, 0], [0.0, 1 / 3, 2 / 3, 1.0])
    np.testing.assert_allclose(sp.weights, 0.25)
    assert str(sp.ambient) == "euclidean:2"


def test_cantor_generator():
    sp = generate(GeneratorSpec("cantor4", depth=2))
    assert sp.n == 16
    np.testing.assert_allclose(sp.weights, 1.0 / 16)
    assert sp.s == 1.0


def test_parallel_lines_generator():
    sp = generate(GeneratorSpec("parallel-lines", n=64, eps=1 / 8, r=1.0))
    ys = np.unique(sp.coords[:, 1])
    np.testing.assert_allclose(ys, [0.0, 1 / 8])
    assert (sp.coords[:, 1] == 0.0).sum() == 32


def test_generator_determinism():
    a = generate(GeneratorSpec("perturbed-line", n=32, seed=5, noise=0.01))
    b = generate(GeneratorSpec("perturbed-line", n=32, seed=5, noise=0.01))
    assert np.array_equal(a.coords, b.coords)
    assert np.array_equal(a.D, b.D)


def test_generator_param_validation():
    with pytest.raises(SpecError):
        GeneratorSpec("parallel-lines", n=8, eps=0.75)
    with pytest.raises(SpecError):
        GeneratorSpec("cantor4", depth=9)
    with pytest.raises(SpecError):
        GeneratorSpec("warp", n=4)
    with pytest.raises(SpecError):
        parse_generator("line,m=3")


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["line", "circle", "perturbed-line"]),
       st.integers(3, 40), st.integers(0, 10))
def test_metric_axioms_on_generated_spaces(kind, n, seed):
    sp = generate(GeneratorSpec(kind, n=n, seed=seed))
    assert kernels.triangle_violation(sp.D) <= 1e-9
    assert np.array_equal(sp.D, sp.D.T)
    assert np.all(np.diag(sp.D) == 0)


def test_coordinate_matrix_consistency():
    for kind in ("line", "circle", "zigzag-lift"):
        sp = generate(GeneratorSpec(kind, n=20, depth=2))
        assert sp.matrix_consistent()


def test_euclidean_dist_equals_norm():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 3))
    sp = build_space(X, "euclidean:3")
    i, j = 4, 17
    assert sp.dist(i, j) == pytest.approx(float(np.linalg.norm(X[i] - X[j])), rel=1e-12)


def test_csv_roundtrip(tmp_path):
    sp = generate(GeneratorSpec("cantor4", depth=2))
    path = tmp_path / "pts.csv"
    save_csv(sp, path)
    back = load_csv(path, "euclidean:2", s=1.0)
    np.testing.assert_allclose(back.coords, sp.coords)
    np.testing.assert_allclose(back.weights, sp.weights)


def test_json_roundtrip(tmp_path):
    sp = generate(GeneratorSpec("zigzag-lift", n=12, depth=2))
    path = tmp_path / "sp.json"
    save_json(sp, path)
    back = load_json(path)
    np.testing.assert_allclose(back.coords, sp.coords)
    assert str(back.ambient) == "heisenberg:1"


def test_heisenberg_csv_columns(tmp_path):
    sp = generate(GeneratorSpec("zigzag-lift", n=8, depth=1))
    path = tmp_path / "h.csv"
    save_csv(sp, path)
    header = open(path).readline().strip().split(",")
    assert header == ["x1", "x2", "x3", "weight"]
    back = load_csv(path, "heisenberg:1")
    assert back.n == 8


def test_ambient_parse_errors():
    assert str(Ambient.parse("heisenberg:2")) == "heisenberg:2"
    with pytest.raises(AmbientError):
        Ambient.parse("euclidean")
    with pytest.raises(AmbientError):
        build_space(np.zeros((3, 3)), "euclidean:2")
