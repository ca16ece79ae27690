import numpy as np
import pytest

from viscofix import (
    AffineSpan,
    Ball,
    Box,
    ConfigurationError,
    Halfspace,
    InputError,
    WholeSpace,
    euclidean,
    inner,
    norm,
    project,
    trapezoid,
    trapezoid_nodes,
)


def test_inner_euclidean_values():
    sp = euclidean(2)
    assert inner(sp, [1.0, 0.0], [0.0, 1.0]) == 0.0
    assert inner(sp, [3.0, 4.0], [3.0, 4.0]) == 25.0


def test_inner_trapezoid_constant_one():
    sp = trapezoid(2)
    assert np.allclose(sp.weights, [0.25, 0.5, 0.25])
    # weights sum to 1 = integral of 1 over [0, 1]
    assert inner(sp, np.ones(3), np.ones(3)) == pytest.approx(1.0, abs=1e-15)


def test_norm_values():
    assert norm(euclidean(2), [3.0, 4.0]) == 5.0
    assert norm(euclidean(3), np.zeros(3)) == 0.0
    assert norm(trapezoid(2), [0.0, 1.0, 0.0]) == pytest.approx(
        np.sqrt(0.5), abs=1e-15
    )


def test_trapezoid_nodes_are_uniform():
    m = 7
    nodes = trapezoid_nodes(m)
    assert nodes.shape == (m + 1,)
    assert np.allclose(nodes, np.arange(m + 1) / m)
    assert trapezoid(m).dim == m + 1


def test_dimension_mismatch_rejected():
    sp = euclidean(2)
    with pytest.raises(InputError):
        inner(sp, [1.0, 2.0, 3.0], [1.0, 2.0])
    with pytest.raises(InputError):
        norm(sp, [1.0])
    with pytest.raises(InputError):
        sp.point([[1.0, 2.0]])


def test_space_validation():
    with pytest.raises(ConfigurationError):
        euclidean(0)
    with pytest.raises(ConfigurationError):
        trapezoid(0)
    from viscofix.space import SpaceDescriptor

    with pytest.raises(ConfigurationError):
        SpaceDescriptor(dim=2, weights=np.array([1.0, 0.0]))
    with pytest.raises(ConfigurationError):
        SpaceDescriptor(dim=2, weights=np.array([1.0, np.inf]))


def test_weights_are_read_only():
    sp = euclidean(3)
    with pytest.raises(ValueError):
        sp.weights[0] = 2.0


def test_project_ball_examples():
    sp = euclidean(2)
    ball = Ball(np.zeros(2), 1.0)
    assert np.allclose(project(sp, ball, [3.0, 4.0]), [0.6, 0.8])
    inside = np.array([0.1, -0.2])
    assert np.array_equal(project(sp, ball, inside), inside)


def test_project_box_examples():
    sp = euclidean(2)
    box = Box([0.0, 0.0], [1.0, 1.0])
    assert np.allclose(project(sp, box, [0.5, 2.0]), [0.5, 1.0])
    assert np.allclose(project(sp, box, [-3.0, 0.25]), [0.0, 0.25])


def test_project_affine_span_line():
    sp = euclidean(2)
    line = AffineSpan(sp, base=np.zeros(2), directions=[[1.0, 0.0]])
    assert np.allclose(project(sp, line, [3.0, 4.0]), [3.0, 0.0])


def test_project_halfspace():
    sp = euclidean(2)
    hs = Halfspace([1.0, 0.0], 1.0)
    assert np.allclose(project(sp, hs, [3.0, 4.0]), [1.0, 4.0])
    assert np.allclose(project(sp, hs, [0.5, -2.0]), [0.5, -2.0])


def test_project_whole_space_is_identity():
    sp = euclidean(3)
    x = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(project(sp, WholeSpace(), x), x)


def test_project_rejects_unknown_set():
    with pytest.raises(ConfigurationError):
        project(euclidean(1), object(), [0.0])


def _sample_sets(space):
    sets = [
        WholeSpace(),
        Box(-np.ones(space.dim), np.ones(space.dim)),
        Ball(np.full(space.dim, 0.3), 1.5),
        Halfspace(np.arange(1.0, space.dim + 1.0), 0.7),
    ]
    direction = np.zeros(space.dim)
    direction[0] = 1.0 / np.sqrt(space.weights[0])
    sets.append(AffineSpan(space, base=np.zeros(space.dim), directions=[direction]))
    return sets


@pytest.mark.parametrize("space", [euclidean(3), trapezoid(4)], ids=["euclid3", "trap4"])
def test_projection_properties_random_pairs(space):
    rng = np.random.default_rng(7)
    for cset in _sample_sets(space):
        for _ in range(1000):
            x = rng.standard_normal(space.dim) * 3.0
            y = rng.standard_normal(space.dim) * 3.0
            px = project(space, cset, x)
            py = project(space, cset, y)
            # nonexpansive
            assert norm(space, px - py) <= norm(space, x - y) + 1e-12
            # idempotent
            assert norm(space, project(space, cset, px) - px) <= 1e-12
            # obtuse angle against a member z of the set
            z = project(space, cset, rng.standard_normal(space.dim) * 3.0)
            assert inner(space, x - px, z - px) <= 1e-10


def test_inner_symmetry_and_parallelogram():
    space = trapezoid(5)
    rng = np.random.default_rng(11)
    for _ in range(1000):
        x = rng.standard_normal(space.dim) * 2.0
        y = rng.standard_normal(space.dim) * 2.0
        assert inner(space, x, y) == pytest.approx(inner(space, y, x), abs=1e-12)
        lhs = norm(space, x + y) ** 2 + norm(space, x - y) ** 2
        rhs = 2.0 * norm(space, x) ** 2 + 2.0 * norm(space, y) ** 2
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_affine_span_validates_directions():
    sp = euclidean(2)
    with pytest.raises(ConfigurationError):
        AffineSpan(sp, base=np.zeros(2), directions=[[2.0, 0.0]])  # not unit
    with pytest.raises(ConfigurationError):
        AffineSpan(
            sp, base=np.zeros(2), directions=[[1.0, 0.0], [1.0, 0.0]]
        )  # not orthogonal
    # weighted space changes what counts as unit length
    tz = trapezoid(2)
    with pytest.raises(ConfigurationError):
        AffineSpan(tz, base=np.zeros(3), directions=[[1.0, 0.0, 0.0]])
    AffineSpan(tz, base=np.zeros(3), directions=[[2.0, 0.0, 0.0]])  # w0 = 1/4


def test_affine_span_rejects_other_space():
    sp = euclidean(2)
    line = AffineSpan(sp, base=np.zeros(2), directions=[[0.0, 1.0]])
    with pytest.raises(InputError):
        line.project(trapezoid(1), np.zeros(2))


def test_ball_and_halfspace_validation():
    with pytest.raises(ConfigurationError):
        Ball(np.zeros(2), 0.0)
    with pytest.raises(ConfigurationError):
        Ball(np.array([np.nan, 0.0]), 1.0)
    with pytest.raises(ConfigurationError):
        Halfspace(np.zeros(2), 1.0)
    with pytest.raises(ConfigurationError):
        Box([0.0, 2.0], [1.0, 1.0])


def test_ball_projection_uses_weighted_norm():
    # under trapezoid(2) weights (1/4, 1/2, 1/4) the point (2,0,0) has norm 1
    sp = trapezoid(2)
    ball = Ball(np.zeros(3), 1.0)
    x = np.array([4.0, 0.0, 0.0])  # weighted norm 2
    px = project(sp, ball, x)
    assert np.allclose(px, [2.0, 0.0, 0.0])
    assert norm(sp, px) == pytest.approx(1.0, abs=1e-15)
