import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from gammagh.distributions import GammaGhParams
from gammagh.paths import IncrementSet, simulate_path
from gammagh.rng import make_stream
from gammagh.variation import (
    MismatchedHorizon,
    Partition,
    abs_increment_bounds,
    brownian_qv_moment_theory,
    expected_abs_increment,
    qv_moment_theory,
    quadratic_variation,
    random_partition,
    superpose,
    theory_constants,
    total_variation,
    uniform_partition,
    variation_moment_theory,
)

P = GammaGhParams(1.0, 1.0, 0.0, 0.5)


def test_uniform_partition_examples():
    part = uniform_partition(1.0, 4)
    assert part.points.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert part.mesh == 0.25
    assert uniform_partition(2.0, 1).points.tolist() == [0.0, 2.0]


@pytest.mark.parametrize("n", [1, 10, 1000])
def test_uniform_mesh(n):
    part = uniform_partition(3.0, n)
    assert part.mesh == pytest.approx(3.0 / n, rel=1e-12)
    assert part.cells == n
    assert part.horizon == 3.0
    assert part.deltas.sum() == pytest.approx(3.0, rel=1e-14)


@pytest.mark.parametrize(
    "pts",
    [[0.0], [0.1, 1.0], [0.0, 0.5, 0.5, 1.0], [0.0, 0.6, 0.4, 1.0], [0.0, math.nan], [0.0, math.inf]],
)
def test_partition_validation(pts):
    with pytest.raises(ValueError):
        Partition(pts)


@pytest.mark.parametrize("T, n", [(0.0, 3), (-1.0, 3), (1.0, 0)])
def test_uniform_partition_rejects(T, n):
    with pytest.raises(ValueError):
        uniform_partition(T, n)


def test_partition_equality_and_hash():
    a = Partition([0.0, 0.5, 1.0])
    b = uniform_partition(1.0, 2)
    assert a == b
    assert hash(a) == hash(b)
    assert a != uniform_partition(1.0, 4)


def test_superpose_examples():
    a = Partition([0.0, 0.5, 1.0])
    b = Partition([0.0, 0.25, 1.0])
    assert superpose([a, b]).points.tolist() == [0.0, 0.25, 0.5, 1.0]
    assert superpose([a, a]) == a
    with pytest.raises(MismatchedHorizon):
        superpose([a, Partition([0.0, 2.0])])
    with pytest.raises(ValueError):
        superpose([])


@given(seed=st.integers(0, 2**32), n1=st.integers(1, 40), n2=st.integers(1, 40))
def test_superposition_mesh_shrinks(seed, n1, n2):
    p1 = random_partition(1.0, n1, make_stream(seed, 0))
    p2 = random_partition(1.0, n2, make_stream(seed, 1))
    s = superpose([p1, p2])
    assert s.mesh <= min(p1.mesh, p2.mesh)
    assert set(p1.points) <= set(s.points)


def test_total_variation_grows_under_refinement():
    # 100 random path / partition pairs evaluated on a fine path grid
    n = 2000
    for i in range(100):
        path = simulate_path(GammaGhParams(1.0, 1.0, 1.0, 0.5), 1.0, n, make_stream(31, i))
        rng = make_stream(32, i)
        parts = [
            Partition(np.concatenate(([0.0], np.sort(rng.choice(np.arange(1, n), size=k, replace=False)) / n, [1.0])))
            for k in rng.integers(1, 60, size=2)
        ]
        star = superpose(parts)
        tv_star = total_variation(path.increments_on(star))
        for part in parts:
            assert total_variation(path.increments_on(part)) <= tv_star + 1e-12
        assert tv_star <= total_variation(path.increments) + 1e-12


def test_variation_functionals_examples():
    assert total_variation([0.0, 0.0]) == 0.0
    assert total_variation([1.0, -2.0, 0.5]) == 3.5
    assert quadratic_variation([1.0, -2.0, 0.5]) == 5.25
    assert quadratic_variation(np.zeros(4)) == 0.0
    inc = IncrementSet(uniform_partition(1.0, 3), np.array([1.0, -2.0, 0.5]))
    assert total_variation(inc) == 3.5


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50))
def test_qv_bounded_by_max_times_tv(xs):
    d = np.array(xs)
    assert quadratic_variation(d) <= np.max(np.abs(d)) * total_variation(d) * (1 + 1e-12) + 1e-300


def test_theory_constants_closed_forms():
    c = theory_constants()
    assert c.I1 == pytest.approx(math.sqrt(math.pi) * special.erfc(1.0), rel=1e-12)
    assert c.I2 == pytest.approx(special.exp1(1.0), rel=1e-12)
    assert c.E1 == pytest.approx(1.01456446762355, rel=1e-12)
    assert c.E2 == pytest.approx(6.1944358130594, rel=1e-12)


def test_theory_constants_second_scheme():
    c = theory_constants()
    i1, _ = integrate.quad(lambda x: x**-0.5 * math.exp(-x), 1, np.inf, epsabs=0, epsrel=1e-13)
    i2, _ = integrate.quad(lambda x: math.exp(-x) / x, 1, np.inf, epsabs=0, epsrel=1e-13)
    assert abs(c.I1 - i1) <= 1e-10 * i1
    assert abs(c.I2 - i2) <= 1e-10 * i2


def test_expected_abs_increment_unit_cell():
    p = GammaGhParams(1.0, 1.0, 0.0, 1.0)
    assert expected_abs_increment(p, 1.0) == pytest.approx(1 / math.sqrt(2), rel=1e-14)


def test_expected_abs_increment_small_cell_limit():
    p = GammaGhParams(1.0, 2.0, 0.0, 0.7)
    d = 1e-8
    ratio = expected_abs_increment(p, d) / (p.sigma * math.sqrt(2 / p.beta) * p.a * d)
    assert ratio == pytest.approx(1.0, abs=1e-7)


def test_expected_abs_increment_vectorised():
    d = np.array([0.01, 0.1, 1.0])
    out = expected_abs_increment(P, d)
    assert out.shape == (3,)
    assert out[1] == expected_abs_increment(P, 0.1)
    with pytest.raises(ValueError):
        expected_abs_increment(P, 0.0)


@pytest.mark.parametrize("delta", [1e-6, 1e-5, 1e-4, 1e-3])
@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
def test_abs_increment_sandwich(delta, a):
    p = GammaGhParams(a, 1.0, 0.0, 0.5)
    c = theory_constants()
    k = p.sigma * math.sqrt(2 / (math.pi * p.beta))
    val = expected_abs_increment(p, delta)
    assert k * c.E1 * a * delta <= val <= k * c.E2 * a * delta
    lo, hi = abs_increment_bounds(p, delta, delta, delta)
    assert lo <= val <= hi


def test_variation_moment_theory_examples():
    th = variation_moment_theory(P, uniform_partition(1.0, 4096))
    assert th.lower == pytest.approx(0.404752662328, rel=1e-10)
    assert th.upper == pytest.approx(2.471222349062, rel=1e-10)
    assert th.var_limit == 0.25
    assert th.mean == pytest.approx(0.5 * math.sqrt(2), rel=1e-3)
    assert th.mean < 0.5 * math.sqrt(2)


@pytest.mark.parametrize("cells", [100, 1000, 10_000, 100_000])
def test_exact_mean_inside_sandwich(cells):
    th = variation_moment_theory(P, uniform_partition(1.0, cells))
    assert th.lower <= th.mean <= th.upper


def test_variation_variance_tends_to_limit():
    vs = [variation_moment_theory(P, uniform_partition(1.0, n)).var for n in (16, 256, 4096, 65536)]
    gaps = np.abs(np.array(vs) - 0.25)
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 1e-3


def test_qv_moment_theory_example():
    th = qv_moment_theory(P, uniform_partition(1.0, 4096))
    assert th.mean == 0.25
    assert th.var_limit == pytest.approx(0.1875, rel=1e-15)
    assert th.var == pytest.approx(2 * 0.0625 * 2**-12 + 0.1875, rel=1e-14)


def test_qv_variance_decreases_toward_limit():
    vs = [qv_moment_theory(P, uniform_partition(1.0, n)).var for n in (1, 4, 64, 1024)]
    assert all(x > y for x, y in zip(vs, vs[1:]))
    assert all(v >= 0.1875 for v in vs)


def test_brownian_qv_theory():
    th = brownian_qv_moment_theory(uniform_partition(1.0, 256))
    assert th.mean == 1.0
    assert th.var == pytest.approx(2 / 256, rel=1e-14)
    assert th.var_limit == 0.0
