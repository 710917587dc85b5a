import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kagome_vqe.ansatz import HEA, AnsatzSpec, bind_and_prepare, build_hea, parameter_shift_gradient
from kagome_vqe.exact import dense_ground_energy
from kagome_vqe.lattice import random_graph
from kagome_vqe.optim import (
    CSV_HEADER,
    BudgetExhausted,
    Objective,
    OptimizerTrace,
    SpsaSchedule,
    bfgs_minimize,
    calibrate_spsa,
    cobyla_minimize,
    finite_difference_gradient,
    spsa_gradient,
    spsa_minimize,
)
from kagome_vqe.pauli import heisenberg_hamiltonian
from kagome_vqe.statevector import expectation


def quadratic(v):
    v = np.asarray(v, dtype=float)
    return Objective(lambda t: float(np.sum((t - v) ** 2)), v.size, gradient=lambda t: 2 * (t - v), grad_cost=2 * v.size)


def vqe_objective(circuit, h):
    return Objective(
        lambda t: expectation(bind_and_prepare(circuit, t), h),
        circuit.num_params,
        gradient=lambda t: parameter_shift_gradient(circuit, h, t),
        grad_cost=2 * circuit.num_params,
    )


# -- objective ---------------------------------------------------------------


def test_objective_counts():
    obj = quadratic([1.0, 2.0])
    obj([0, 0])
    obj([0, 0])
    obj.gradient([0, 0])
    assert (obj.evals, obj.grad_evals, obj.total_evals) == (2, 1, 6)


def test_objective_budget():
    obj = Objective(lambda t: 0.0, 1, max_evals=2)
    obj([0])
    obj([0])
    with pytest.raises(BudgetExhausted):
        obj([0])
    assert obj.evals == 2


def test_objective_dimension_check():
    with pytest.raises(ValueError):
        quadratic([0.0, 0.0])([1.0])


def test_fd_examples():
    sq = Objective(lambda t: float(t[0] ** 2), 1)
    assert abs(finite_difference_gradient(sq, [3.0])[0] - 6) < 1e-6
    assert sq.evals == 2
    const = Objective(lambda t: 4.2, 3)
    np.testing.assert_array_equal(finite_difference_gradient(const, [1.0, -2.0, 0.5]), np.zeros(3))


def test_fd_matches_shift(dimer_h, rng):
    c = build_hea(AnsatzSpec(HEA, 2, 1, ("RY", "RZ"), "CZ", "linear"))
    obj = vqe_objective(c, dimer_h)
    theta = rng.uniform(-np.pi, np.pi, c.num_params)
    assert np.max(np.abs(finite_difference_gradient(obj, theta) - obj.gradient(theta))) < 1e-6


# -- SPSA --------------------------------------------------------------------


def test_schedule_invariants():
    s = SpsaSchedule(a=0.3, c=0.1, A=10)
    a = [s.a_t(t) for t in range(500)]
    assert all(s.c_t(t) > 0 for t in range(500))
    assert all(x > y for x, y in zip(a, a[1:]))
    with pytest.raises(ValueError):
        SpsaSchedule(a=0)
    with pytest.raises(ValueError):
        SpsaSchedule(a=1, c=-1)


def test_spsa_quadratic_bowl():
    obj = quadratic([0.0])
    schedule = calibrate_spsa(obj, np.array([1.0]), max_iter=200, rng_seed=1)
    trace = spsa_minimize(obj, [1.0], schedule, max_iter=200, rng_seed=1, track_every=0)
    assert abs(trace.best_theta[0]) < 0.05


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), c_t=st.floats(1e-3, 2.0))
def test_spsa_estimator_linear_1d(seed, c_t):
    rng = np.random.default_rng(seed)
    b = rng.normal()
    obj = Objective(lambda t: float(b * t[0]), 1)
    delta = rng.choice([-1.0, 1.0], size=1)
    assert abs(spsa_gradient(obj, rng.normal(size=1), c_t, delta)[0] - b) < 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), dim=st.integers(2, 6), c_t=st.floats(1e-3, 2.0))
def test_spsa_estimator_linear(seed, dim, c_t):
    """In several dimensions the estimate is (b.delta) delta; it averages to b over all sign patterns."""
    rng = np.random.default_rng(seed)
    b = rng.normal(size=dim)
    obj = Objective(lambda t: float(b @ t), dim)
    theta = rng.normal(size=dim)
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * dim)).reshape(dim, -1).T
    estimates = [spsa_gradient(obj, theta, c_t, d) for d in signs]
    for d, g in zip(signs, estimates):
        np.testing.assert_allclose(g, (b @ d) * d, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(np.mean(estimates, axis=0), b, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), dim=st.integers(1, 6), c_t=st.floats(1e-2, 1.0))
def test_spsa_estimator_polynomial(seed, dim, c_t):
    """For a cubic, the symmetric difference along delta is exact in closed form."""
    rng = np.random.default_rng(seed)
    b = rng.normal(size=dim)
    Q = rng.normal(size=(dim, dim))
    Q = Q + Q.T
    w = rng.normal(size=dim)

    def L(t):
        return float(b @ t + 0.5 * t @ Q @ t + (w @ t) ** 3)

    theta = rng.normal(size=dim)
    delta = rng.choice([-1.0, 1.0], size=dim)
    # directional derivative plus the odd cubic remainder; the quadratic part cancels
    u = w @ theta
    s = w @ delta
    directional = b @ delta + theta @ Q @ delta + 3 * u**2 * s
    expected_diff = 2 * c_t * directional + 2 * (c_t * s) ** 3
    expected = expected_diff / (2 * c_t * delta)
    np.testing.assert_allclose(spsa_gradient(Objective(L, dim), theta, c_t, delta), expected, rtol=1e-8, atol=1e-8)


@pytest.mark.parametrize("T", [1, 7, 50])
def test_spsa_eval_count(T):
    obj = quadratic(np.ones(4))
    spsa_minimize(obj, np.zeros(4), SpsaSchedule(a=0.1), max_iter=T, rng_seed=0, track_every=0)
    assert obj.evals == 2 * T


def test_spsa_tracking_evals():
    obj = quadratic(np.ones(3))
    trace = spsa_minimize(obj, np.zeros(3), SpsaSchedule(a=0.1), max_iter=10, rng_seed=0, track_every=5)
    assert list(trace.iterations) == [0, 5, 10]
    assert obj.evals == 2 * 10 + 3


def test_spsa_budget_is_reported():
    obj = quadratic(np.ones(3))
    obj.max_evals = 11
    trace = spsa_minimize(obj, np.zeros(3), SpsaSchedule(a=0.1), max_iter=100, rng_seed=0)
    assert trace.status == "max_iter" and "budget" in trace.message
    assert obj.total_evals <= 11


def test_spsa_deterministic():
    def run():
        obj = quadratic(np.arange(5.0))
        return spsa_minimize(obj, np.zeros(5), SpsaSchedule(a=0.2, A=5), max_iter=40, rng_seed=9, track_every=3)

    a, b = run(), run()
    assert a.to_csv(include_wall_time=False) == b.to_csv(include_wall_time=False)
    np.testing.assert_array_equal(a.best_theta, b.best_theta)


# -- BFGS --------------------------------------------------------------------


def test_bfgs_quadratic_oracle():
    v = np.random.default_rng(5).normal(size=6)
    obj = quadratic(v)
    trace = bfgs_minimize(obj, np.zeros(6), grad_tol=1e-10)
    assert np.max(np.abs(trace.best_theta - v)) < 1e-8
    assert trace.iterations[-1] <= 3 * 6
    assert trace.status == "converged"


def test_bfgs_already_optimal():
    trace = bfgs_minimize(quadratic([0.0]), [0.0])
    assert trace.status == "converged"
    assert list(trace.iterations) == [0]


def test_bfgs_inverse_hessian_spd():
    rng = np.random.default_rng(2)
    M = rng.normal(size=(5, 5))
    A = M @ M.T + 0.5 * np.eye(5)
    obj = Objective(lambda t: float(0.5 * t @ A @ t), 5, gradient=lambda t: A @ t, grad_cost=10)
    seen = []

    def check(k, x, H):
        np.testing.assert_allclose(H, H.T, atol=1e-12)
        seen.append(np.linalg.eigvalsh(H).min())

    bfgs_minimize(obj, rng.normal(size=5), grad_tol=1e-10, callback=check)
    assert seen and min(seen) > 0


def test_bfgs_rosenbrock():
    def f(t):
        return float(100 * (t[1] - t[0] ** 2) ** 2 + (1 - t[0]) ** 2)

    def g(t):
        return np.array([-400 * t[0] * (t[1] - t[0] ** 2) - 2 * (1 - t[0]), 200 * (t[1] - t[0] ** 2)])

    trace = bfgs_minimize(Objective(f, 2, g, 4), [-1.2, 1.0], grad_tol=1e-8, max_iter=500)
    np.testing.assert_allclose(trace.best_theta, [1, 1], atol=1e-6)


def test_bfgs_requires_gradient():
    with pytest.raises(ValueError):
        bfgs_minimize(Objective(lambda t: 0.0, 1), [0.0])


# -- COBYLA ------------------------------------------------------------------


def test_cobyla_quadratic():
    obj = quadratic([0.0, 0.0])
    trace = cobyla_minimize(obj, [1.0, 1.0], rho_beg=0.5, rho_end=1e-6)
    assert trace.best_energy < 1e-8


def test_cobyla_1d():
    trace = cobyla_minimize(quadratic([2.0]), [0.0])
    assert abs(trace.best_theta[0] - 2) < 1e-4


def test_cobyla_simplex_volume():
    vols = []
    cobyla_minimize(
        quadratic([0.3, -0.7, 1.1]),
        [1.0, 1.0, 1.0],
        callback=lambda it, x0, sim: vols.append(abs(np.linalg.det(sim))),
    )
    assert vols and min(vols) > 0


def test_cobyla_rejects_radii():
    with pytest.raises(ValueError):
        cobyla_minimize(quadratic([0.0]), [0.0], rho_beg=1e-7, rho_end=1e-6)


def test_cobyla_budget():
    obj = quadratic(np.ones(4))
    obj.max_evals = 20
    trace = cobyla_minimize(obj, np.zeros(4))
    assert trace.status == "max_iter"
    assert obj.evals == 20


# -- traces ------------------------------------------------------------------


def test_trace_bookkeeping():
    tr = OptimizerTrace("x")
    for it, e in enumerate([3.0, 1.0, 2.0, 1.0, 0.5]):
        tr.record(it, e, np.full(2, it), it, 0.0)
    assert tr.best_energy == 0.5
    assert np.all(np.diff(tr.best_so_far) <= 0)
    with pytest.raises(ValueError):
        tr.record(4, 0.0, np.zeros(2), 9, 0.0)


def test_trace_tie_keeps_earliest():
    tr = OptimizerTrace("x")
    tr.record(0, 1.0, np.array([0.0]), 1, 0.0)
    tr.record(1, 1.0, np.array([9.0]), 2, 0.0)
    assert tr.best_theta[0] == 0.0


def test_trace_csv():
    tr = OptimizerTrace("x")
    tr.record(0, -0.5, np.array([3.0, 4.0]), 1, 0.25, grad_norm=None)
    lines = tr.to_csv().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1].split(",")[:3] == ["0", "-0.5", "5.0"]


# -- shared properties -------------------------------------------------------


def run_optimizer(name, obj, theta0, seed):
    if name == "spsa":
        sched = calibrate_spsa(obj, theta0, 300, seed)
        return spsa_minimize(obj, theta0, sched, 300, seed)
    if name == "bfgs":
        return bfgs_minimize(obj, theta0, grad_tol=1e-8)
    return cobyla_minimize(obj, theta0)


@pytest.mark.parametrize("name", ["spsa", "bfgs", "cobyla"])
def test_variational_bound(name):
    rng = np.random.default_rng(17)
    g = random_graph(4, rng)
    h = heisenberg_hamiltonian(g, 1.0)
    e0 = dense_ground_energy(h).energy
    c = build_hea(AnsatzSpec(HEA, 4, 2, ("RY",), "CNOT", "linear"))
    trace = run_optimizer(name, vqe_objective(c, h), rng.uniform(-np.pi, np.pi, c.num_params), 3)
    assert np.all(trace.energies >= e0 - 1e-9)
    assert np.all(np.diff(trace.best_so_far) <= 0)


@pytest.mark.parametrize("name", ["spsa", "bfgs", "cobyla"])
def test_singlet_restarts(name, dimer_h):
    c = build_hea(AnsatzSpec(HEA, 2, 1, ("RY", "RZ"), "CZ", "linear"))
    hits = 0
    for seed in range(10):
        theta0 = np.random.default_rng(seed).uniform(-np.pi, np.pi, c.num_params)
        trace = run_optimizer(name, vqe_objective(c, dimer_h), theta0, seed)
        hits += abs(trace.best_energy + 0.75) < 1e-3
    assert hits >= 8, hits


@pytest.mark.parametrize("name", ["spsa", "bfgs", "cobyla"])
def test_determinism(name, triangle_h):
    c = build_hea(AnsatzSpec(HEA, 3, 1, ("RY",), "CNOT", "linear"))
    theta0 = np.random.default_rng(4).uniform(-np.pi, np.pi, c.num_params)
    a = run_optimizer(name, vqe_objective(c, triangle_h), theta0, 4)
    b = run_optimizer(name, vqe_objective(c, triangle_h), theta0, 4)
    assert a.to_csv(include_wall_time=False) == b.to_csv(include_wall_time=False)
    assert a.best_theta.tobytes() == b.best_theta.tobytes()
