import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp
from numpy.testing import assert_array_equal

from mdscat.classify import (ConvergenceWarning, KernelSpec, TrainedModel, evaluate, load_model,
                             predict_from_scores, save_model, smo, svm_predict, svm_train)
from mdscat.datasets import standardize_fit
from mdscat.errors import ConfigError, DataError


def dual_objective(alpha, K, y):
    ay = alpha * y
    return 0.5 * ay @ K @ ay - alpha.sum()


def brute_force_dual(K, y, C):
    """Exact minimum of the dual by enumerating which bound each alpha sits on.

    Each of the 3^n assignments (0, C or free) fixes a linear KKT system for
    the free variables and the bias; feasible solutions are candidates and the
    optimum is always among them.
    """
    n = len(y)
    Q = np.outer(y, y) * K
    best = np.inf
    for states in itertools.product((0, 1, 2), repeat=n):
        states = np.array(states)
        free = states == 2
        alpha = np.where(states == 1, C, 0.0)
        if free.any():
            f = np.flatnonzero(free)
            fixed = ~free
            m = len(f)
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = Q[np.ix_(f, f)]
            A[:m, m] = y[f]
            A[m, :m] = y[f]
            rhs = np.concatenate([1.0 - Q[np.ix_(f, np.flatnonzero(fixed))] @ alpha[fixed],
                                  [-(y[fixed] @ alpha[fixed])]])
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.abs(A @ sol - rhs).max() > 1e-9:
                continue
            alpha[f] = sol[:m]
            if alpha[f].min() < -1e-12 or alpha[f].max() > C + 1e-12:
                continue
        elif abs(y @ alpha) > 1e-12:
            continue
        best = min(best, dual_objective(np.clip(alpha, 0, C), K, y))
    return best


def random_problem(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    x = rng.standard_normal((n, 2))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    y[0], y[1] = 1.0, -1.0
    kernel = KernelSpec("rbf", float(rng.uniform(0.2, 2.0))) if seed % 2 else KernelSpec("linear")
    C = float(rng.choice([0.1, 1.0, 10.0]))
    return kernel(x, x), y, C


@pytest.mark.parametrize("seed", range(50))
def test_dual_objective_matches_enumeration(seed):
    K, y, C = random_problem(seed)
    sol = smo(K, y, C, tol=1e-6)
    assert sol.converged
    assert abs(sol.objective(K, y) - brute_force_dual(K, y, C)) < 1e-4


def test_six_point_problem_tight():
    K, y, C = random_problem(7)
    K, y = K[:6], y[:6]
    K = K[:, :6]
    sol = smo(K, y, C, tol=1e-9)
    assert abs(sol.objective(K, y) - brute_force_dual(K, y, C)) < 1e-6


@given(st.integers(0, 10_000))
def test_solution_is_feasible_and_kkt(seed):
    K, y, C = random_problem(seed)
    tol = 1e-3
    sol = smo(K, y, C, tol=tol)
    a = sol.alpha
    assert a.min() >= 0 and a.max() <= C + 1e-9
    assert abs(a @ y) < 1e-9 * max(1.0, C * len(y))
    grad = (np.outer(y, y) * K) @ a - 1
    yg = -y * grad
    up = np.where(y > 0, a < C, a > 0)
    low = np.where(y > 0, a > 0, a < C)
    assert yg[up].max() - yg[low].min() < tol


def test_sklearn_agrees_on_objective():
    svm = pytest.importorskip("sklearn.svm")
    rng = np.random.default_rng(5)
    x = rng.standard_normal((60, 4))
    y = np.where(x[:, 0] + 0.5 * x[:, 1] ** 2 + 0.3 * rng.standard_normal(60) > 0.3, 1.0, -1.0)
    for kernel in (KernelSpec("linear"), KernelSpec("rbf", 0.5)):
        K = kernel(x, x)
        ours = smo(K, y, 2.0, tol=1e-8)
        ref = svm.SVC(C=2.0, kernel="precomputed", tol=1e-8).fit(K, y)
        alpha = np.zeros(60)
        alpha[ref.support_] = np.abs(ref.dual_coef_[0])
        a, b = ours.objective(K, y), dual_objective(alpha, K, y)
        assert abs(a - b) <= 1e-6 * abs(b)


# ---------------------------------------------------------------- training

def test_separable_blobs_linear():
    rng = np.random.default_rng(0)
    sigma = 0.5
    x = np.vstack([rng.standard_normal((40, 2)) * sigma + [-4 * sigma, 0],
                   rng.standard_normal((40, 2)) * sigma + [4 * sigma, 0]])
    labels = np.repeat([0, 1], 40)
    # premise: a clear gap along the first axis, so the data are separable
    assert x[labels == 1, 0].min() - x[labels == 0, 0].max() > 2 * sigma
    model = svm_train(x, labels, KernelSpec("linear"), C=10.0)
    assert_array_equal(svm_predict(model, x), labels)


def test_xor_decision_values_by_hand():
    x = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    labels = np.array([1, 1, 0, 0])
    model = svm_train(x, labels, KernelSpec("rbf", 1.0), C=10.0, tol=1e-10)
    assert_array_equal(model.predict(x), labels)
    # by symmetry every alpha equals a with y_i f(x_i) = 1:
    # a * (1 + e^-2 - 2 e^-1) = 1, bias 0
    a = 1.0 / (1.0 - np.exp(-1.0)) ** 2
    assert a < 10.0
    y = np.where(labels == 1, 1.0, -1.0)
    K = np.exp(-((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
    by_hand = K @ (a * y)
    scores = model.decision_function(x)
    np.testing.assert_allclose(scores[:, 1], by_hand, atol=1e-8)
    np.testing.assert_allclose(scores[:, 1], y, atol=1e-8)
    np.testing.assert_allclose(scores[:, 0], -scores[:, 1], atol=0)


def test_three_class_blobs():
    rng = np.random.default_rng(1)
    centres = np.array([[0, 4], [4, 0], [-4, -4]])
    x = np.vstack([rng.standard_normal((30, 2)) + c for c in centres])
    labels = np.repeat([2, 5, 9], 30)
    for kernel in (KernelSpec("linear"), KernelSpec("rbf")):
        model = svm_train(x, labels, kernel, C=5.0)
        assert_array_equal(model.classes, [2, 5, 9])
        assert_array_equal(model.predict(x), labels)


def test_default_gamma():
    x = np.random.default_rng(2).standard_normal((50, 8)) * 3
    k = KernelSpec("rbf").resolved(x)
    assert abs(k.gamma - 1.0 / (8 * x.var())) < 1e-15


def test_training_is_deterministic(rng):
    x = rng.standard_normal((60, 5))
    labels = rng.integers(0, 3, 60)
    a = svm_train(x, labels, KernelSpec("rbf"), C=3.0)
    b = svm_train(x.copy(), labels.copy(), KernelSpec("rbf"), C=3.0)
    for f in ("support_index", "support_vectors", "coef", "rho"):
        assert_array_equal(getattr(a, f), getattr(b, f))


@pytest.mark.parametrize("bad,err", [
    (dict(features=np.array([[0.0], [np.nan]]), labels=[0, 1]), DataError),
    (dict(features=np.zeros((3, 2)), labels=[1, 1, 1]), DataError),
    (dict(features=np.zeros((3, 2)), labels=[0, 1]), DataError),
    (dict(features=np.zeros((2, 2)), labels=[0, 1], C=0.0), ConfigError),
])
def test_training_errors(bad, err):
    with pytest.raises(err):
        svm_train(**bad)


def test_kernel_validation():
    with pytest.raises(ConfigError):
        KernelSpec("poly")
    with pytest.raises(ConfigError):
        KernelSpec("rbf", -1.0)
    with pytest.raises(ConfigError):
        KernelSpec("rbf", float("inf"))


def test_iteration_cap_warns():
    K, y, C = random_problem(3)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sol = smo(K, y, C, max_iter=1)
    assert not sol.converged
    assert any(issubclass(w.category, ConvergenceWarning) for w in caught)


# ---------------------------------------------------------------- prediction

def test_tie_goes_to_lowest_class():
    scores = np.array([[0.1, 0.7, 0.7, -1.0]])
    assert predict_from_scores(scores, np.array([1, 2, 5, 7]))[0] == 2
    # column order must not matter
    assert predict_from_scores(scores[:, [2, 1, 0, 3]], np.array([5, 2, 1, 7]))[0] == 2


def test_model_level_tie():
    model = TrainedModel(np.array([2, 5]), KernelSpec("linear"), 1.0, np.zeros((1, 2)), np.array([0]),
                         np.zeros((2, 1)), np.zeros(2))
    assert model.predict(np.array([[3.0, -1.0]]))[0] == 2


@given(hnp.arrays(np.float64, (7, 4), elements=st.floats(-1e6, 1e6)), st.floats(1e-3, 1e3))
def test_argmax_is_scale_invariant(scores, c):
    classes = np.array([0, 3, 4, 8])
    assert_array_equal(predict_from_scores(scores * c, classes), predict_from_scores(scores, classes))


def test_model_round_trip(tmp_path, rng):
    x = rng.standard_normal((40, 3))
    labels = rng.integers(0, 3, 40)
    model = svm_train(x, labels, KernelSpec("rbf"), C=2.0)
    stats = standardize_fit(x)
    path = save_model(tmp_path / "m.npz", model, stats)
    back, st_back = load_model(path)
    q = rng.standard_normal((25, 3))
    assert_array_equal(back.decision_function(q), model.decision_function(q))
    assert_array_equal(back.predict(q), model.predict(q))
    assert_array_equal(st_back.mean, stats.mean)
    assert back.kernel == model.kernel


def test_model_wrong_width(rng):
    model = svm_train(rng.standard_normal((10, 3)), np.repeat([0, 1], 5))
    with pytest.raises(DataError, match="width"):
        model.predict(np.zeros((2, 4)))


# ---------------------------------------------------------------- metrics

def test_metrics():
    labels = np.array([0, 1, 2, 0, 1, 2, 0, 1, 2, 0])
    assert evaluate(labels, labels).error_pct == 0.0
    wrong = labels.copy()
    wrong[:5] = (wrong[:5] + 1) % 3
    m = evaluate(wrong, labels)
    assert m.error_pct == 50.0
    assert_array_equal(m.confusion.sum(1), np.bincount(labels))
    assert m.confusion.trace() == 5


def test_metrics_reject_mismatch():
    with pytest.raises(DataError):
        evaluate(np.array([0, 1]), np.array([0]))
