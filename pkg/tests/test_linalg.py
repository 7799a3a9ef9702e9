import random

import pytest
from flint import acb, acb_mat, arb

from weilmaass.bigarith import make_context, to_float
from weilmaass.linalg import (SingularSystemError, hager_inf_norm, inv_norm_estimate,
                              inverse_inf_norm_exact, lu_factor, lu_solve, mat_vec,
                              matrix_inf_norm)


def _random_matrix(n, rng, scale_cols=False):
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            s = 10.0 ** (3 * (j % 5)) if scale_cols else 1.0
            row.append(acb(repr(rng.gauss(0, 1) * s), repr(rng.gauss(0, 1) * s)))
        rows.append(row)
    return rows


@pytest.mark.parametrize("n", [1, 5, 40, 90])
def test_lu_solve_residual(n):
    ctx = make_context(30)
    rng = random.Random(n)
    with ctx:
        A = _random_matrix(n, rng, scale_cols=n > 10)
        b = [acb(repr(rng.gauss(0, 1))) for _ in range(n)]
        x, lu = lu_solve(A, b, ctx)
        r = [ax - bb for ax, bb in zip(mat_vec(A, x), b)]
        res = max(to_float(abs(z)) for z in r)
    assert res <= 1e-20 * matrix_inf_norm(A) * max(to_float(abs(z)) for z in x)


def test_adjoint_solve():
    ctx = make_context(30)
    rng = random.Random(5)
    with ctx:
        A = _random_matrix(30, rng)
        lu = lu_factor(A, ctx)
        b = [acb(repr(rng.gauss(0, 1)), "0.5") for _ in range(30)]
        y = lu.solve_adjoint(b)
        AH = acb_mat(A).conjugate().transpose()
        r = (AH * acb_mat([[v] for v in y])).entries()
        assert max(to_float(abs(u - v)) for u, v in zip(r, b)) < 1e-20


def test_singular_matrix_reports_column():
    ctx = make_context(25)
    with ctx:
        A = [[acb(1), acb(2), acb(3)], [acb(2), acb(4), acb(6)], [acb(1), acb(0), acb(1)]]
        with pytest.raises(SingularSystemError) as exc:
            lu_factor(A, ctx)
    assert exc.value.column is not None


def test_hager_matches_exact_norm():
    ctx = make_context(25)
    rng = random.Random(2)
    with ctx:
        A = _random_matrix(60, rng)
        lu = lu_factor(A, ctx)
        exact = inverse_inf_norm_exact(lu)
        est = hager_inf_norm(lu)
    assert est <= exact * (1 + 1e-10)
    assert est >= exact / 10
    assert inv_norm_estimate(lu) == pytest.approx(exact, rel=1e-12)
    assert inv_norm_estimate(lu, force_hager=True) >= est


def test_exact_inverse_norm_of_diagonal():
    ctx = make_context(25)
    with ctx:
        A = [[acb(2 if i == j else 0) for j in range(4)] for i in range(4)]
        A[3][3] = acb("0.001")
        lu = lu_factor(A, ctx)
    assert inverse_inf_norm_exact(lu) == pytest.approx(1000.0)
