"""Dense complex LU factorization at multiprecision.

The factorization is recursive in the columns (split in half, factor the
left panel, update the right one).  Small panels are done element by element
in Python; all large updates go through flint's acb_mat product, which is
where the time is spent.  Matrices are handled as lists of rows of ``acb``
midpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from flint import acb, acb_mat, arb

from .bigarith import PrecisionContext, PrecisionError

LEAF = 16
STRIP = 64
EXACT_NORM_MAX = 200
HAGER_SAFETY = 3


class SingularSystemError(PrecisionError):
    """Pivot below the singularity threshold."""

    def __init__(self, msg, column=None):
        super().__init__(msg)
        self.column = column


def _mag2(z) -> float:
    re = float(z.real.mid())
    im = float(z.imag.mid())
    return re * re + im * im


def _to_rows(A) -> list[list[acb]]:
    if isinstance(A, acb_mat):
        return [[z for z in row] for row in A.mid().tolist()]
    return [[acb(z).mid() for z in row] for row in A]


def _sub_block(a, r0, r1, c0, c1) -> acb_mat:
    return acb_mat([row[c0:c1] for row in a[r0:r1]])


def _write_block(a, r0, c0, M: acb_mat) -> None:
    rows = M.mid().tolist()
    width = len(rows[0]) if rows else 0
    for i, vals in enumerate(rows):
        a[r0 + i][c0:c0 + width] = vals


def _unit_lower_inverse(a, r0, r1) -> acb_mat:
    """Inverse of the unit lower triangular block a[r0:r1, r0:r1]."""
    b = r1 - r0
    inv = [[acb(0)] * b for _ in range(b)]
    for j in range(b):
        inv[j][j] = acb(1)
        for i in range(j + 1, b):
            row = a[r0 + i]
            s = acb(0)
            for t in range(j, i):
                s += row[r0 + t] * inv[t][j]
            inv[i][j] = (-s).mid()
    return acb_mat(inv)


@dataclass
class LUFactorization:
    """P·(A·diag(scale)) = L·U, stored as block strips for fast solves."""

    n: int
    perm: list
    scale: list
    pivot_growth: float
    norm_inf: arb
    bits: int
    l_diag: list = field(repr=False)
    l_strips: list = field(repr=False)
    u_diag: list = field(repr=False)
    u_strips: list = field(repr=False)
    blocks: list = field(repr=False)

    def solve(self, b) -> list[acb]:
        """x with A x = b."""
        n = self.n
        y = [acb(b[p]).mid() for p in self.perm]
        y = self._forward_l(y)
        y = self._backward_u(y)
        return [(y[j] * self.scale[j]).mid() for j in range(n)]

    def solve_adjoint(self, b) -> list[acb]:
        """x with A^H x = b."""
        y = [(acb(b[j]) * self.scale[j]).mid() for j in range(self.n)]
        y = self._forward_uh(y)
        y = self._backward_lh(y)
        x = [acb(0)] * self.n
        for i, p in enumerate(self.perm):
            x[p] = y[i]
        return x

    # the four triangular sweeps, block by block
    def _forward_l(self, y):
        for bi, (s0, s1) in enumerate(self.blocks):
            blk = self.l_diag[bi]
            for i in range(s0, s1):
                s = y[i]
                row = blk[i - s0]
                for t in range(s0, i):
                    s -= row[t - s0] * y[t]
                y[i] = s.mid()
            if s1 < self.n:
                upd = self.l_strips[bi] * acb_mat([[v] for v in y[s0:s1]])
                for i, v in enumerate(upd.mid().entries()):
                    y[s1 + i] = (y[s1 + i] - v).mid()
        return y

    def _backward_u(self, y):
        for bi in range(len(self.blocks) - 1, -1, -1):
            s0, s1 = self.blocks[bi]
            if s1 < self.n:
                upd = self.u_strips[bi] * acb_mat([[v] for v in y[s1:]])
                for i, v in enumerate(upd.mid().entries()):
                    y[s0 + i] = (y[s0 + i] - v).mid()
            blk = self.u_diag[bi]
            for i in range(s1 - 1, s0 - 1, -1):
                row = blk[i - s0]
                s = y[i]
                for t in range(i + 1, s1):
                    s -= row[t - s0] * y[t]
                y[i] = (s / row[i - s0]).mid()
        return y

    def _forward_uh(self, y):
        # U^H is lower triangular; its column strip below block bi is U_strip^H
        for bi, (s0, s1) in enumerate(self.blocks):
            blk = self.u_diag[bi]
            for i in range(s0, s1):
                s = y[i]
                for t in range(s0, i):
                    s -= blk[t - s0][i - s0].conjugate() * y[t]
                y[i] = (s / blk[i - s0][i - s0].conjugate()).mid()
            if s1 < self.n:
                strip = self.u_strips[bi].conjugate().transpose()
                upd = strip * acb_mat([[v] for v in y[s0:s1]])
                for i, v in enumerate(upd.mid().entries()):
                    y[s1 + i] = (y[s1 + i] - v).mid()
        return y

    def _backward_lh(self, y):
        for bi in range(len(self.blocks) - 1, -1, -1):
            s0, s1 = self.blocks[bi]
            if s1 < self.n:
                strip = self.l_strips[bi].conjugate().transpose()
                upd = strip * acb_mat([[v] for v in y[s1:]])
                for i, v in enumerate(upd.mid().entries()):
                    y[s0 + i] = (y[s0 + i] - v).mid()
            blk = self.l_diag[bi]
            for i in range(s1 - 1, s0 - 1, -1):
                s = y[i]
                for t in range(i + 1, s1):
                    s -= blk[t - s0][i - s0].conjugate() * y[t]
                y[i] = s.mid()
        return y


def lu_factor(A, ctx: PrecisionContext) -> LUFactorization:
    """Partial-pivoting LU of a square complex matrix.

    Columns are first scaled by powers of two so that their largest entry
    has modulus in [1/2, 1); the scaling is exact and undone in the solves.
    Pivots are chosen by largest modulus, ties going to the smallest row.
    Raises SingularSystemError when a pivot falls below
    2^(-bits/2) times the infinity norm of the scaled matrix.
    """
    with ctx:
        a = _to_rows(A)
        n = len(a)
        if any(len(row) != n for row in a):
            raise ValueError("matrix must be square")
        if n == 0:
            raise ValueError("empty matrix")
        scale = []
        for j in range(n):
            m = max(_mag2(a[i][j]) for i in range(n))
            if m == 0.0:
                raise SingularSystemError(f"column {j} is zero", column=j)
            e = -math.frexp(math.sqrt(m))[1]
            scale.append(arb(2) ** e)
        for row in a:
            for j in range(n):
                row[j] = (row[j] * scale[j]).mid()
        norm = max(sum(math.sqrt(_mag2(z)) for z in row) for row in a)
        amax = max(math.sqrt(_mag2(z)) for row in a for z in row)
        tol2 = (2.0 ** (-ctx.bits / 2) * norm) ** 2
        perm = list(range(n))
        _lu_rec(a, perm, 0, n, n, tol2)
        umax = max(math.sqrt(_mag2(a[i][j])) for i in range(n) for j in range(i, n))

        blocks = [(s, min(s + STRIP, n)) for s in range(0, n, STRIP)]
        l_diag, u_diag, l_strips, u_strips = [], [], [], []
        for s0, s1 in blocks:
            l_diag.append([row[s0:s1] for row in a[s0:s1]])
            u_diag.append([row[s0:s1] for row in a[s0:s1]])
            if s1 < n:
                l_strips.append(_sub_block(a, s1, n, s0, s1))
                u_strips.append(_sub_block(a, s0, s1, s1, n))
            else:
                l_strips.append(None)
                u_strips.append(None)
        return LUFactorization(
            n=n, perm=perm, scale=scale, pivot_growth=umax / amax,
            norm_inf=arb(norm), bits=ctx.bits,
            l_diag=l_diag, l_strips=l_strips, u_diag=u_diag, u_strips=u_strips,
            blocks=blocks)


def _lu_rec(a, perm, c0, c1, n, tol2):
    if c1 - c0 <= LEAF:
        _lu_leaf(a, perm, c0, c1, n, tol2)
        return
    mid = (c0 + c1) // 2
    _lu_rec(a, perm, c0, mid, n, tol2)
    _trsm_lower(a, c0, mid, mid, c1)
    if mid < n:
        L21 = _sub_block(a, mid, n, c0, mid)
        U12 = _sub_block(a, c0, mid, mid, c1)
        A22 = _sub_block(a, mid, n, mid, c1)
        _write_block(a, mid, mid, A22 - L21 * U12)
    _lu_rec(a, perm, mid, c1, n, tol2)


def _lu_leaf(a, perm, c0, c1, n, tol2):
    for j in range(c0, c1):
        p, best = j, -1.0
        for i in range(j, n):
            m = _mag2(a[i][j])
            if m > best:
                p, best = i, m
        if best < tol2:
            raise SingularSystemError(
                f"singular system: pivot {math.sqrt(best):.3e} in column {j} "
                f"below threshold {math.sqrt(tol2):.3e}", column=j)
        if p != j:
            a[j], a[p] = a[p], a[j]
            perm[j], perm[p] = perm[p], perm[j]
        rj = a[j]
        inv = (1 / rj[j]).mid()
        for i in range(j + 1, n):
            ri = a[i]
            l = (ri[j] * inv).mid()
            ri[j] = l
            for t in range(j + 1, c1):
                ri[t] = (ri[t] - l * rj[t]).mid()


def _trsm_lower(a, r0, r1, c0, c1):
    """a[r0:r1, c0:c1] <- L^{-1} a[r0:r1, c0:c1], L unit lower in a[r0:r1, r0:r1]."""
    if c0 >= c1:
        return
    if r1 - r0 <= LEAF:
        Linv = _unit_lower_inverse(a, r0, r1)
        _write_block(a, r0, c0, Linv * _sub_block(a, r0, r1, c0, c1))
        return
    mid = (r0 + r1) // 2
    _trsm_lower(a, r0, mid, c0, c1)
    L21 = _sub_block(a, mid, r1, r0, mid)
    X1 = _sub_block(a, r0, mid, c0, c1)
    B2 = _sub_block(a, mid, r1, c0, c1)
    _write_block(a, mid, c0, B2 - L21 * X1)
    _trsm_lower(a, mid, r1, c0, c1)


# ---------------------------------------------------------------------------
# norms


def matrix_inf_norm(A) -> float:
    return max(sum(math.sqrt(_mag2(z)) for z in row) for row in _to_rows(A))


def inverse_inf_norm_exact(lu: LUFactorization) -> float:
    """||A^{-1}||_inf from the explicit inverse (columns solved one by one)."""
    n = lu.n
    rowsum = [0.0] * n
    for j in range(n):
        e = [acb(0)] * n
        e[j] = acb(1)
        col = lu.solve(e)
        for i in range(n):
            rowsum[i] += math.sqrt(_mag2(col[i]))
    return max(rowsum)


def _sign_vec(y):
    out = []
    for z in y:
        m = math.sqrt(_mag2(z))
        out.append(acb(1) if m == 0.0 else (z / arb(m)).mid())
    return out


def hager_inf_norm(lu: LUFactorization, min_iter: int = 5, max_iter: int = 12) -> float:
    """Lower estimate of ||A^{-1}||_inf by Hager's method applied to A^{-H}.

    ||A^{-1}||_inf equals the 1-norm of B = A^{-H}.  The iteration alternates
    B x and B^H xi = A^{-1} xi; it runs at least ``min_iter`` steps, moving to
    the next unvisited column when the usual stopping test fires early.
    Higham's alternating test vector is tried as well.
    """
    n = lu.n
    x = [acb(arb(1) / n)] * n
    best = 0.0
    visited = set()
    for it in range(max_iter):
        y = lu.solve_adjoint(x)
        est = sum(math.sqrt(_mag2(z)) for z in y)
        best = max(best, est)
        xi = _sign_vec(y)
        z = lu.solve(xi)
        mags = [math.sqrt(_mag2(v)) for v in z]
        ztx = sum(float((v.conjugate() * w).real.mid()) for v, w in zip(z, x))
        order = sorted(range(n), key=lambda i: (-mags[i], i))
        if max(mags) <= ztx and it + 1 >= min_iter:
            break
        j = next((i for i in order if i not in visited), None)
        if j is None:
            break
        visited.add(j)
        x = [acb(0)] * n
        x[j] = acb(1)
    if n > 1:
        alt = [acb((-1) ** i * (1 + arb(i) / (n - 1))) for i in range(n)]
        y = lu.solve_adjoint(alt)
        best = max(best, 2 * sum(math.sqrt(_mag2(z)) for z in y) / (3 * n))
    return best


def inv_norm_estimate(lu: LUFactorization, force_hager: bool = False) -> float:
    """Upper-biased ||A^{-1}||_inf: exact below EXACT_NORM_MAX rows, else 3x Hager."""
    if lu.n <= EXACT_NORM_MAX and not force_hager:
        return inverse_inf_norm_exact(lu)
    return HAGER_SAFETY * hager_inf_norm(lu)


def lu_solve(A, b, ctx: PrecisionContext):
    """Solve A x = b; returns (x, factorization)."""
    lu = lu_factor(A, ctx)
    with ctx:
        return lu.solve(b), lu


def mat_vec(A, x) -> list[acb]:
    M = A if isinstance(A, acb_mat) else acb_mat(A)
    return [z for z in (M * acb_mat([[v] for v in x])).mid().entries()]
