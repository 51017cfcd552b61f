"""Exact phase-one simplex over rationals.

Only feasibility is needed: find ``lam >= 0`` with ``M @ lam == b``. When the
system is infeasible the final phase-one duals give a Farkas certificate
``y`` with ``y @ M <= 0`` column-wise and ``y @ b > 0``.
"""

from fractions import Fraction


def exact_feasibility(M, b):
    """Solve ``M lam = b, lam >= 0`` exactly.

    Parameters
    ----------
    M : list of list of Fraction
        ``m x n`` constraint matrix.
    b : list of Fraction
        Right-hand side of length ``m``.

    Returns
    -------
    (lam, y)
        ``lam`` is a feasible point (list of Fraction) or ``None``; ``y`` is a
        Farkas vector when infeasible, else ``None``.
    """
    m = len(M)
    n = len(M[0]) if m else 0
    rows = []
    for i in range(m):
        row = [Fraction(v) for v in M[i]]
        rhs = Fraction(b[i])
        sign = 1
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
            sign = -1
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        rows.append((row + art, rhs, sign))
    signs = [r[2] for r in rows]
    T = [r[0] + [r[1]] for r in rows]
    ncol = n + m
    basis = list(range(n, n + m))
    # phase-one objective: minimize the sum of artificials
    cost = [Fraction(0)] * n + [Fraction(1)] * m

    def reduced_costs():
        rc = cost[:]
        for i, bi in enumerate(basis):
            cb = cost[bi]
            if cb:
                Ti = T[i]
                for j in range(ncol):
                    rc[j] -= cb * Ti[j]
        return rc

    while True:
        rc = reduced_costs()
        # Bland's rule: smallest index with negative reduced cost
        enter = next((j for j in range(ncol) if rc[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:  # cannot happen: phase one is bounded below by 0
            raise RuntimeError("unbounded phase-one problem")
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(m):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                Tl = T[leave]
                T[i] = [vi - f * vl for vi, vl in zip(T[i], Tl)]
        basis[leave] = enter

    objective = sum((T[i][-1] for i in range(m) if basis[i] >= n), Fraction(0))
    if objective == 0:
        lam = [Fraction(0)] * n
        for i, bi in enumerate(basis):
            if bi < n:
                lam[bi] = T[i][-1]
        return lam, None
    rc = reduced_costs()
    # dual of artificial i is 1 - reduced cost; undo the row sign flips
    y = [(1 - rc[n + i]) * signs[i] for i in range(m)]
    return None, y
