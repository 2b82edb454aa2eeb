"""Constrained-optimization unique information (the ``broja`` method).

UnqR is the minimum of I_Q(Y;R|C) over all joint distributions Q that agree
with the observed distribution P on the (Y,R) and (Y,C) pairwise marginals.
The feasible set decouples per Y-slice into transportation polytopes with
fixed row and column sums, and the objective is convex on it, so the
program is solved by a conditional-gradient (Frank-Wolfe) method with away
steps.  The linear subproblem per slice is a classical transportation
problem solved exactly by a small transportation simplex.

Two optimality certificates are used: the Frank-Wolfe duality gap, and the
objective value itself (conditional mutual information is nonnegative, so
f(Q) < tol certifies f(Q) - f* < tol).  The second one matters at boundary
optima such as logic gates, where the linearized gap can overestimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import JointDist3, InfoSummary, entropy_of, shannon_summary
from .pid import PidComponents, complete_from_unique_r

LN2 = float(np.log(2.0))
FLOOR = 1e-300  # positivity clamp inside logs; never affects values above 0

DEFAULT_TOL = 1e-10
MAX_ITER = 50_000


class NonConvergenceError(RuntimeError):
    """Iteration cap hit before the optimality certificate reached tol.

    Carries the best iterate found so the caller can inspect it; it must
    never be treated as a converged result.
    """

    def __init__(self, message: str, solution: "BrojaSolution"):
        super().__init__(message)
        self.solution = solution


@dataclass
class BrojaSolution:
    """Outcome of the unique-information minimization."""

    q: np.ndarray
    objective: float   # I_Q(Y;R|C) at q, bits
    iterations: int
    gap: float         # certified bound on f(q) - f*, bits
    converged: bool
    objective_trace: list | None = None


# ---------------------------------------------------------------------------
# Exact transportation LP: min <cost, T> with fixed row/column sums
# ---------------------------------------------------------------------------

def transport_min(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact minimizer of <cost, T> over T >= 0 with row sums a, col sums b.

    ``a`` and ``b`` must have equal totals.  Returns a basic optimal plan
    (a vertex of the transportation polytope).
    """
    cost = np.asarray(cost, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = cost.shape
    total = a.sum()
    if total <= 0.0:
        return np.zeros((m, n))
    if m == 1:
        return b.reshape(1, n).copy()
    if n == 1:
        return a.reshape(m, 1).copy()
    if m == 2 and n == 2:
        return _transport_2x2(cost, a, b, total)
    return _transport_simplex(cost, a, b)


def _transport_2x2(cost, a, b, total):
    # one degree of freedom: T = [[t, a0-t], [b0-t, total-a0-b0+t]]
    lo = max(0.0, a[0] + b[0] - total)
    hi = min(a[0], b[0])
    slope = cost[0, 0] - cost[0, 1] - cost[1, 0] + cost[1, 1]
    t = lo if slope > 0.0 else hi
    plan = np.array([[t, a[0] - t], [b[0] - t, total - a[0] - b[0] + t]])
    np.clip(plan, 0.0, None, out=plan)
    return plan


def _northwest_corner(a, b):
    m, n = a.shape[0], b.shape[0]
    alloc = np.zeros((m, n))
    basis = []
    ar = a.astype(float).copy()
    bc = b.astype(float).copy()
    i = j = 0
    while True:
        q = min(ar[i], bc[j])
        alloc[i, j] = q
        basis.append((i, j))
        ar[i] -= q
        bc[j] -= q
        if i == m - 1 and j == n - 1:
            break
        if ar[i] <= bc[j] and i < m - 1:
            i += 1
        elif j < n - 1:
            j += 1
        else:
            i += 1
    return alloc, basis


def _tree_duals(basis, cost, m, n):
    # basis edges connect row node i to col node m+j; solve u_i + v_j = c_ij
    adj = [[] for _ in range(m + n)]
    for (i, j) in basis:
        adj[i].append((m + j, i, j))
        adj[m + j].append((i, i, j))
    u = np.zeros(m)
    v = np.zeros(n)
    seen = [False] * (m + n)
    stack = [0]
    seen[0] = True
    while stack:
        node = stack.pop()
        for nb, i, j in adj[node]:
            if seen[nb]:
                continue
            seen[nb] = True
            if nb >= m:
                v[nb - m] = cost[i, j] - u[i]
            else:
                u[nb] = cost[i, j] - v[j]
            stack.append(nb)
    return u, v, adj, seen


def _tree_path(adj, start, goal, nnodes):
    # unique path in the basis tree; returns the list of cells along it
    prev = {start: (None, None)}
    stack = [start]
    while stack:
        node = stack.pop()
        if node == goal:
            break
        for nb, i, j in adj[node]:
            if nb not in prev:
                prev[nb] = (node, (i, j))
                stack.append(nb)
    cells = []
    node = goal
    while prev[node][0] is not None:
        node, cell = prev[node]
        cells.append(cell)
    cells.reverse()
    return cells


def _transport_simplex(cost, a, b, max_pivots=5000):
    m, n = cost.shape
    alloc, basis = _northwest_corner(a, b)
    scale = max(1.0, float(np.max(np.abs(cost))))
    enter_eps = 1e-13 * scale
    basis_set = set(basis)
    degenerate_run = 0
    bland = False

    for _ in range(max_pivots):
        u, v, adj, seen = _tree_duals(basis, cost, m, n)
        red = cost - u[:, None] - v[None, :]
        for (i, j) in basis:
            red[i, j] = 0.0
        if bland:
            cand = np.argwhere(red < -enter_eps)
            if cand.size == 0:
                return alloc
            ei, ej = map(int, cand[0])
        else:
            flat = int(np.argmin(red))
            ei, ej = divmod(flat, n)
            if red[ei, ej] >= -enter_eps:
                return alloc
        # cycle: entering cell closes the unique tree path row ei -> col ej
        path = _tree_path(adj, ei, m + ej, m + n)
        minus = path[0::2]
        theta = min(alloc[i, j] for (i, j) in minus)
        leave = min((cell for cell in minus if alloc[cell] <= theta),
                    key=lambda cell: cell)
        alloc[ei, ej] += theta
        sign = -1.0
        for cell in path:
            alloc[cell] += sign * theta
            sign = -sign
        if alloc[leave] < 0.0:
            alloc[leave] = 0.0
        basis.remove(leave)
        basis.append((ei, ej))
        basis_set.discard(leave)
        basis_set.add((ei, ej))
        if theta <= 0.0:
            degenerate_run += 1
            if degenerate_run > 50:
                bland = True
        else:
            degenerate_run = 0
    return _transport_lp_fallback(cost, a, b)


def _transport_lp_fallback(cost, a, b):
    from scipy.optimize import linprog

    m, n = cost.shape
    rows = []
    for i in range(m):
        r = np.zeros(m * n)
        r[i * n:(i + 1) * n] = 1.0
        rows.append(r)
    for j in range(n):
        r = np.zeros(m * n)
        r[j::n] = 1.0
        rows.append(r)
    A_eq = np.array(rows[:-1])
    b_eq = np.concatenate([a, b])[:-1]
    res = linprog(cost.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transportation fallback LP failed: {res.message}")
    return res.x.reshape(m, n)


# ---------------------------------------------------------------------------
# Frank-Wolfe with away steps over the product of per-slice polytopes
# ---------------------------------------------------------------------------

def _neg_h_y_given_rc(q: np.ndarray) -> float:
    """sum q log2(q / q_rc), i.e. -H(Y|R,C) in bits."""
    q_rc = q.sum(axis=0)
    mask = q > 0.0
    vals = q[mask]
    fibers = np.maximum(np.broadcast_to(q_rc, q.shape)[mask], FLOOR)
    return float(np.sum(vals * np.log2(vals / fibers)))


def _lp_costs(q: np.ndarray, fillable: np.ndarray, fiber_gain: np.ndarray) -> np.ndarray:
    """Linearization of the objective, valid as a lower bound per unit mass.

    Live fibers get log2(q(y|r,c)) with zeros clamped far negative (the true
    derivative is -inf there, so descent along such cells is real).  Cells of
    dead but fillable fibers get -log2(number of slices that could fill the
    fiber), the best possible per-unit gain of filling it; this overestimates
    the gap, never undershoots it, and is exact for single-slice fibers.
    """
    q_rc = q.sum(axis=0)
    live = q_rc > 0.0
    cost = np.where(fillable, -fiber_gain[None, :, :], 0.0)
    qc = np.maximum(q, FLOOR)
    cost[:, live] = np.log2(qc[:, live] / q_rc[live])
    return cost


def _dual_lower_bound(q, row, col, const):
    """Rigorous lower bound on the optimum from feasible Lagrangian duals.

    Dualizing the two marginal constraint families with potentials
    alpha(y,r) and beta(y,c) leaves an inner minimization over the
    nonnegative cone of a degree-1 homogeneous function; the dual value is
    finite exactly when sum_y 2^(alpha+beta) <= 1 holds for every (r,c),
    and then equals const + <alpha, row> + <beta, col>.  Potentials are
    fitted to the iterate's gradient field (stationarity makes the fit
    exact at the optimum) and shifted per column into feasibility, so the
    returned value is a true bound regardless of fit quality.
    """
    ny, nr, nc = q.shape
    q_rc = q.sum(axis=0)
    fiber = np.broadcast_to(q_rc, q.shape)
    p_c = col.sum(axis=0)
    best = -np.inf
    for rel_thr in (0.0, 1e-6):
        mask = q > rel_thr * fiber
        cells = np.argwhere(mask)
        if cells.shape[0] == 0:
            continue
        idx = tuple(cells.T)
        g = np.log2(q[idx] / np.maximum(fiber[idx], FLOOR))
        m = cells.shape[0]
        design = np.zeros((m, ny * nr + ny * nc))
        rows_a = np.arange(m)
        design[rows_a, cells[:, 0] * nr + cells[:, 1]] = 1.0
        design[rows_a, ny * nr + cells[:, 0] * nc + cells[:, 2]] = 1.0
        # two complementary fit weightings: plain least squares recovers the
        # duals exactly at a face optimum, mass weights ignore cells still
        # crawling to zero
        for wvec in (None, q[idx]):
            if wvec is None:
                sol = np.linalg.lstsq(design, g, rcond=None)[0]
            else:
                sw = np.sqrt(wvec)
                sol = np.linalg.lstsq(design * sw[:, None], g * sw, rcond=None)[0]
            alpha = sol[:ny * nr].reshape(ny, nr)
            beta = sol[ny * nr:].reshape(ny, nc)
            # empty marginal rows constrain nothing; push them out of the way
            alpha = np.where(row > 0.0, alpha, -1e6)
            beta = np.where(col > 0.0, beta, -1e6)
            gamma = alpha[:, :, None] + beta[:, None, :]
            with np.errstate(divide="ignore"):
                s = np.log2(np.maximum(np.exp2(gamma).sum(axis=0), FLOOR))
            shift = np.maximum(s.max(axis=0), -1e6)  # per column
            value = (const + float(np.sum(alpha * row)) + float(np.sum(beta * col))
                     - float(np.sum(shift * p_c)))
            best = max(best, value)
    return best


def _fit_potentials(q, row, col, mask):
    """Least-squares additive potentials for the gradient field on mask.

    At a face optimum the gradient log2 q(y|r,c) is exactly additive over
    the (y,r) and (y,c) groups, so the fit recovers the face's Lagrange
    multipliers; rows without mass are pushed far negative so they never
    bind the dual feasibility constraint.
    """
    ny, nr, nc = q.shape
    cells = np.argwhere(mask)
    if cells.shape[0] == 0:
        return None, None
    idx = tuple(cells.T)
    fiber = np.broadcast_to(q.sum(axis=0), q.shape)
    g = np.log2(np.maximum(q[idx], FLOOR) / np.maximum(fiber[idx], FLOOR))
    m = cells.shape[0]
    design = np.zeros((m, ny * nr + ny * nc))
    rows_a = np.arange(m)
    design[rows_a, cells[:, 0] * nr + cells[:, 1]] = 1.0
    design[rows_a, ny * nr + cells[:, 0] * nc + cells[:, 2]] = 1.0
    sol = np.linalg.lstsq(design, g, rcond=None)[0]
    alpha = np.where(row > 0.0, sol[:ny * nr].reshape(ny, nr), -1e6)
    beta = np.where(col > 0.0, sol[ny * nr:].reshape(ny, nc), -1e6)
    return alpha, beta


def _restore_marginals(x, support, row, col):
    """Alternating scaling on the face until both marginal families hold."""
    for _ in range(300):
        xr = x.sum(axis=2)
        x = x * np.where(xr > 0.0, row / np.maximum(xr, FLOOR), 0.0)[:, :, None]
        xc = x.sum(axis=1)
        x = x * np.where(xc > 0.0, col / np.maximum(xc, FLOOR), 0.0)[:, None, :]
        if float(np.max(np.abs(x.sum(axis=2) - row))) < 1e-13:
            return x
    return None


def _polish_on_support(q, row, col, thr_rel):
    """Active-set Newton refinement of q on faces of the feasible polytope.

    A face is described by the set of live (r, c) fibers: inside a live
    fiber the log barrier keeps every structurally allowed cell positive, so
    cells vanish only when their whole fiber does.  Fibers carrying at most
    ``thr_rel`` of the largest fiber mass are pinned to zero, the marginals
    are re-established on the face by alternating scaling, and the objective
    is minimized over it by damped Newton steps in the constraint null
    space; a fiber driven to the boundary is pinned and the face shrinks.
    Returns the refined array, or None when a face cannot carry the
    marginals.  Near the optimum this converges quadratically, closing gaps
    that conditional-gradient steps approach only slowly.
    """
    ny, nr, nc = q.shape
    fillable = (row[:, :, None] > 0.0) & (col[:, None, :] > 0.0)
    nfib = nr * nc
    # strictly positive seed on the face: multiplicative rescaling cannot
    # grow an exact zero, so blend in the slice-product interior point
    p_y = row.sum(axis=1)
    prod = np.zeros_like(q)
    for y in range(ny):
        if p_y[y] > 0.0:
            prod[y] = np.outer(row[y], col[y]) / p_y[y]
    if thr_rel < 0.0:
        # maximal face with a deterministic interior seed; pinning and
        # revival alone decide which fibers die
        alive = fillable.any(axis=0)
        x = prod.copy()
    else:
        q_rc = q.sum(axis=0)
        alive = q_rc > thr_rel * q_rc.max()
        x = 0.5 * (q + prod)
    if x.sum() <= 0.0:
        return None

    con_cells = {}
    for y, r in np.argwhere(row > 0.0):
        con_cells[("r", y, r)] = len(con_cells)
    for y, c in np.argwhere(col > 0.0):
        con_cells[("c", y, c)] = len(con_cells)

    revivals = 0
    seen_faces = set()
    newton_budget = 500
    best_x, best_val = None, np.inf

    def better(cand):
        nonlocal best_x, best_val
        val = _neg_h_y_given_rc(cand)
        if val < best_val:
            best_x, best_val = cand.copy(), val

    for _face in range(6 * nfib + 2):
        face_key = alive.tobytes()
        if face_key in seen_faces:
            better(x)
            return best_x
        seen_faces.add(face_key)
        support = fillable & alive[None, :, :]
        if (((row > 0.0) & (support.sum(axis=2) == 0)).any()
                or ((col > 0.0) & (support.sum(axis=1) == 0)).any()):
            return best_x  # a pin made the face infeasible; keep the best seen
        restored = _restore_marginals(np.where(support, x, 0.0), support, row, col)
        if restored is None:
            return best_x
        x = restored
        cells = np.argwhere(support)
        m = cells.shape[0]
        if m == 0:
            return best_x
        a_mat = np.zeros((len(con_cells), m))
        for k, (y, r, c) in enumerate(cells):
            a_mat[con_cells[("r", y, r)], k] = 1.0
            a_mat[con_cells[("c", y, c)], k] = 1.0
        _, svals, vt = np.linalg.svd(a_mat, full_matrices=True)
        rank = int(np.sum(svals > 1e-10 * max(1.0, svals[0] if svals.size else 1.0)))
        null = vt[rank:].T  # m x dim
        if null.shape[1] == 0:
            better(x)
            return best_x
        fid = cells[:, 1] * nc + cells[:, 2]
        idx = tuple(cells.T)

        pinned_fiber = None
        converged_face = False
        for _ in range(60):
            if newton_budget <= 0:
                better(x)
                return best_x
            newton_budget -= 1
            xv = x[idx]
            x_rc = x.sum(axis=0).ravel()
            grad = np.log2(np.maximum(xv, FLOOR) / np.maximum(x_rc[fid], FLOOR))
            gz = null.T @ grad
            if float(np.max(np.abs(gz))) < 1e-13:
                converged_face = True
                break
            hn = null / np.maximum(xv, FLOOR)[:, None]
            fiber_sums = np.zeros((nfib, null.shape[1]))
            np.add.at(fiber_sums, fid, null)
            hn -= fiber_sums[fid] / np.maximum(x_rc[fid], FLOOR)[:, None]
            hess = (null.T @ hn) / LN2
            reg = 1e-13 * max(1.0, float(np.trace(hess)) / hess.shape[0])
            try:
                dz = np.linalg.solve(hess + reg * np.eye(hess.shape[0]), -gz)
            except np.linalg.LinAlgError:
                better(x)
                return best_x
            dx = null @ dz
            # fiber mass change along the direction caps the step
            d_rc = np.zeros(nfib)
            np.add.at(d_rc, fid, dx)
            shrink = d_rc < 0.0
            tcap, block = 1.0, None
            if shrink.any():
                ratios = x_rc[shrink] / -d_rc[shrink]
                k_min = int(np.argmin(ratios))
                if float(ratios[k_min]) < 1.0:
                    tcap = float(ratios[k_min])
                    block = np.flatnonzero(shrink)[k_min]
            full_d = np.zeros_like(x)
            full_d[idx] = dx
            t = _exact_step(x, full_d, tcap)
            if t <= 0.0:
                if block is not None and x_rc[block] <= 1e-11 * x_rc.max():
                    pinned_fiber = block
                break
            x = np.maximum(x + t * full_d, 0.0)
            if block is not None and t >= tcap * (1.0 - 1e-7):
                pinned_fiber = block
                break
        better(x)
        if pinned_fiber is not None:
            alive = alive.copy().ravel()
            alive[pinned_fiber] = False
            alive = alive.reshape(nr, nc)
            continue
        if not converged_face:
            return best_x
        # KKT check: a dead fiber whose fitted duals break the feasibility
        # condition sum_y 2^gamma <= 1 must be reopened; this face is only
        # locally optimal
        dead = (~alive) & fillable.any(axis=0)
        if not dead.any() or revivals >= nfib:
            return best_x
        alpha, beta = _fit_potentials(x, row, col, support & (x > 0.0))
        if alpha is None:
            return best_x
        gamma = alpha[:, :, None] + beta[:, None, :]
        excess = np.where(dead, np.exp2(gamma).sum(axis=0) - 1.0, -np.inf)
        worst = np.unravel_index(int(np.argmax(excess)), excess.shape)
        if excess[worst] <= 1e-11:
            return best_x
        alive = alive.copy()
        alive[worst] = True
        revivals += 1
        # the revived fiber needs mass the multiplicative restore can grow
        x = 0.95 * x + 0.05 * prod
    return best_x


def _exact_step(q, d, tmax):
    """Exact line search: argmin_t f(q + t d) on [0, tmax] for convex f.

    Slopes are probed slightly inside the interval ends: exactly at a
    boundary where a whole fiber's mass vanishes the clamped log ratio
    degenerates to 0 while the true one-sided slope is finite.
    """
    def dphi(t):
        x = q + t * d
        x_rc = x.sum(axis=0)
        xc = np.maximum(x, FLOOR)
        xrc = np.maximum(x_rc, FLOOR)
        return float(np.sum(d * np.log2(xc / np.broadcast_to(xrc, x.shape))))

    def phi(t):
        x = q + t * d
        x_rc = x.sum(axis=0)
        mask = x > 0.0
        vals = x[mask]
        fibers = np.broadcast_to(x_rc, x.shape)[mask]
        return float(np.sum(vals * np.log2(vals / np.maximum(fibers, FLOOR))))

    inset = tmax * (1.0 - 1e-9)
    if dphi(inset) <= 0.0:
        # descending across the whole interval; the true minimum is tmax or
        # a hair inside it, whichever evaluates lower
        return tmax if phi(tmax) <= phi(inset) else inset
    probe = tmax * 1e-12
    if dphi(probe) >= 0.0:
        return 0.0
    lo, hi = probe, inset
    t = 0.5 * (lo + hi)
    d_rc = d.sum(axis=0)
    for _ in range(90):
        x = q + t * d
        x_rc = x.sum(axis=0)
        xc = np.maximum(x, FLOOR)
        xrc = np.maximum(x_rc, FLOOR)
        ratios = np.log2(xc / np.broadcast_to(xrc, x.shape))
        g = float(np.sum(d * ratios))
        if abs(g) < 1e-13:
            return t
        if g > 0.0:
            hi = t
        else:
            lo = t
        if hi - lo <= 1e-15 * tmax:
            break
        # Newton on the monotone derivative, safeguarded by the bracket
        cell_ok = x > FLOOR
        fib_ok = x_rc > FLOOR
        curv = float(np.sum(d[cell_ok] ** 2 / x[cell_ok])
                     - np.sum(d_rc[fib_ok] ** 2 / x_rc[fib_ok]))
        if curv > 0.0:
            tn = t - g * LN2 / curv
            if lo < tn < hi:
                t = tn
                continue
        t = 0.5 * (lo + hi)
    return 0.5 * (lo + hi)


class _AtomSet:
    """Convex-combination bookkeeping for the away-step iterate.

    Atoms (vertices plus the start point) live as rows of a flat matrix so
    the per-iteration away-atom scoring is one matrix-vector product.
    """

    def __init__(self, start: np.ndarray):
        self.mat = start.reshape(1, -1).copy()
        self.weights = np.array([1.0])
        self.index = {start.tobytes(): 0}

    def __len__(self) -> int:
        return self.weights.shape[0]

    def array(self, i: int) -> np.ndarray:
        return self.mat[i]

    def worst(self, cost: np.ndarray):
        scores = self.mat @ cost.ravel()
        i = int(np.argmax(scores))
        return i, float(scores[i])

    def _add(self, arr: np.ndarray, w: float) -> None:
        key = arr.tobytes()
        i = self.index.get(key)
        if i is None:
            self.index[key] = self.mat.shape[0]
            self.mat = np.vstack([self.mat, arr.reshape(1, -1)])
            self.weights = np.append(self.weights, w)
        else:
            self.weights[i] += w

    def fw_step(self, vertex: np.ndarray, t: float) -> None:
        self.weights *= 1.0 - t
        self._add(vertex, t)

    def away_step(self, i: int, t: float) -> None:
        self.weights *= 1.0 + t
        self.weights[i] -= t

    def prune(self, eps: float = 1e-15) -> None:
        dead = self.weights <= eps
        if not dead.any():
            return
        keep = ~dead
        self.mat = self.mat[keep]
        self.weights = self.weights[keep]
        self.index = {self.mat[i].tobytes(): i for i in range(self.mat.shape[0])}

    def combination(self) -> np.ndarray:
        return (self.weights / self.weights.sum()) @ self.mat


def minimize_conditional_mi(
    p: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITER,
    record_trace: bool = False,
) -> BrojaSolution:
    """Minimize I_Q(Y;R|C) over Q with P's (Y,R) and (Y,C) marginals.

    Deterministic: starts at Q = P, uses exact line search, no randomness.
    Raises NonConvergenceError if neither certificate reaches ``tol``
    within ``max_iter`` iterations.
    """
    p = np.asarray(p, dtype=float)
    ny = p.shape[0]
    row = p.sum(axis=2)  # (ny, nr) per-slice row sums
    col = p.sum(axis=1)  # (ny, nc) per-slice col sums
    fillable = (row[:, :, None] > 0.0) & (col[:, None, :] > 0.0)
    fiber_gain = np.log2(np.maximum(fillable.sum(axis=0), 1)).astype(float)
    # H(Y|C) is fixed on the feasible set
    const = entropy_of(col) - entropy_of(col.sum(axis=0))

    def objective(q):
        return const + _neg_h_y_given_rc(q)

    # interior feasible point, used only to escape boundary stalls
    p_y = row.sum(axis=1)
    interior = np.zeros_like(p)
    for y in range(ny):
        if p_y[y] > 0.0:
            interior[y] = np.outer(row[y], col[y]) / p_y[y]

    q = p.copy()
    atoms = _AtomSet(p)
    f_cur = objective(q)
    best_f, best_q = f_cur, q.copy()
    trace = [f_cur] if record_trace else None
    gap = np.inf
    best_lower = -np.inf
    stall_rounds = 0
    it = 0

    full_face_done = False
    polish_attempts = 0

    def try_polish():
        # refine on the current support face; harvest the dual bound from any
        # near-best face, adopt the refined point when it improves
        nonlocal q, atoms, best_f, best_q, best_lower, full_face_done
        adopted = False
        # warm face from the iterate first, then the maximal face, whose
        # active-set pinning and revival decide fiber deaths from scratch;
        # the latter is deterministic in P, so one attempt suffices
        variants = [1e-8] if full_face_done else [1e-8, -1.0]
        for thr in variants:
            if thr < 0.0:
                full_face_done = True
            xp = _polish_on_support(q, row, col, thr)
            if xp is None:
                continue
            fp = objective(xp)
            if fp > best_f + 1e-9:
                continue  # wrong face; its duals would be loose anyway
            best_lower = max(best_lower, _dual_lower_bound(xp, row, col, const))
            if fp < best_f:
                best_f, best_q = fp, xp.copy()
            if fp < objective(q) - 1e-14 and not adopted:
                q = xp
                atoms = _AtomSet(xp)
                adopted = True
            if best_f - best_lower < tol:
                break
        return adopted

    for it in range(1, max_iter + 1):
        cost = _lp_costs(q, fillable, fiber_gain)
        v = np.zeros_like(q)
        for y in range(ny):
            if p_y[y] > 0.0:
                v[y] = transport_min(cost[y], row[y], col[y])
        lin_q = float(np.sum(cost * q))
        gap = lin_q - float(np.sum(cost * v))
        f_cur = objective(q)
        if f_cur < best_f:
            best_f, best_q = f_cur, q.copy()
        if gap >= tol and it % 16 == 0:
            best_lower = max(best_lower, _dual_lower_bound(q, row, col, const))
        cert = min(gap, max(f_cur, 0.0), best_f - best_lower)
        if cert < tol:
            gap = cert
            break
        if (it == 8 or it % 96 == 0) and polish_attempts < 12:
            # periodic face polish; near the optimum it converges
            # quadratically where conditional-gradient steps crawl
            polish_attempts += 1
            try_polish()
            cert = min(gap, max(objective(q), 0.0), best_f - best_lower)
            if cert < tol:
                gap = cert
                break

        # away atom: the active atom the gradient ranks worst
        away_idx, away_score = atoms.worst(cost)
        use_fw = len(atoms) == 1 or (away_score - lin_q) <= gap

        if use_fw:
            d = v - q
            t = _exact_step(q, d, 1.0)
            if t > 0.0:
                q = np.maximum(q + t * d, 0.0)
                atoms.fw_step(v, t)
        else:
            w = atoms.weights[away_idx]
            d = q - atoms.array(away_idx).reshape(q.shape)
            tmax = w / (1.0 - w) if w < 1.0 else 1.0
            t = _exact_step(q, d, tmax)
            if t > 0.0:
                q = np.maximum(q + t * d, 0.0)
                atoms.away_step(away_idx, t)

        if t <= 0.0:
            # No strict descent along either direction, yet the linearized
            # gap overestimates at this boundary point (dead fibers and
            # vanishing cells hide the true directional derivative).  Polish
            # the face and try the dual certificate here, then mix a
            # shrinking amount of the interior point in; the mixed iterate
            # has every fillable cell positive, so its gap next iteration is
            # honest, and the ladder delta -> 0 makes it certify eventually.
            if polish_attempts < 12:
                polish_attempts += 1
                try_polish()
            best_lower = max(best_lower, _dual_lower_bound(q, row, col, const))
            if best_f - best_lower < tol:
                gap = min(gap, best_f - best_lower)
                break
            stall_rounds += 1
            if stall_rounds > 24:
                break
            delta = 1e-4 * 0.1 ** (stall_rounds - 1)
            q = (1.0 - delta) * q + delta * interior
            atoms.fw_step(interior, delta)

        atoms.prune()
        if it % 256 == 0:
            # recombine from atoms to cancel accumulated drift
            q = atoms.combination().reshape(q.shape)
        if record_trace:
            trace.append(objective(q))

    final_gap = min(gap, max(best_f, 0.0), best_f - best_lower)
    converged = final_gap < tol
    sol = BrojaSolution(
        q=best_q,
        objective=best_f,
        iterations=it,
        gap=float(final_gap),
        converged=converged,
        objective_trace=trace,
    )
    if not converged:
        raise NonConvergenceError(
            f"no optimality certificate below tol={tol} after {it} iterations "
            f"(best objective {best_f:.3e}, gap bound {sol.gap:.3e})", sol)
    return sol


def pid_broja(
    dist: JointDist3,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITER,
    summary: InfoSummary | None = None,
) -> tuple[PidComponents, BrojaSolution]:
    """Decomposition via minimized conditional mutual information.

    UnqR is the optimal objective; Shd, UnqC and Syn follow from the
    consistency identities evaluated with the observed distribution's
    mutual informations.  Raises NonConvergenceError (with the best iterate
    attached) rather than returning an uncertified result.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if summary is None:
        summary = shannon_summary(dist)
    solution = minimize_conditional_mi(dist.p, tol=tol, max_iter=max_iter)
    components = complete_from_unique_r("broja", solution.objective, summary, clip=True)
    return components, solution
