"""Matrix-power digit sequences, linear d-step recursions, and Markov chains.

Entries of A^n grow like rho(A)^n, so powers are maintained in
scale-and-accumulate form: the running matrix is renormalized to unit
Frobenius norm each step and the factored-out log10 norm accumulates in an
80-bit longdouble.  Entry logs are then log_scale + log10|entry of the
normalized matrix|, which never overflows and keeps the fractional part
accurate over 1e4 steps.

For a row-stochastic P with stationary projector P* (rows all equal to the
stationary distribution), the identities P*P = P P* = P*P* = P* give

    P^n - P*       = (P - P*)^n
    P^(n+1) - P^n  = (P - P*)^n (P - I)

so both Markov difference sequences are computed as powers of Q = P - P*
without catastrophic cancellation.  Powers of Q are iterated in native
doubles until the entries underflow (|entry| ~ 1e-290); past that point the
log-magnitudes continue on the log-linear model log10|gap_n| = slope*n + c
fitted to the last 50 valid terms, whose slope is pinned by the second
eigenvalue: slope -> log10|lambda_2|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .logdomain import slv_from_log10
from .significand import SignedLogValue

__all__ = [
    "RecursionSpec",
    "MarkovSequences",
    "PowerIterationError",
    "matrix_power_entries",
    "spectral_radius",
    "second_eigenvalue_modulus",
    "linear_recursion",
    "random_stochastic_matrix",
    "markov_sequences",
]

_UNDERFLOW_GUARD = 1e-290
_FIT_WINDOW = 50


class PowerIterationError(RuntimeError):
    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


def _as_square_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def _is_integer_matrix(a) -> bool:
    arr = np.asarray(a)
    if arr.dtype.kind in "iu":
        return True
    return bool(np.all(arr == np.floor(arr)) and np.all(np.abs(arr) < 2 ** 53))


def matrix_power_entries(
    a, k: int, ell: int, n: int, exact: bool | None = None
) -> List[SignedLogValue]:
    """[A^m]_{k,ell} for m = 1..n as log-domain values; k, ell are 1-based.

    exact=True forces full-integer arithmetic (integer A, n <= 90); the
    default uses it automatically in that range so small cross-checks agree
    with the integer oracle bit-for-bit.
    """
    m = _as_square_matrix(a)
    d = m.shape[0]
    if not (1 <= k <= d and 1 <= ell <= d):
        raise ValueError(f"entry indices must lie in 1..{d}, got ({k}, {ell})")
    if n < 1:
        raise ValueError("n must be >= 1")
    if exact is None:
        exact = _is_integer_matrix(a) and n <= 90
    if exact:
        if not _is_integer_matrix(a):
            raise ValueError("exact mode requires an integer matrix")
        return _integer_power_entries(a, k - 1, ell - 1, n)

    current = m.copy()
    norm = float(np.linalg.norm(current))
    if norm == 0.0:
        raise ValueError("zero matrix has no nonzero powers")
    current /= norm
    log_scale = np.longdouble(math.log10(norm))
    out: List[SignedLogValue] = []
    for _ in range(n):
        e = current[k - 1, ell - 1]
        if e == 0.0:
            out.append(SignedLogValue(0))
        else:
            y = float(log_scale + np.longdouble(math.log10(abs(e))))
            out.append(slv_from_log10(1 if e > 0 else -1, y))
        current = current @ m
        norm = float(np.linalg.norm(current))
        if norm < 1e-300 or not math.isfinite(norm):
            raise ValueError("matrix power collapsed (norm underflow); cannot continue")
        current /= norm
        log_scale += np.longdouble(math.log10(norm))
    return out


def _integer_power_entries(a, i: int, j: int, n: int) -> List[SignedLogValue]:
    rows = [[int(v) for v in row] for row in np.asarray(a)]
    d = len(rows)
    power = [row[:] for row in rows]
    out = []
    for _ in range(n):
        v = power[i][j]
        if v == 0:
            out.append(SignedLogValue(0))
        else:
            out.append(SignedLogValue.from_real(float(v)) if abs(v) < 2**53
                       else _slv_from_int(v))
        power = [
            [sum(power[r][t] * rows[t][c] for t in range(d)) for c in range(d)]
            for r in range(d)
        ]
    return out


def _slv_from_int(v: int) -> SignedLogValue:
    # exact log10 of a big integer via bit length + scaled mantissa
    av = abs(v)
    bl = av.bit_length()
    mant = av >> max(0, bl - 64)
    y = math.log10(mant) + max(0, bl - 64) * math.log10(2.0)
    return slv_from_log10(1 if v > 0 else -1, y)


def spectral_radius(a, tol: float = 1e-13, max_iter: int = 20_000) -> float:
    """Largest eigenvalue modulus by power iteration.

    A two-step Krylov fit (deflating the dominant pair to the roots of
    t^2 = alpha t + beta) backs up the plain iteration when the dominant
    eigenvalue is complex or a +-pair, where norm ratios oscillate.
    """
    m = _as_square_matrix(a)
    d = m.shape[0]
    if d > 16:
        raise ValueError("spectral_radius supports dimension <= 16")
    norm = float(np.max(np.abs(m)))
    if norm == 0.0:
        return 0.0
    rng = np.random.default_rng(0)  # fixed: the estimate must be deterministic
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    est_prev = math.inf
    stable = 0
    history: List[np.ndarray] = [v.copy()]
    for it in range(1, max_iter + 1):
        w = m @ v
        r = float(np.linalg.norm(w))
        if r == 0.0:
            return 0.0  # v fell into the kernel of a nilpotent part
        v = w / r
        history.append(v.copy())
        if len(history) > 3:
            history.pop(0)
        if abs(r - est_prev) <= tol * max(1.0, r):
            stable += 1
            if stable >= 8:
                return r
        else:
            stable = 0
        est_prev = r
        if it % 64 == 0 and it >= 256:
            rho = _krylov_pair_radius(m, history)
            if rho is not None:
                return rho
    rho = _krylov_pair_radius(m, history)
    if rho is not None:
        return rho
    raise PowerIterationError("power iteration did not converge", max_iter)


def _krylov_pair_radius(m: np.ndarray, history: Sequence[np.ndarray]):
    """Fit v_{k+2} ~ alpha v_{k+1} + beta v_k (unnormalized) and return the
    max root modulus of t^2 - alpha t - beta, or None if the fit is poor."""
    if len(history) < 3:
        return None
    v0 = history[-3]
    v1 = m @ v0
    v2 = m @ v1
    basis = np.stack([v1, v0], axis=1)
    coef, residual, rank, _ = np.linalg.lstsq(basis, v2, rcond=None)
    if rank < 2:
        return None
    fit = basis @ coef
    err = np.linalg.norm(v2 - fit)
    scale = np.linalg.norm(v2)
    if scale == 0.0 or err > 1e-9 * max(scale, 1.0):
        return None
    alpha, beta = coef
    roots = np.roots([1.0, -alpha, -beta])
    return float(np.max(np.abs(roots)))


def second_eigenvalue_modulus(p, p_star, tol: float = 1e-12) -> float:
    """|lambda_2| of a stochastic matrix: spectral radius of the deflated
    matrix P - P*."""
    q = _as_square_matrix(p) - _as_square_matrix(p_star)
    if np.max(np.abs(q)) < 1e-15:
        return 0.0
    return spectral_radius(q, tol=tol)


@dataclass(frozen=True)
class RecursionSpec:
    """Linear d-step recursion x_n = sum_i coeffs[i] * x_{n-i} with positive
    coefficients and positive seeds x_1..x_d."""

    coeffs: Tuple[float, ...]
    seeds: Tuple[float, ...]

    def __post_init__(self):
        if not self.coeffs or len(self.coeffs) != len(self.seeds):
            raise ValueError("need d coefficients and d seeds")
        if any(c <= 0 for c in self.coeffs) or any(s <= 0 for s in self.seeds):
            raise ValueError("coefficients and seeds must be positive")

    @property
    def order(self) -> int:
        return len(self.coeffs)


def linear_recursion(spec: RecursionSpec, n: int) -> Tuple[List[SignedLogValue], float]:
    """Solve the recursion for n terms (seeds included) in log domain and
    return (sequence, zeta) with zeta the dominant characteristic root.

    With positive coefficients the companion matrix is primitive, so the
    dominant root is real, simple and positive (it is the Perron root); the
    implementation checks this and fails loudly otherwise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    d = spec.order
    companion = np.zeros((d, d))
    companion[0, :] = spec.coeffs
    for i in range(1, d):
        companion[i, i - 1] = 1.0
    zeta = spectral_radius(companion)
    # characteristic polynomial residual as a sanity check of realness
    res = zeta ** d - sum(c * zeta ** (d - 1 - i) for i, c in enumerate(spec.coeffs))
    if not math.isfinite(res) or abs(res) > 1e-6 * max(1.0, zeta ** d):
        raise ValueError("dominant characteristic root is not a clean real root")

    out = [SignedLogValue.from_real(s) for s in spec.seeds[:n]]
    if n <= d:
        return out, zeta
    # state holds x_{m-d}..x_{m-1} scaled by 10^log_scale
    state = np.asarray(spec.seeds, dtype=float)
    norm = float(np.max(state))
    state /= norm
    log_scale = np.longdouble(math.log10(norm))
    coeffs_rev = np.asarray(spec.coeffs[::-1], dtype=float)
    for _ in range(d, n):
        x_new = float(np.dot(coeffs_rev, state))
        state = np.concatenate([state[1:], [x_new]])
        y = float(log_scale + np.longdouble(math.log10(x_new)))
        out.append(slv_from_log10(1, y))
        m = float(np.max(state))
        state /= m
        log_scale += np.longdouble(math.log10(m))
    return out, zeta


def random_stochastic_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    """Row-stochastic matrix with rows drawn uniformly from the simplex.

    Rows are normalized vectors of iid standard exponentials, which is the
    exact uniform (Dirichlet(1,..,1)) distribution on the simplex and in
    particular absolutely continuous.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    rows = rng.standard_exponential((d, d))
    return rows / rows.sum(axis=1, keepdims=True)


def _stationary_projector(p: np.ndarray) -> np.ndarray:
    d = p.shape[0]
    # left eigenvector for eigenvalue 1: solve (P^T - I) pi = 0 with sum pi = 1
    a = p.T - np.eye(d)
    a[-1, :] = 1.0
    b = np.zeros(d)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    return np.tile(pi, (d, 1))


def _is_primitive(p: np.ndarray) -> bool:
    # Wielandt: P primitive iff P^(d^2 - 2d + 2) > 0 entrywise (boolean powers)
    d = p.shape[0]
    adj = p > 0.0
    target = d * d - 2 * d + 2
    power = np.eye(d, dtype=bool)
    base = adj.copy()
    n = target
    while n:
        if n & 1:
            power = (power.astype(int) @ base.astype(int)) > 0
        base = (base.astype(int) @ base.astype(int)) > 0
        n >>= 1
    return bool(np.all(power))


@dataclass
class MarkovSequences:
    """diff_n = [P^(n+1) - P^n]_{k,ell} and gap_n = [P^n - P*]_{k,ell}."""

    diff: List[SignedLogValue]
    gap: List[SignedLogValue]
    p_star: np.ndarray
    lambda2_modulus: float
    asymptotic_from: int | None = None
    fitted_slope: float | None = None

    @property
    def eventually_zero(self) -> bool:
        # zero from some point on (burn-in of up to 5 terms allowed)
        skip = min(5, len(self.gap) - 1)
        return all(v.sign == 0 for v in self.gap[skip:]) and all(
            v.sign == 0 for v in self.diff[skip:]
        )


def markov_sequences(p, k: int, ell: int, n: int) -> MarkovSequences:
    """Markov difference sequences for an irreducible aperiodic stochastic P.

    Native matrix powers of Q = P - P* run until the entries underflow;
    beyond that, log-magnitudes follow the least-squares line through the
    last 50 valid terms (real lambda_2 assumed for the extension; orbits that
    finish inside native range never need it).
    """
    pm = _as_square_matrix(p)
    d = pm.shape[0]
    if not (1 <= k <= d and 1 <= ell <= d):
        raise ValueError(f"entry indices must lie in 1..{d}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if np.any(pm < 0) or not np.allclose(pm.sum(axis=1), 1.0, atol=1e-12):
        raise ValueError("matrix is not row-stochastic")
    if not _is_primitive(pm):
        raise ValueError("matrix is reducible or periodic; limits do not apply")

    p_star = _stationary_projector(pm)
    q = pm - p_star
    lam2 = second_eigenvalue_modulus(pm, p_star)
    shift = pm - np.eye(d)

    if np.max(np.abs(q)) < 1e-15:
        zero = SignedLogValue(0)
        return MarkovSequences([zero] * n, [zero] * n, p_star, 0.0)

    i, j = k - 1, ell - 1
    gap_logs: List[Tuple[int, float]] = []   # native log10|gap_m|, signed later
    diff_logs: List[Tuple[int, float]] = []
    gap_vals: List[SignedLogValue] = []
    diff_vals: List[SignedLogValue] = []
    power = q.copy()
    m = 0
    while m < n and np.max(np.abs(power)) > _UNDERFLOW_GUARD:
        m += 1
        g = power[i, j]
        dv = (power @ shift)[i, j]
        gap_vals.append(_slv_of_float(g))
        diff_vals.append(_slv_of_float(dv))
        if g != 0.0:
            gap_logs.append((m, math.log10(abs(g))))
        if dv != 0.0:
            diff_logs.append((m, math.log10(abs(dv))))
        if m < n:
            power = power @ q

    asymptotic_from = None
    fitted_slope = None
    if m < n:
        asymptotic_from = m + 1
        fitted_slope, gap_vals_ext = _extend_log_linear(gap_logs, gap_vals, n, lam2)
        _, diff_vals_ext = _extend_log_linear(diff_logs, diff_vals, n, lam2)
        gap_vals, diff_vals = gap_vals_ext, diff_vals_ext

    return MarkovSequences(
        diff=diff_vals,
        gap=gap_vals,
        p_star=p_star,
        lambda2_modulus=lam2,
        asymptotic_from=asymptotic_from,
        fitted_slope=fitted_slope,
    )


def _slv_of_float(x: float) -> SignedLogValue:
    if x == 0.0:
        return SignedLogValue(0)
    return SignedLogValue(1 if x > 0 else -1, math.log10(abs(x)))


def _extend_log_linear(
    logs: List[Tuple[int, float]],
    vals: List[SignedLogValue],
    n: int,
    lam2: float,
) -> Tuple[float, List[SignedLogValue]]:
    if len(logs) < _FIT_WINDOW:
        raise ValueError(
            "cannot extend past native underflow: fewer than "
            f"{_FIT_WINDOW} valid terms to fit"
        )
    window = logs[-_FIT_WINDOW:]
    idx = np.asarray([w[0] for w in window], dtype=float)
    lg = np.asarray([w[1] for w in window], dtype=float)
    slope, intercept = np.polyfit(idx, lg, 1)
    # sign pattern: with a real dominant lambda_2 the sign is constant or
    # alternating; read the period-2 pattern off the last valid terms
    tail_signs = [v.sign for v in vals[-2:]]
    ratio_sign = 1 if lam2 >= 0 else -1
    if len(tail_signs) == 2 and 0 not in tail_signs:
        ratio_sign = tail_signs[1] * tail_signs[0]
    out = list(vals)
    last_sign = out[-1].sign or 1
    for m in range(len(vals) + 1, n + 1):
        last_sign *= ratio_sign
        y = slope * m + intercept
        out.append(slv_from_log10(last_sign, y))
    return float(slope), out
