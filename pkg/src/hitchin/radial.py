"""Rotationally symmetric solutions for H = z and H = z^2.

The unknown is psi(r) on a uniform grid over [0, R].  With mu_+ = z^n,
mu_- = -1 and alpha = i B / M_- the field equation reads

    psi'' + psi'/r = 2 (1 + 4 B^2 / M_-^2) (r^{2n} e^psi - e^-psi),
    M_- = r^n e^{psi/2} + e^{-psi/2},

with psi'(0) = 0 and psi(R) = -n log R.  B must vanish for n = 1.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import solve_banded

from .errors import ConvergenceError, PreconditionError

log = logging.getLogger(__name__)


@dataclass
class RadialProfile:
    n: int
    B: float
    r: np.ndarray
    psi: np.ndarray
    converged: bool = False
    residual_sup: float = float("nan")
    newton_iters: int = 0
    history: list = field(default_factory=list)

    @property
    def R(self) -> float:
        return float(self.r[-1])

    @property
    def dpsi_dr(self) -> np.ndarray:
        return np.gradient(self.psi, self.r, edge_order=2)

    @property
    def absF(self) -> np.ndarray:
        return 0.5 * np.abs(self.r ** (2 * self.n) * np.exp(self.psi) - np.exp(-self.psi))


def _rhs(r, psi, n, B):
    """Right-hand side f and its psi-derivative."""
    rn = r**n
    ep = np.exp(psi / 2)
    em = 1.0 / ep
    s = rn * rn * ep * ep - em * em
    ds = rn * rn * ep * ep + em * em
    if B == 0:
        return 2 * s, 2 * ds
    M = rn * ep + em
    dM = 0.5 * (rn * ep - em)
    g = 1 + 4 * B * B / (M * M)
    dg = -8 * B * B * dM / M**3
    return 2 * g * s, 2 * (g * ds + dg * s)


def _residual(r, psi, n, B, h):
    f, _ = _rhs(r, psi, n, B)
    res = np.empty_like(psi)
    res[0] = 4 * (psi[1] - psi[0]) / h**2 - f[0]
    ri = r[1:-1]
    res[1:-1] = (
        (psi[2:] - 2 * psi[1:-1] + psi[:-2]) / h**2
        + (psi[2:] - psi[:-2]) / (2 * h * ri)
        - f[1:-1]
    )
    res[-1] = 0.0
    return res


def _scaled_sup(r, res, n):
    # weight by the size of the nonlinear term so the far field is not favoured
    return float(np.max(np.abs(res) / (1 + r**n)))


def _jacobian_bands(r, psi, n, B, h):
    """Tridiagonal Jacobian of the residual on the unknowns psi[0:-1]."""
    _, df = _rhs(r, psi, n, B)
    m = len(psi) - 1
    ab = np.zeros((3, m))
    # diagonal
    ab[1, 0] = -4 / h**2 - df[0]
    ab[1, 1:] = -2 / h**2 - df[1:m]
    # super-diagonal: d res_i / d psi_{i+1}, stored at ab[0, i+1]
    ab[0, 1] = 4 / h**2
    ri = r[1:m]
    sup = 1 / h**2 + 1 / (2 * h * ri)
    ab[0, 2:] = sup[:-1]
    # sub-diagonal: d res_i / d psi_{i-1}, stored at ab[2, i-1]
    ab[2, : m - 1] = 1 / h**2 - 1 / (2 * h * ri)
    return ab


def solve_radial(
    n: int,
    B: float = 0.0,
    R: float = 20.0,
    num_points: int = 2000,
    initial: np.ndarray | None = None,
    tol: float = 1e-10,
    max_iter: int = 60,
) -> RadialProfile:
    """Damped Newton on the collocation equations.

    ``initial`` is an optional psi on the same grid (continuation seed).
    Raises ConvergenceError carrying the last residual on failure.
    """
    if n not in (1, 2):
        raise PreconditionError(f"radial solver handles n in {{1, 2}}, got {n}")
    if B < 0:
        raise PreconditionError("B must be >= 0 (negative B is gauge equivalent)")
    if n == 1 and B != 0:
        raise PreconditionError("odd n forces Gamma-invariance: B must be 0 for n = 1")
    if R < 10:
        raise PreconditionError(f"R must be >= 10, got {R}")
    if num_points < 400:
        raise PreconditionError(f"num_points must be >= 400, got {num_points}")

    r = np.linspace(0.0, R, num_points)
    h = r[1] - r[0]
    if initial is None:
        psi = -n * 0.5 * np.log(r**2 + 1)
    else:
        psi = np.array(initial, dtype=float)
        if psi.shape != r.shape:
            raise PreconditionError("initial guess does not match the grid")
    psi[-1] = -n * math.log(R)

    res = _residual(r, psi, n, B, h)
    rs = _scaled_sup(r, res, n)
    history = [rs]
    it = 0
    while rs > tol:
        if it >= max_iter:
            raise ConvergenceError(
                f"radial Newton did not converge (n={n}, B={B}); residual {rs:.3e}",
                rs,
                history,
                context={"B": B},
            )
        it += 1
        ab = _jacobian_bands(r, psi, n, B, h)
        step = solve_banded((1, 1), ab, -res[:-1])
        lam = 1.0
        for _ in range(31):
            trial = psi.copy()
            trial[:-1] += lam * step
            tres = _residual(r, trial, n, B, h)
            trs = _scaled_sup(r, tres, n)
            if np.isfinite(trs) and trs < rs:
                break
            lam *= 0.5
        else:
            raise ConvergenceError(
                f"radial Newton line search failed (n={n}, B={B}); residual {rs:.3e}",
                rs,
                history,
                context={"B": B},
            )
        psi, res, rs = trial, tres, trs
        history.append(rs)
        log.debug("radial n=%d B=%g iter %d residual %.3e (step %.3g)", n, B, it, rs, lam)
    return RadialProfile(n, float(B), r, psi, True, rs, it, history)


def flux(profile: RadialProfile) -> float:
    """2 pi int_0^R |F| r dr by composite Simpson."""
    if not profile.converged:
        raise PreconditionError("refusing to integrate a non-converged profile")
    return float(2 * np.pi * simpson(profile.absF * profile.r, x=profile.r))


def painleve_residual(profile: RadialProfile, t_min: float = 0.5, t_max_frac: float = 0.98):
    """Painleve-III residual of h(t) = e^{-psi/2} t^{-1/3}, t = r^{3/2}.

    Derivatives in t come from second-order differences in r and the chain
    rule.  Returns (sup residual over t_min <= t <= t_max_frac * R^{3/2},
    |h(t_max) - 1|).
    """
    if profile.n != 1 or not profile.converged:
        raise PreconditionError("Painleve check needs a converged n = 1 profile")
    r, psi = profile.r, profile.psi
    dr = r[1] - r[0]
    h = np.empty_like(psi)
    h[1:] = np.exp(-psi[1:] / 2) / np.sqrt(r[1:])
    h[0] = np.nan
    i = np.arange(2, len(r) - 1)
    ri = r[i]
    h_r = (h[i + 1] - h[i - 1]) / (2 * dr)
    h_rr = (h[i + 1] - 2 * h[i] + h[i - 1]) / dr**2
    t = ri**1.5
    t_r = 1.5 * np.sqrt(ri)
    t_rr = 0.75 / np.sqrt(ri)
    h_t = h_r / t_r
    h_tt = (h_rr - h_t * t_rr) / t_r**2
    hi = h[i]
    res = h_tt - h_t**2 / hi + h_t / t + 4 / (9 * hi) - 4 * hi**3 / 9
    mask = (t >= t_min) & (t <= t_max_frac * r[-1] ** 1.5)
    return float(np.max(np.abs(res[mask]))), float(abs(h[-1] - 1.0))


def _solve_flux(args):
    B, R, num_points = args
    prof = solve_radial(2, B, R, num_points)
    return B, flux(prof) / math.pi


def scan_B(
    B_values,
    R: float = 20.0,
    num_points: int = 2000,
    continuation: bool = True,
    jobs: int = 1,
) -> list[tuple[float, float]]:
    """Flux curve (B, pi^-1 int |F|) for the n = 2 family.

    With ``continuation`` each solve starts from the previous psi and runs
    sequentially; otherwise solves are independent and may use ``jobs``
    worker processes.
    """
    B_values = [float(b) for b in B_values]
    if not B_values or B_values[0] != 0 or any(b2 <= b1 for b1, b2 in zip(B_values, B_values[1:])):
        raise PreconditionError("B_values must be strictly ascending and start at 0")
    if not continuation:
        if jobs > 1:
            with ProcessPoolExecutor(jobs) as ex:
                return list(ex.map(_solve_flux, [(b, R, num_points) for b in B_values]))
        return [_solve_flux((b, R, num_points)) for b in B_values]
    out = []
    seed = None
    for b in B_values:
        try:
            prof = solve_radial(2, b, R, num_points, initial=seed)
        except ConvergenceError as exc:
            exc.context = {"B": b}
            raise
        seed = prof.psi
        out.append((b, flux(prof) / math.pi))
    return out
