"""Desk-scale Lagrangian solver for the pressureless alignment-Poisson flow.

The one-dimensional periodic flow couples continuity and momentum,

    rho_t + (rho u)_x = 0,
    u_t + u u_x = (psi * (rho u) - u psi * rho)(x) + k phi_x,
    phi_xx = rho - c(x, t),

with a bounded communication kernel ``0 < psi_minus <= psi <= psi_plus`` and
a positive background ``c(x, t)`` normalized to carry the same total mass as
the flow (the torus Poisson problem is solvable only with a zero-mean
source).

Along the flow map the quantity ``G = u_x + psi * rho`` obeys

    G' = -G (G - nu) + k (rho - c),       nu = psi * rho,

and the parcel density obeys ``rho' = -rho (G - nu)``, which is exactly the
characteristic system ``w' = k (1 - c s)``, ``s' = w - nu s`` in the
variables ``w = G / rho``, ``s = 1 / rho``.  The solver advances particles
``(X_i, u_i, G_i, rho_i)`` with classical RK4, evaluating the nonlocal terms
with cloud-in-cell deposits, spectral Poisson inversion and direct O(N^2)
pair sums at every stage, and records the per-particle coefficient histories
``c(X_i(t), t)`` and ``nu_i(t)`` so each particle can be replayed through
the characteristic integrator independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dynamics import SimControls, simulate_ws
from .errors import InternalInvariantError
from .params import Params, validate

__all__ = [
    "TWO_PI",
    "ShockFormationError",
    "KernelSpec",
    "BackgroundSpec",
    "InitialData",
    "PDEConfig",
    "Snapshot",
    "PDERun",
    "effective_params",
    "grid_convolution",
    "run_pde",
    "characteristic_consistency",
]

TWO_PI = 2.0 * math.pi


class ShockFormationError(RuntimeError):
    """Adjacent particle trajectories crossed: the flow map folded over."""


# ---------------------------------------------------------------------------
# specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelSpec:
    """A bounded communication kernel on the circle.

    ``constant``: ``psi(d) = psi0``.  ``cosine-bump``:
    ``psi(d) = base + amp (1 + cos d) / 2`` (even, smooth, bounds
    ``[base, base + amp]``).
    """

    kind: str
    psi_kind: int
    psi_par: tuple[float, ...]
    psi_minus: float
    psi_plus: float

    @staticmethod
    def constant(psi0: float) -> "KernelSpec":
        if not psi0 > 0.0:
            raise ValueError("psi0 must be positive")
        return KernelSpec("constant", 0, (float(psi0),), float(psi0), float(psi0))

    @staticmethod
    def cosine_bump(base: float, amp: float) -> "KernelSpec":
        if not base > 0.0:
            raise ValueError("base must be positive")
        if not amp >= 0.0:
            raise ValueError("amp must be nonnegative")
        return KernelSpec("cosine-bump", 1, (float(base), float(amp)),
                          float(base), float(base) + float(amp))

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        d = d - TWO_PI * np.floor(d / TWO_PI + 0.5)
        if self.psi_kind == 0:
            return np.full_like(d, self.psi_par[0])
        base, amp = self.psi_par
        return base + amp * 0.5 * (1.0 + np.cos(d))

    def to_json(self) -> dict:
        return {"kind": self.kind, "psi_par": list(self.psi_par),
                "psi_minus": self.psi_minus, "psi_plus": self.psi_plus}


@dataclass(frozen=True)
class BackgroundSpec:
    """A positive background profile ``c_raw(x, t)`` prior to normalization.

    ``constant``: ``c_raw = level``.  ``standing-wave``:
    ``c_raw = level + amp sin(m x) cos(omega t)`` (spatial mean ``level`` at
    every time).  The solver rescales the profile by
    ``factor(t) = mass / integral(c_raw)`` so the Poisson source is
    zero-mean; the factor is recorded and must stay within
    ``[min_raw / max_raw, max_raw / min_raw]`` of unity-free sanity bounds.
    """

    kind: str
    level: float
    amp: float = 0.0
    wavenumber: int = 1
    omega: float = 0.0

    @staticmethod
    def constant(level: float) -> "BackgroundSpec":
        if not level > 0.0:
            raise ValueError("level must be positive")
        return BackgroundSpec("constant", float(level))

    @staticmethod
    def standing_wave(level: float, amp: float, wavenumber: int = 1,
                      omega: float = 0.0) -> "BackgroundSpec":
        if not level > 0.0:
            raise ValueError("level must be positive")
        if not 0.0 <= amp < level:
            raise ValueError("amp must lie in [0, level) to keep c positive")
        if not (isinstance(wavenumber, int) and wavenumber >= 1):
            raise ValueError("wavenumber must be a positive integer")
        return BackgroundSpec("standing-wave", float(level), float(amp),
                              int(wavenumber), float(omega))

    def raw(self, x, t: float):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full_like(x, self.level)
        return self.level + self.amp * np.sin(self.wavenumber * x) * math.cos(
            self.omega * t)

    def raw_bounds(self) -> tuple[float, float]:
        return self.level - self.amp, self.level + self.amp

    def to_json(self) -> dict:
        return {"kind": self.kind, "level": self.level, "amp": self.amp,
                "wavenumber": self.wavenumber, "omega": self.omega}


@dataclass(frozen=True)
class InitialData:
    """Smooth periodic initial data: a cosine density profile and a
    sinusoidal velocity profile."""

    rho_mean: float = 1.0
    rho_amp: float = 0.0
    rho_phase: float = 0.0
    u_mean: float = 0.0
    u_amp: float = 0.0
    u_phase: float = 0.0

    def __post_init__(self):
        if not self.rho_mean > 0.0:
            raise ValueError("rho_mean must be positive")

    def rho0(self, x):
        x = np.asarray(x, dtype=float)
        return self.rho_mean + self.rho_amp * np.cos(x + self.rho_phase)

    def u0(self, x):
        x = np.asarray(x, dtype=float)
        return self.u_mean + self.u_amp * np.sin(x + self.u_phase)

    def to_json(self) -> dict:
        return {"rho_mean": self.rho_mean, "rho_amp": self.rho_amp,
                "rho_phase": self.rho_phase, "u_mean": self.u_mean,
                "u_amp": self.u_amp, "u_phase": self.u_phase}


@dataclass(frozen=True)
class PDEConfig:
    """Full configuration of one Lagrangian run."""

    k: float
    kernel: KernelSpec
    background: BackgroundSpec
    ic: InitialData
    T: float
    n_particles: int = 512
    n_grid: int | None = None
    cfl: float = 0.1
    snap_dt: float = 0.25
    rho_blow: float = 1e6
    g_blow: float = 1e6
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not self.k > 0.0:
            raise ValueError("k must be positive")
        if not self.T > 0.0:
            raise ValueError("T must be positive")
        if self.n_particles < 2:
            raise ValueError("n_particles must be at least 2")
        if self.n_grid is not None and self.n_grid < 2:
            raise ValueError("n_grid must be at least 2")
        if not 0.0 < self.cfl <= 0.1:
            raise ValueError("cfl must lie in (0, 0.1]")
        if not self.snap_dt > 0.0:
            raise ValueError("snap_dt must be positive")
        if not (self.rho_blow > 1.0 and self.g_blow > 1.0):
            raise ValueError("blowup thresholds must exceed 1")

    @property
    def grid_size(self) -> int:
        # Default: a field grid coarser than the particle lattice, so each
        # cell averages several particles and the deposit noise falls off
        # like (grid size)/(particle count).
        return self.n_grid if self.n_grid is not None else min(
            64, self.n_particles)

    def to_json(self) -> dict:
        return {"k": self.k, "kernel": self.kernel.to_json(),
                "background": self.background.to_json(),
                "ic": self.ic.to_json(), "T": self.T,
                "n_particles": self.n_particles, "n_grid": self.grid_size,
                "cfl": self.cfl, "snap_dt": self.snap_dt,
                "rho_blow": self.rho_blow, "g_blow": self.g_blow,
                "max_steps": self.max_steps}


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Snapshot:
    """Full particle state at one output time."""

    t: float
    x: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    nu: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)

    @property
    def w(self) -> np.ndarray:
        return self.G / self.rho

    @property
    def s(self) -> np.ndarray:
        return 1.0 / self.rho


@dataclass(eq=False)
class PDERun:
    """Outcome, snapshots and monitors of one Lagrangian run."""

    config: PDEConfig
    outcome: str
    t_final: float
    t_star: float | None
    x_star: float | None
    i_star: int | None
    x0_star: float | None
    mass: float
    factor: float
    params: Params
    snapshots: tuple[Snapshot, ...]
    monitors: dict
    n_steps: int
    coeff_t: np.ndarray = field(repr=False)
    coeff_c: np.ndarray = field(repr=False)
    coeff_nu: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {"outcome": self.outcome, "t_final": self.t_final,
                "t_star": self.t_star, "x_star": self.x_star,
                "i_star": self.i_star, "x0_star": self.x0_star,
                "mass": self.mass, "factor": self.factor,
                "params": self.params.to_json(),
                "n_snapshots": len(self.snapshots),
                "n_steps": self.n_steps,
                "monitors": {k: v for k, v in self.monitors.items()}}


# ---------------------------------------------------------------------------
# setup helpers
# ---------------------------------------------------------------------------


def _grid(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def _spectral_dx(values: np.ndarray) -> np.ndarray:
    """Spectral derivative of a periodic grid function."""
    n = values.size
    vh = np.fft.rfft(values)
    kk = np.arange(vh.size)
    return np.fft.irfft(1j * kk * vh, n)


def _mass_and_weights(config: PDEConfig) -> tuple[np.ndarray, float]:
    n = config.n_particles
    xg = _grid(n)
    rho0 = np.asarray(config.ic.rho0(xg), dtype=float)
    if not (rho0 > 0.0).all():
        raise ValueError(
            "initial density must be positive everywhere; vacuum states are"
            " handled by the indicator dynamics (simulate_vacuum_G), not by"
            " the particle solver"
        )
    m = rho0 * (TWO_PI / n)
    return m, float(m.sum())


def _normalization(config: PDEConfig, mass: float, t: float,
                   xg: np.ndarray, factor0: float | None = None) -> float:
    """Mass-matching factor at time ``t``.

    With ``factor0`` given (the initial factor), the ratio must stay within
    the raw profile's oscillation bracket ``[lo/hi, hi/lo]``; a normalization
    drifting outside it would silently change the effective bounds."""
    raw = config.background.raw(xg, t)
    integral = float(raw.sum()) * (TWO_PI / xg.size)
    factor = mass / integral
    if factor0 is not None:
        lo, hi = config.background.raw_bounds()
        if not (lo / hi - 1e-12 <= factor / factor0 <= hi / lo + 1e-12):
            raise InternalInvariantError(
                "background normalization factor left its sanity bracket")
    return factor


def effective_params(config: PDEConfig) -> Params:
    """The characteristic-system parameter bounds realized by a run.

    ``c`` bounds are the extremes of the mass-normalized background field,
    ``nu`` bounds are the kernel bounds times the total mass.
    """
    _, mass = _mass_and_weights(config)
    xg = _grid(config.grid_size)
    factor = _normalization(config, mass, 0.0, xg)
    lo, hi = config.background.raw_bounds()
    c_lo, c_hi = factor * lo, factor * hi
    if config.background.omega != 0.0:
        # time-varying profile: scan a period for the realized extremes
        period = TWO_PI / abs(config.background.omega)
        for t in np.linspace(0.0, period, 33):
            f_t = _normalization(config, mass, float(t), xg)
            vals = f_t * config.background.raw(xg, float(t))
            c_lo = min(c_lo, float(vals.min()))
            c_hi = max(c_hi, float(vals.max()))
    return validate(Params(k=config.k, c_minus=c_lo, c_plus=c_hi,
                           nu_minus=config.kernel.psi_minus * mass,
                           nu_plus=config.kernel.psi_plus * mass))


# ---------------------------------------------------------------------------
# right-hand side
# ---------------------------------------------------------------------------


def _poisson_force(source: np.ndarray) -> np.ndarray:
    """Spectral ``phi_x`` with ``phi_xx = source`` on the periodic grid."""
    n = source.size
    sh = np.fft.rfft(source)
    sh[0] = 0.0
    kk = np.arange(sh.size, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        fh = np.where(kk > 0, sh / (1j * kk), 0.0)
    return np.fft.irfft(fh, n)


def grid_convolution(x, m, n_grid: int, kernel: KernelSpec,
                     backend: str | None = None) -> np.ndarray:
    """Grid-based alignment convolution evaluated back at the particles.

    Deposits the particle masses on a uniform ``n_grid`` grid, convolves
    with the kernel by FFT and gathers the result at the particle
    positions.  A cross-check for the direct pair sums at desk scale; the
    two agree to the deposit error on smooth states.
    """
    xa = np.asarray(x, dtype=float)
    rho_grid = _kernels.cic_deposit(xa, np.asarray(m, dtype=float), n_grid,
                                    backend=backend)
    psi_samples = np.asarray(kernel(_grid(n_grid)), dtype=float)
    conv_grid = np.fft.irfft(np.fft.rfft(rho_grid) *
                             np.fft.rfft(psi_samples), n_grid) * (
                                 TWO_PI / n_grid)
    return _kernels.cic_gather(conv_grid, xa, backend=backend)


def _rhs(t: float, x: np.ndarray, u: np.ndarray, G: np.ndarray,
         rho_p: np.ndarray, m: np.ndarray, mass: float, config: PDEConfig,
         xg: np.ndarray, backend: str | None, factor0: float | None = None):
    """Stage evaluation: all nonlocal terms recomputed from scratch."""
    conv, align = _kernels.alignment_sums(x, u, m, config.kernel.psi_kind,
                                          np.asarray(config.kernel.psi_par),
                                          backend=backend)
    rho_grid = _kernels.cic_deposit(x, m, xg.size, backend=backend)
    factor = _normalization(config, mass, t, xg, factor0)
    c_grid = factor * config.background.raw(xg, t)
    source = rho_grid - c_grid
    source = source - source.mean()
    force = _poisson_force(source)
    f_part = _kernels.cic_gather(force, x, backend=backend)
    c_part = factor * config.background.raw(x, t)
    dx = u
    du = align + config.k * f_part
    dG = -G * (G - conv) + config.k * (rho_p - c_part)
    drho = -rho_p * (G - conv)
    return dx, du, dG, drho, conv, c_part, factor


# ---------------------------------------------------------------------------
# the run
# ---------------------------------------------------------------------------


def run_pde(config: PDEConfig, backend: str | None = None) -> PDERun:
    """Advance one Lagrangian run to its end time or its blowup.

    Returns a :class:`PDERun` with outcome ``"Smooth"`` (reached ``T``) or
    ``"Blowup"`` (a parcel density rose above ``rho_blow`` or a slope
    indicator dropped below ``-g_blow``; the
    time step is refined tenfold once the density passes one percent of the
    threshold, and the crossing time and position are reported).

    Raises
    ------
    ValueError
        On nonpositive initial density.
    ShockFormationError
        If adjacent particle trajectories cross (the run is then past the
        singularity at the resolved scale).
    RuntimeError
        If the step budget is exhausted.
    """
    n = config.n_particles
    xg = _grid(config.grid_size)
    m, mass = _mass_and_weights(config)
    x = _grid(n).copy()
    u = np.asarray(config.ic.u0(x), dtype=float)
    du0 = _spectral_dx(np.asarray(config.ic.u0(_grid(n)), dtype=float))
    conv0, _ = _kernels.alignment_sums(x, u, m, config.kernel.psi_kind,
                                       np.asarray(config.kernel.psi_par),
                                       backend=backend)
    G = du0 + conv0
    rho_p = np.asarray(config.ic.rho0(x), dtype=float)

    params = effective_params(config)
    nu_cap = params.nu_plus
    t = 0.0
    n_steps = 0
    refined = False
    momentum0 = float((m * u).sum())

    snap_times = list(np.arange(0.0, config.T, config.snap_dt)[1:]) + [config.T]
    snapshots: list[Snapshot] = []
    coeff_t: list[float] = []
    coeff_c: list[np.ndarray] = []
    coeff_nu: list[np.ndarray] = []
    monitors: dict = {"momentum_drift": 0.0, "mass_defect": 0.0,
                      "g_residual": 0.0, "density_consistency": 0.0,
                      "min_rho": float(rho_p.min()),
                      "max_rho": float(rho_p.max())}

    def record_coeffs(tv, c_part, conv):
        coeff_t.append(tv)
        coeff_c.append(np.array(c_part))
        coeff_nu.append(np.array(conv))

    def snapshot(tv, conv, c_part):
        snapshots.append(Snapshot(tv, x.copy(), u.copy(), G.copy(),
                                  rho_p.copy(), np.array(conv),
                                  np.array(c_part)))

    def grid_monitors(conv, c_part):
        rho_grid = _kernels.cic_deposit(x, m, xg.size, backend=backend)
        monitors["mass_defect"] = max(monitors["mass_defect"],
                                      abs(rho_grid.sum() * TWO_PI / xg.size
                                          - mass) / mass)
        mom = float((m * u).sum())
        monitors["momentum_drift"] = max(monitors["momentum_drift"],
                                         abs(mom - momentum0))
        x_next = np.roll(x, -1)
        x_next[-1] += TWO_PI
        x_prev = np.roll(x, 1)
        x_prev[0] -= TWO_PI
        dxu = (np.roll(u, -1) - np.roll(u, 1)) / (x_next - x_prev)
        monitors["g_residual"] = max(monitors["g_residual"],
                                     float(np.max(np.abs(G - (dxu + conv)))))
        rho_diag = _kernels.cic_gather(rho_grid, x, backend=backend)
        monitors["density_consistency"] = max(
            monitors["density_consistency"],
            float(np.max(np.abs(rho_diag - rho_p)) / rho_p.max()))

    cur = _rhs(t, x, u, G, rho_p, m, mass, config, xg, backend)
    factor0 = cur[6]
    conv, c_part, factor = cur[4], cur[5], cur[6]
    record_coeffs(t, c_part, conv)
    snapshot(0.0, conv, c_part)
    grid_monitors(conv, c_part)

    outcome = "Smooth"
    t_star: float | None = None
    x_star: float | None = None
    i_star: int | None = None
    x0_star: float | None = None
    snap_idx = 0

    while t < config.T - 1e-14:
        if n_steps >= config.max_steps:
            raise RuntimeError("step budget exhausted before the end time; "
                               "raise max_steps or shorten T")
        rate = float(np.max(np.abs(G)) + nu_cap)
        dt = config.cfl / rate
        if refined:
            dt *= 0.1
        dt = min(dt, snap_times[snap_idx] - t, config.T - t)
        dt = max(dt, 1e-15)

        # classical RK4; the post-step evaluation doubles as the next k1
        k1 = cur
        k2 = _rhs(t + 0.5 * dt, x + 0.5 * dt * k1[0], u + 0.5 * dt * k1[1],
                  G + 0.5 * dt * k1[2], rho_p + 0.5 * dt * k1[3],
                  m, mass, config, xg, backend, factor0)
        k3 = _rhs(t + 0.5 * dt, x + 0.5 * dt * k2[0], u + 0.5 * dt * k2[1],
                  G + 0.5 * dt * k2[2], rho_p + 0.5 * dt * k2[3],
                  m, mass, config, xg, backend, factor0)
        k4 = _rhs(t + dt, x + dt * k3[0], u + dt * k3[1], G + dt * k3[2],
                  rho_p + dt * k3[3], m, mass, config, xg, backend, factor0)
        x = x + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        u = u + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        G = G + (dt / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        rho_p = rho_p + (dt / 6.0) * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        t += dt
        n_steps += 1

        gaps = np.diff(np.concatenate([x, [x[0] + TWO_PI]]))
        if not (gaps > 0.0).all():
            raise ShockFormationError(
                f"adjacent particle trajectories crossed at t={t:.6g}")
        if not np.isfinite(rho_p).all() or not np.isfinite(G).all():
            raise InternalInvariantError("non-finite particle state; the "
                                         "blowup guard failed to trigger")

        cur = _rhs(t, x, u, G, rho_p, m, mass, config, xg, backend, factor0)
        conv, c_part, factor = cur[4], cur[5], cur[6]
        record_coeffs(t, c_part, conv)
        monitors["min_rho"] = min(monitors["min_rho"], float(rho_p.min()))
        monitors["max_rho"] = max(monitors["max_rho"], float(rho_p.max()))

        if not refined and float(rho_p.max()) > 0.01 * config.rho_blow:
            refined = True
        if (float(rho_p.max()) >= config.rho_blow
                or float(G.min()) <= -config.g_blow):
            outcome = "Blowup"
            by_rho = float(rho_p.max()) >= config.rho_blow
            i_star = int(np.argmax(rho_p) if by_rho else np.argmin(G))
            t_star = t
            x_star = float(np.mod(x[i_star], TWO_PI))
            x0_star = TWO_PI * i_star / n
            snapshot(t, conv, c_part)
            break

        if t >= snap_times[snap_idx] - 1e-12:
            snapshot(t, conv, c_part)
            grid_monitors(conv, c_part)
            snap_idx = min(snap_idx + 1, len(snap_times) - 1)

    return PDERun(config=config, outcome=outcome,
                  t_final=t, t_star=t_star, x_star=x_star,
                  i_star=i_star, x0_star=x0_star, mass=mass,
                  factor=factor, params=params,
                  snapshots=tuple(snapshots), monitors=monitors,
                  n_steps=n_steps,
                  coeff_t=np.asarray(coeff_t),
                  coeff_c=np.vstack(coeff_c),
                  coeff_nu=np.vstack(coeff_nu))


# ---------------------------------------------------------------------------
# characteristic replay
# ---------------------------------------------------------------------------


def characteristic_consistency(run: PDERun, indices=None,
                               t_until: float | None = None) -> dict:
    """Replay particles through the characteristic integrator and compare.

    Each selected particle's recorded coefficient history
    ``(c(X_i(t), t), nu_i(t))`` becomes a callable path for
    :func:`ctepa.dynamics.simulate_ws`; the replayed ``(w, s)`` is compared
    against the particle's own ``(G / rho, 1 / rho)`` at every snapshot time
    up to ``t_until``.  Returns the worst absolute deviations.
    """
    from scipy.interpolate import CubicSpline

    p = run.params
    if indices is None:
        indices = range(run.snapshots[0].x.size)
    indices = list(indices)
    t_cap = run.t_final if t_until is None else min(t_until, run.t_final)
    snaps = [sn for sn in run.snapshots if sn.t <= t_cap + 1e-12]
    if len(snaps) < 2:
        raise ValueError("need at least two snapshots up to t_until")
    t_nodes = run.coeff_t
    max_dw = max_ds = 0.0
    controls = SimControls(max_dt=0.25)
    for i in indices:
        ci = CubicSpline(t_nodes, run.coeff_c[:, i])
        ni = CubicSpline(t_nodes, run.coeff_nu[:, i])

        def coeffs(tt, _ci=ci, _ni=ni):
            return float(_ci(tt)), float(_ni(tt))

        w0 = float(snaps[0].G[i] / snaps[0].rho[i])
        s0 = float(1.0 / snaps[0].rho[i])
        t_end = snaps[-1].t
        traj = simulate_ws(p, coeffs, w0, s0, t_end, controls=controls)
        for sn in snaps[1:]:
            if traj.status == "blowup" and sn.t > traj.t[-1]:
                break
            wv, sv = traj.sample(sn.t)
            max_dw = max(max_dw, abs(float(wv) - float(sn.G[i] / sn.rho[i])))
            max_ds = max(max_ds, abs(float(sv) - 1.0 / float(sn.rho[i])))
    return {"max_dw": max_dw, "max_ds": max_ds,
            "n_particles": len(indices), "t_compare": snaps[-1].t}
