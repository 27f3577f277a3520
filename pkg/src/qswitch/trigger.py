"""Oscillator clock that flips the agent's internal state at quarter period.

A coherent wavepacket of a 1D harmonic oscillator is released at rest from
displacement +A and couples to the two-level subspace {ready-off, ready-on}
only inside the interaction zone x in [0, delta], through a constant
sigma_x term of strength v0.  Released far from the zone (A >> delta) with
a packet much narrower than the zone (delta >> sigma), it crosses the zone
around quarter period at speed ~ omega*A, accumulating a sigma_x rotation
of v0*delta/(hbar*omega*A).  Choosing A = 2*delta*v0/(pi*hbar*omega) makes
that angle exactly pi/2: the internal state is fully transferred when the
packet exits the zone at tau_star = T/4.

Two independent routes are provided: the piecewise closed form valid in
the perfect-transmission limit, and a split-step Fourier integration of
the two decoupled sigma_x eigenchannels (barrier for |+>, well for |->).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .spacetime import HBAR

#: default "much greater than" factor for the parameter hierarchy
VALIDITY_THRESHOLD = 10.0

#: default trigger-condition fidelity thresholds (ready-state, fired-state)
READY_THRESHOLD = 0.99
FIRED_THRESHOLD = 0.95


@dataclass(frozen=True)
class TriggerParams:
    """Oscillator and interaction-zone parameters (SI unless hbar says otherwise).

    amplitude is normally derived from the pi/2 relation
    A = 2*delta*v0/(pi*hbar*omega); passing it explicitly decouples the
    release displacement from the coupling (used e.g. for the free-motion
    check with v0 = 0, where the derived amplitude would vanish).
    """

    m: float
    omega: float
    delta: float
    v0: float
    hbar: float = HBAR
    amplitude: float | None = None

    def __post_init__(self):
        if self.m <= 0 or self.omega <= 0 or self.delta <= 0:
            raise ValueError("require m > 0, omega > 0, delta > 0")
        if self.v0 < 0:
            raise ValueError(f"require v0 >= 0, got {self.v0}")
        if self.hbar <= 0:
            raise ValueError(f"require hbar > 0, got {self.hbar}")
        if self.amplitude is None and self.v0 == 0.0:
            raise ValueError("v0 = 0 requires an explicit amplitude")
        if self.amplitude is not None and self.amplitude <= 0:
            raise ValueError(f"require amplitude > 0, got {self.amplitude}")

    @property
    def period(self):
        return 2.0 * math.pi / self.omega

    @property
    def tau_star(self):
        """Firing time: quarter period."""
        return 0.25 * self.period

    @property
    def sigma(self):
        """Ground-state packet width sqrt(hbar / m omega)."""
        return math.sqrt(self.hbar / (self.m * self.omega))

    @property
    def amp(self):
        """Release displacement; derived as 2*delta*v0/(pi*hbar*omega) by default."""
        if self.amplitude is not None:
            return self.amplitude
        return 2.0 * self.delta * self.v0 / (math.pi * self.hbar * self.omega)

    @property
    def alpha0(self):
        """Initial coherent-state parameter A / (sqrt(2) sigma)."""
        return self.amp / (math.sqrt(2.0) * self.sigma)

    @property
    def speed(self):
        """Packet speed near the zone, omega * A."""
        return self.omega * self.amp

    @property
    def epsilon(self):
        """Zone crossing time delta / (omega A)."""
        return self.delta / self.speed

    @property
    def rotation_angle(self):
        """Accumulated sigma_x angle v0 * epsilon / hbar."""
        return self.v0 * self.epsilon / self.hbar

    @property
    def kinetic_energy(self):
        """m v^2 / 2 at zone entry."""
        return 0.5 * self.m * self.speed**2

    def validity_factors(self):
        """(A/delta, delta/sigma, E_kin/v0); each should be >> 1."""
        energy = self.kinetic_energy / self.v0 if self.v0 > 0 else math.inf
        return (self.amp / self.delta, self.delta / self.sigma, energy)

    def validity_failures(self, threshold=VALIDITY_THRESHOLD):
        names = ("amplitude/zone-width", "zone-width/packet-width",
                 "kinetic-energy/barrier")
        return [
            f"{name} factor {value:.3g} below threshold {threshold:g}"
            for name, value in zip(names, self.validity_factors())
            if value < threshold
        ]


def rotation_angle(params):
    """sigma_x rotation v0*delta/(hbar*omega*A); pi/2 for the derived amplitude."""
    return params.rotation_angle


@dataclass(frozen=True)
class TriggerState:
    """Snapshot of the clock+internal system at proper time tau.

    Analytic snapshots carry the coherent parameter alpha and a pure
    internal 2-vector (ready-off, ready-on); numeric snapshots carry the
    two sigma_x channel wavefunctions on the grid instead.
    """

    tau: float
    internal: np.ndarray | None = None
    alpha: complex | None = None
    packet_width: float | None = None
    hbar: float | None = None
    x: np.ndarray | None = None
    psi_plus: np.ndarray | None = None
    psi_minus: np.ndarray | None = None
    dx: float | None = None

    @property
    def p_off(self):
        """Population of the not-yet-fired internal state."""
        if self.internal is not None:
            return float(abs(self.internal[0]) ** 2)
        off = (self.psi_plus + self.psi_minus) / math.sqrt(2.0)
        return float(np.sum(np.abs(off) ** 2) * self.dx)

    @property
    def p_on(self):
        """Population of the fired internal state."""
        if self.internal is not None:
            return float(abs(self.internal[1]) ** 2)
        on = (self.psi_plus - self.psi_minus) / math.sqrt(2.0)
        return float(np.sum(np.abs(on) ** 2) * self.dx)

    @property
    def norm(self):
        if self.internal is not None:
            return float(np.linalg.norm(self.internal))
        total = np.sum((np.abs(self.psi_plus) ** 2 + np.abs(self.psi_minus) ** 2))
        return math.sqrt(float(total) * self.dx)

    @property
    def x_mean(self):
        """Oscillator position expectation."""
        if self.alpha is not None:
            return math.sqrt(2.0) * self.packet_width * self.alpha.real
        density = np.abs(self.psi_plus) ** 2 + np.abs(self.psi_minus) ** 2
        total = float(np.sum(density) * self.dx)
        return float(np.sum(self.x * density) * self.dx / total)

    @property
    def p_mean(self):
        """Oscillator momentum expectation."""
        if self.alpha is not None:
            return math.sqrt(2.0) * self.hbar / self.packet_width * self.alpha.imag
        k = 2.0 * math.pi * scipy.fft.fftfreq(len(self.x), d=self.dx)
        weight = 0.0
        total = 0.0
        for psi in (self.psi_plus, self.psi_minus):
            spectrum = np.abs(scipy.fft.fft(psi)) ** 2
            weight += float(np.sum(k * spectrum))
            total += float(np.sum(spectrum))
        return self.hbar * weight / total


def analytic_evolve(params, tau):
    """Closed-form state under perfect transmission, for 0 <= tau <= tau_star.

    Free coherent motion until the packet reaches the zone at
    tau_star - epsilon, then a uniform sigma_x rotation while it crosses;
    at tau_star the internal state is fully fired (up to the -i phase of
    exp(-i sigma_x pi/2)).
    """
    tau_star = params.tau_star
    if tau < 0 or tau > tau_star * (1 + 1e-12):
        raise ValueError(f"tau={tau:g} outside [0, tau_star={tau_star:g}]")
    alpha = params.alpha0 * np.exp(-1j * params.omega * tau)
    entry = tau_star - params.epsilon
    if tau < entry:
        internal = np.array([1.0, 0.0], dtype=complex)
    else:
        phi = params.v0 * (tau - entry) / params.hbar
        internal = np.array([math.cos(phi), -1j * math.sin(phi)], dtype=complex)
    return TriggerState(
        tau=tau,
        internal=internal,
        alpha=complex(alpha),
        packet_width=params.sigma,
        hbar=params.hbar,
    )


def reflection_bound(params):
    """Plane-wave estimate of one-edge reflection at the potential step.

    ((k - k')/(k + k'))^2 with  hbar k = m v  and
    hbar k' = sqrt(2 m (E - v0)); quantifies the error of the
    perfect-transmission approximation.  Returns 1.0 when the packet
    energy does not clear the barrier (invalid regime, also surfaced by
    validity_failures()).
    """
    energy = params.kinetic_energy
    if energy <= params.v0:
        return 1.0
    k = params.m * params.speed / params.hbar
    k_prime = math.sqrt(2.0 * params.m * (energy - params.v0)) / params.hbar
    return ((k - k_prime) / (k + k_prime)) ** 2


@dataclass(frozen=True)
class GridSpec:
    """Spatial grid and step ceiling for the split-step integration."""

    x_min: float
    x_max: float
    n_points: int
    dt_max: float

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n_points


def _fft_friendly(n):
    """Smallest integer of the form 2^a * 5^b (b <= 4) >= n; fast FFT length."""
    best = 1 << (n - 1).bit_length()
    for b in range(5):
        p2 = 5**b
        while p2 < n:
            p2 *= 2
        best = min(best, p2)
    return best


def _max_wavenumber(params):
    """Momentum content the grid must hold: carrier m omega A / hbar
    plus a few packet widths of spread."""
    return params.m * params.omega * params.amp / params.hbar + 6.0 / params.sigma


def default_grid(params, points_per_sigma=8.0, steps_per_scale=200.0):
    """Grid covering [-1.5A, 1.5A] that resolves both width and momentum.

    The spacing is the stricter of sigma/points_per_sigma (packet width)
    and pi/k_max (the coherent carrier wavenumber m omega A / hbar, which
    dominates whenever A >> sigma).  The point count is rounded up to a
    5-smooth FFT length.  The time-step ceiling resolves both the
    oscillator period and the coupling scale:
    dt <= min(2 pi/omega, pi hbar/v0) / steps_per_scale.
    """
    span = 3.0 * params.amp
    dx_req = min(params.sigma / points_per_sigma, math.pi / _max_wavenumber(params))
    n_points = _fft_friendly(max(256, int(math.ceil(span / dx_req))))
    scale = params.period
    if params.v0 > 0:
        scale = min(scale, math.pi * params.hbar / params.v0)
    return GridSpec(
        x_min=-1.5 * params.amp,
        x_max=1.5 * params.amp,
        n_points=n_points,
        dt_max=scale / steps_per_scale,
    )


def _validate_grid(params, grid):
    if grid.x_min > -1.5 * params.amp or grid.x_max < 1.5 * params.amp:
        raise ValueError(
            f"grid [{grid.x_min:g}, {grid.x_max:g}] does not cover "
            f"[-1.5A, 1.5A] = [{-1.5 * params.amp:g}, {1.5 * params.amp:g}]"
        )
    if grid.dx > params.sigma / 8.0 * (1 + 1e-12):
        raise ValueError(
            f"grid spacing {grid.dx:g} exceeds sigma/8 = {params.sigma / 8.0:g}"
        )
    k_nyquist = math.pi / grid.dx
    k_needed = _max_wavenumber(params)
    if k_nyquist < k_needed * (1 - 1e-12):
        raise ValueError(
            f"grid spacing {grid.dx:g} cannot represent the packet momentum: "
            f"Nyquist {k_nyquist:g} < required {k_needed:g} rad/m"
        )
    scale = params.period
    if params.v0 > 0:
        scale = min(scale, math.pi * params.hbar / params.v0)
    if grid.dt_max > scale / 200.0 * (1 + 1e-12):
        raise ValueError(
            f"time step {grid.dt_max:g} does not resolve the fastest scale "
            f"{scale:g}/200"
        )


@dataclass
class TriggerTrajectory:
    """Sampled observables of a numeric run, plus the final channel state."""

    params: TriggerParams
    grid: GridSpec
    taus: np.ndarray
    x_mean: np.ndarray
    p_mean: np.ndarray
    p_off: np.ndarray
    p_on: np.ndarray
    norm: np.ndarray
    final: TriggerState

    def at(self, tau):
        """Sampled values at the stored time closest to tau."""
        i = int(np.argmin(np.abs(self.taus - tau)))
        return {
            "tau": float(self.taus[i]),
            "x_mean": float(self.x_mean[i]),
            "p_mean": float(self.p_mean[i]),
            "p_off": float(self.p_off[i]),
            "p_on": float(self.p_on[i]),
            "norm": float(self.norm[i]),
        }


def numeric_evolve(params, grid=None, tau_end=None, sample_times=(), n_samples=200):
    """Integrate the two sigma_x channels with Strang-split Fourier steps.

    The |+> channel sees the harmonic potential plus the zone barrier, the
    |-> channel sees the zone well; both evolve independently and are
    recombined into internal-state populations.  Splitting is unitary, so
    the norm is conserved to FFT roundoff.  `sample_times` are landed on
    exactly (the step is shortened as needed); n_samples regular samples
    cover [0, tau_end] in addition.
    """
    if tau_end is None:
        tau_end = params.tau_star
    if tau_end <= 0:
        raise ValueError(f"require tau_end > 0, got {tau_end}")
    if grid is None:
        grid = default_grid(params)
    _validate_grid(params, grid)

    n = grid.n_points
    dx = grid.dx
    x = grid.x_min + dx * np.arange(n)
    k = 2.0 * math.pi * scipy.fft.fftfreq(n, d=dx)
    harmonic = 0.5 * params.m * params.omega**2 * x**2
    zone = params.v0 * ((x >= 0.0) & (x <= params.delta))
    v_plus = harmonic + zone
    v_minus = harmonic - zone
    kinetic = params.hbar * k**2 / (2.0 * params.m)

    packet = np.exp(-((x - params.amp) ** 2) / (2.0 * params.sigma**2))
    packet = packet / math.sqrt(float(np.sum(np.abs(packet) ** 2)) * dx)
    psi = {"+": packet.astype(complex) / math.sqrt(2.0),
           "-": packet.astype(complex) / math.sqrt(2.0)}

    events = {0.0, float(tau_end)}
    events.update(float(t) for t in sample_times)
    if n_samples:
        events.update(
            tau_end * i / n_samples for i in range(n_samples + 1)
        )
    events = sorted(t for t in events if 0.0 <= t <= tau_end)

    taus, x_means, p_means, p_offs, p_ons, norms = [], [], [], [], [], []

    def record(tau):
        state = TriggerState(
            tau=tau, hbar=params.hbar, x=x,
            psi_plus=psi["+"], psi_minus=psi["-"], dx=dx,
        )
        taus.append(tau)
        x_means.append(state.x_mean)
        p_means.append(state.p_mean)
        p_offs.append(state.p_off)
        p_ons.append(state.p_on)
        norms.append(state.norm)

    record(0.0)
    now = 0.0
    for target in events:
        if target <= now:
            continue
        span = target - now
        steps = max(1, int(math.ceil(span / grid.dt_max)))
        dt = span / steps
        half = {s: np.exp(-0.5j * v * dt / params.hbar)
                for s, v in (("+", v_plus), ("-", v_minus))}
        full = {s: h * h for s, h in half.items()}
        kick = np.exp(-1j * kinetic * dt)
        for s in ("+", "-"):
            # merged Strang sweep: half V, (kick, full V)*(steps-1), kick, half V;
            # the first product allocates so recorded snapshots stay intact
            work = half[s] * psi[s]
            for i in range(steps):
                work = scipy.fft.fft(work, overwrite_x=True, workers=2)
                work *= kick
                work = scipy.fft.ifft(work, overwrite_x=True, workers=2)
                work *= full[s] if i < steps - 1 else half[s]
            psi[s] = work
        now = target
        record(now)

    final = TriggerState(
        tau=now, hbar=params.hbar, x=x, psi_plus=psi["+"], psi_minus=psi["-"], dx=dx
    )
    return TriggerTrajectory(
        params=params,
        grid=grid,
        taus=np.asarray(taus),
        x_mean=np.asarray(x_means),
        p_mean=np.asarray(p_means),
        p_off=np.asarray(p_offs),
        p_on=np.asarray(p_ons),
        norm=np.asarray(norms),
        final=final,
    )


@dataclass(frozen=True)
class TriggerConditionReport:
    """Both clauses of the firing condition, with diagnostics."""

    mode: str
    p_ready_before: float   # not-fired population at tau_star - 2 epsilon
    p_fired_at_star: float  # fired population at tau_star
    epsilon: float
    rotation: float
    reflection: float
    norm_drift: float
    ready_threshold: float
    fired_threshold: float
    validity_failures: tuple = field(default_factory=tuple)

    @property
    def passed(self):
        return (
            not self.validity_failures
            and self.p_ready_before >= self.ready_threshold
            and self.p_fired_at_star >= self.fired_threshold
        )


def check_trigger_condition(
    params,
    mode="analytic",
    ready_threshold=READY_THRESHOLD,
    fired_threshold=FIRED_THRESHOLD,
    validity_threshold=VALIDITY_THRESHOLD,
    grid=None,
):
    """Evaluate the two firing clauses: armed until just before, fired at tau_star.

    The "before" sample is taken at tau_star - 2 epsilon (one crossing time
    outside the zone).  Analytic mode passes by construction; numeric mode
    integrates the channels and also reports the norm drift.  Violated
    parameter hierarchies are surfaced as failures regardless of the
    fidelities.
    """
    probe, failures = _probe_time(params, validity_threshold)

    if mode == "analytic":
        before = analytic_evolve(params, probe)
        at_star = analytic_evolve(params, params.tau_star)
        p_before, p_star = before.p_off, at_star.p_on
        drift = 0.0
    elif mode == "numeric":
        traj = numeric_evolve(
            params, grid=grid, sample_times=(probe, params.tau_star), n_samples=50
        )
        return condition_from_trajectory(
            params, traj, ready_threshold, fired_threshold, validity_threshold
        )
    else:
        raise ValueError(f"unknown mode {mode!r}")

    return TriggerConditionReport(
        mode=mode,
        p_ready_before=p_before,
        p_fired_at_star=p_star,
        epsilon=params.epsilon,
        rotation=params.rotation_angle,
        reflection=reflection_bound(params),
        norm_drift=drift,
        ready_threshold=ready_threshold,
        fired_threshold=fired_threshold,
        validity_failures=failures,
    )


def _probe_time(params, validity_threshold):
    probe = params.tau_star - 2.0 * params.epsilon
    failures = tuple(params.validity_failures(validity_threshold))
    if probe <= 0:
        failures = failures + (
            f"crossing time epsilon={params.epsilon:g} too close to "
            f"tau_star={params.tau_star:g}",
        )
        probe = 0.0
    return probe, failures


def condition_from_trajectory(
    params,
    trajectory,
    ready_threshold=READY_THRESHOLD,
    fired_threshold=FIRED_THRESHOLD,
    validity_threshold=VALIDITY_THRESHOLD,
):
    """Numeric-mode condition report reusing an existing trajectory.

    The trajectory must contain samples at (or near) tau_star - 2 epsilon
    and tau_star; :func:`numeric_evolve` lands exactly on requested
    sample_times.
    """
    probe, failures = _probe_time(params, validity_threshold)
    return TriggerConditionReport(
        mode="numeric",
        p_ready_before=trajectory.at(probe)["p_off"],
        p_fired_at_star=trajectory.at(params.tau_star)["p_on"],
        epsilon=params.epsilon,
        rotation=params.rotation_angle,
        reflection=reflection_bound(params),
        norm_drift=float(np.max(np.abs(trajectory.norm - 1.0))),
        ready_threshold=ready_threshold,
        fired_threshold=fired_threshold,
        validity_failures=failures,
    )
