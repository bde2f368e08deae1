"""Traveling-wave profile behind a front moving at the sound speed.

In the frame x = z - v' t the single-channel field f1 = g(x) obeys

    -v' g' = g (1 - g) + g'' / 6,     v' = 3^(-1/2),

with g(0) = 0 at the front and g -> 1 far behind it. Near g = 1 the
deficit u = 1 - g decays like exp(q x), q = 3 - sqrt(3). The profile is
found by shooting from that tail until g first hits zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from intricacy.fields import DIFFUSION, SOUND_SPEED

DEFAULT_START_DEFICIT = 1e-4
MAX_START_DEFICIT = 0.1
MAX_AMPLITUDE = 0.2
# beyond the start point, the front must appear within this many units
SEARCH_SPAN = 60.0


class NoCrossing(RuntimeError):
    pass


def characteristic(q: float) -> float:
    """Linearisation of the wave equation around g = 1 for u = exp(q x)."""
    return q * q * DIFFUSION + q * SOUND_SPEED - 1.0


def tail_exponent() -> float:
    """Positive root of q^2 + 2 sqrt(3) q - 6 = 0."""
    b = 2.0 * math.sqrt(3.0)
    # the other root, -3 - sqrt(3), gives a deficit that blows up behind the front
    return (-b + math.sqrt(b * b + 24.0)) / 2.0


def rhs(x, y, speed: float = SOUND_SPEED):
    g, dg = y
    return [dg, -(speed * dg + g * (1.0 - g)) / DIFFUSION]


def ode_residual(x, g, dg, d2g, speed: float = SOUND_SPEED):
    return -speed * dg - g * (1.0 - g) - d2g * DIFFUSION


@dataclass
class FrontProfile:
    """Sampled profile in the front frame (front at x = 0, tail at x < 0)."""

    x: np.ndarray
    g: np.ndarray
    C: float                 # amplitude used at the start point
    x0: float                # start depth in the integration frame
    q: float
    g_prime_at_front: float
    tail_amplitude: float    # u ~ tail_amplitude * exp(q x) in the front frame
    start: float             # start point in the front frame (= x[0])
    _dense: object = None

    def __call__(self, x):
        """Dense evaluation of g at front-frame positions inside [start, 0]."""
        return self._dense(np.asarray(x, dtype=float) - self.start - self.x0)[0]

    def derivative(self, x):
        return self._dense(np.asarray(x, dtype=float) - self.start - self.x0)[1]

    def residual(self, h: float = 1e-3) -> np.ndarray:
        """ODE residual at interior samples, derivatives by central differences."""
        xi = self.x[(self.x - h > self.start) & (self.x + h < 0.0)]
        gm, g0, gp = self(xi - h), self(xi), self(xi + h)
        return ode_residual(xi, g0, (gp - gm) / (2 * h), (gp - 2 * g0 + gm) / (h * h))

    def distance_to(self, level: float) -> float:
        """Distance behind the front beyond which g stays above ``level``."""
        below = np.nonzero(self.g < level)[0]
        if len(below) == 0:
            return 0.0
        i = below[0]
        if i == 0:
            return float(-self.x[0])
        x1, x2, g1, g2 = self.x[i - 1], self.x[i], self.g[i - 1], self.g[i]
        return float(-(x1 + (x2 - x1) * (g1 - level) / (g1 - g2)))


def default_start_depth(C: float, deficit: float = DEFAULT_START_DEFICIT) -> float:
    """x0 with C exp(-q x0) = deficit."""
    return math.log(C / deficit) / tail_exponent()


def integrate_front(C: float = 0.05, x0: float | None = None, dx: float = 0.01,
                    rtol: float = 1e-12, atol: float = 1e-14) -> FrontProfile:
    """Shoot from g = 1 - C exp(-q x0) at -x0 and stop at the first zero of g.

    The zero is located on the dense output and the result is shifted so the
    front sits at x = 0; samples are spaced ``dx`` back from the front.
    """
    if not 0.0 < C <= MAX_AMPLITUDE:
        raise ValueError(f"C must lie in (0, {MAX_AMPLITUDE}], got {C}")
    if dx <= 0:
        raise ValueError("dx must be positive")
    q = tail_exponent()
    x0 = default_start_depth(C) if x0 is None else float(x0)
    u0 = C * math.exp(-q * x0)
    if u0 > MAX_START_DEFICIT:
        raise ValueError(f"start deficit C exp(-q x0) = {u0:.3g} exceeds {MAX_START_DEFICIT}; "
                         "the exponential tail is not valid that close to the front")

    def hits_zero(x, y):
        return y[0]
    hits_zero.terminal = True
    hits_zero.direction = -1

    sol = solve_ivp(rhs, (-x0, -x0 + SEARCH_SPAN), [1.0 - u0, -q * u0], method="RK45",
                    rtol=rtol, atol=atol, dense_output=True, events=hits_zero)
    if not sol.t_events[0].size:
        raise NoCrossing(f"g stayed positive over {SEARCH_SPAN} units after x = {-x0:g} "
                         f"(C={C}, x0={x0}); min g = {sol.y[0].min():.3g}")
    xc = float(sol.t_events[0][0])
    depth = xc + x0
    n = int(math.floor(depth / dx + 1e-9))
    x = -dx * np.arange(n, -1, -1, dtype=float)
    if depth - n * dx > 1e-9:
        x = np.concatenate([[-depth], x])
    x[0] = -depth
    g = sol.sol(x + xc)[0]
    g[-1] = 0.0
    dg0 = float(sol.y_events[0][0][1])
    # u exp(-q x) over the deep third recovers the front-frame tail amplitude
    deep = x < x[0] + depth / 3.0
    amp = float(np.exp(np.mean(np.log(1.0 - g[deep]) - q * x[deep])))
    return FrontProfile(x=x, g=g, C=C, x0=x0, q=q, g_prime_at_front=dg0,
                        tail_amplitude=amp, start=float(x[0]), _dense=sol.sol)


def tail_slope(profile: FrontProfile) -> float:
    """Least-squares slope of log(1 - g) over the deepest third of the profile."""
    x, g = profile.x, profile.g
    deep = x < x[0] + (x[-1] - x[0]) / 3.0
    return float(np.polyfit(x[deep], np.log(1.0 - g[deep]), 1)[0])


def overlay_error(a: FrontProfile, b: FrontProfile) -> float:
    """Sup-norm difference of two profiles on their common front-frame range."""
    lo = max(a.start, b.start)
    x = np.linspace(lo, 0.0, 2001)
    return float(np.max(np.abs(a(x) - b(x))))
