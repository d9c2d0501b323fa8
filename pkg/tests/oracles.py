"""Independent reference computations.

Everything here works from the definitions (Gaussian phase kernel, per-shot
conditional moments) by direct numerical quadrature, and never calls the
closed-form moment functions it is used to check.
"""

import math

from scipy.integrate import quad


def kernel_average(f, sigma, center=0.0):
    """Average of ``f(phi)`` over a Gaussian of width ``sigma`` around ``center``."""
    if sigma == 0.0:
        return f(center)
    norm = 1.0 / math.sqrt(2.0 * math.pi * sigma * sigma)

    def integrand(p):
        return norm * math.exp(-0.5 * ((p - center) / sigma) ** 2) * f(p)

    val, _ = quad(integrand, center - 8.0 * sigma, center + 8.0 * sigma,
                  epsabs=1e-12, epsrel=1e-12, limit=400)
    return val


def mixture_moments(sigma, cond_mean_x, cond_mean_y, cond_var_x, cond_var_y, center=0.0):
    """(mean_x, mean_y, var_x, var_y) of a Gaussian phase mixture of conditional Gaussians."""
    mx = kernel_average(cond_mean_x, sigma, center)
    my = kernel_average(cond_mean_y, sigma, center)
    ex2 = kernel_average(lambda p: cond_var_x + cond_mean_x(p) ** 2, sigma, center)
    ey2 = kernel_average(lambda p: cond_var_y + cond_mean_y(p) ** 2, sigma, center)
    return mx, my, ex2 - mx * mx, ey2 - my * my


def diffused_oracle(beta, sigma, phi=0.0):
    return mixture_moments(
        sigma,
        lambda p: 2.0 * beta * math.cos(p),
        lambda p: 2.0 * beta * math.sin(p),
        1.0,
        1.0,
        center=phi,
    )


def opo_diffused_oracle(beta, sigma, eta_in, eta_esc, d):
    t = math.sqrt(4.0 * eta_in * eta_esc)
    return mixture_moments(
        sigma,
        lambda p: t / (1.0 - d) * 2.0 * beta * math.cos(p),
        lambda p: t / (1.0 + d) * 2.0 * beta * math.sin(p),
        1.0 + eta_esc * 4.0 * d / (1.0 - d) ** 2,
        1.0 - eta_esc * 4.0 * d / (1.0 + d) ** 2,
    )


def delta_method_variance(mx, my, vx, vy):
    """First-order variance of atan2(<y>, <x>) for independent x and y estimates."""
    r2 = mx * mx + my * my
    return (my * my * vx + mx * mx * vy) / (r2 * r2)


def advantage_crossing_scan(advantage, lo, hi, n=200_001):
    """Brute-force crossing: finest-grid sign change of ``advantage`` on [lo, hi]."""
    prev_s, prev_a = lo, advantage(lo)
    crossings = []
    for i in range(1, n):
        s = lo + (hi - lo) * i / (n - 1)
        a = advantage(s)
        if (a > 0) != (prev_a > 0):
            crossings.append(prev_s - prev_a * (s - prev_s) / (a - prev_a))
        prev_s, prev_a = s, a
    return crossings
