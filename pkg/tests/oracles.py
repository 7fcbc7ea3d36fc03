"""Independent reference solutions used by the tests.

Every oracle assembles the un-rearranged finite-difference equations
directly (central differences of the PDE, written out term by term) and
solves them with a direct method, so it shares no code with the relaxation
weights in the package.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_banded


def _dense_solve(shape, known, row_of):
    """Solve for the nodes where ``known`` is NaN.

    ``row_of(i, j)`` returns ``{(a, b): coeff}, rhs`` for the equation at an
    unknown node; entries for known nodes are moved to the right-hand side.
    """
    n1, n2 = shape
    unknown = [(i, j) for i in range(n1) for j in range(n2) if np.isnan(known[i, j])]
    index = {node: k for k, node in enumerate(unknown)}
    a = np.zeros((len(unknown), len(unknown)))
    b = np.zeros(len(unknown))
    for k, (i, j) in enumerate(unknown):
        coeffs, rhs = row_of(i, j)
        b[k] = rhs
        for node, c in coeffs.items():
            if node in index:
                a[k, index[node]] += c
            else:
                b[k] -= c * known[node]
    x = np.linalg.solve(a, b)
    out = known.copy()
    for k, node in enumerate(unknown):
        out[node] = x[k]
    return out


def cartesian_nodal(eps, rho, boundary, h1=1.0, h2=1.0, kappa=1.0):
    """eps*lap(phi) + grad(eps).grad(phi) = -kappa*rho with nodal eps.

    ``boundary`` holds the fixed values (edges and pins) and NaN elsewhere.
    """
    def row(i, j):
        e = eps[i, j]
        ge1 = (eps[i + 1, j] - eps[i - 1, j]) / (2 * h1)
        ge2 = (eps[i, j + 1] - eps[i, j - 1]) / (2 * h2)
        c = {(i + 1, j): e / h1 ** 2 + ge1 / (2 * h1),
             (i - 1, j): e / h1 ** 2 - ge1 / (2 * h1),
             (i, j + 1): e / h2 ** 2 + ge2 / (2 * h2),
             (i, j - 1): e / h2 ** 2 - ge2 / (2 * h2),
             (i, j): -2 * e / h1 ** 2 - 2 * e / h2 ** 2}
        return c, -kappa * rho[i, j]
    return _dense_solve(eps.shape, boundary, row)


def cartesian_conservative(eps, rho, boundary, h1=1.0, h2=1.0, kappa=1.0):
    """div(eps grad phi) = -kappa*rho with harmonic-mean face permittivities."""
    def face(a, b):
        return 2 * a * b / (a + b)

    def row(i, j):
        e = eps[i, j]
        fe, fw = face(e, eps[i + 1, j]), face(e, eps[i - 1, j])
        fn, fs = face(e, eps[i, j + 1]), face(e, eps[i, j - 1])
        c = {(i + 1, j): fe / h1 ** 2, (i - 1, j): fw / h1 ** 2,
             (i, j + 1): fn / h2 ** 2, (i, j - 1): fs / h2 ** 2,
             (i, j): -(fe + fw) / h1 ** 2 - (fn + fs) / h2 ** 2}
        return c, -kappa * rho[i, j]
    return _dense_solve(eps.shape, boundary, row)


def polar(rho, boundary, r0, dr, dal, eps=1.0, kappa=1.0):
    """phi_rr + phi_r / r + phi_aa / r**2 = -kappa*q/eps."""
    def row(i, j):
        r = r0 + i * dr
        c = {(i + 1, j): 1 / dr ** 2 + 1 / (2 * r * dr),
             (i - 1, j): 1 / dr ** 2 - 1 / (2 * r * dr),
             (i, j + 1): 1 / (r * dal) ** 2,
             (i, j - 1): 1 / (r * dal) ** 2,
             (i, j): -2 / dr ** 2 - 2 / (r * dal) ** 2}
        return c, -kappa * rho[i, j] / eps
    return _dense_solve(rho.shape, boundary, row)


def axisym(rho, boundary, h1, h2, eps=1.0, kappa=1.0, r_guard=None, r0=0.0):
    """phi_rr + phi_r / r + phi_zz = -kappa*rho/eps, r = r0 + h1*i + r_guard."""
    guard = 0.001 * h1 if r_guard is None else r_guard

    def row(i, k):
        r = r0 + h1 * i + guard
        c = {(i + 1, k): 1 / h1 ** 2 + 1 / (2 * r * h1),
             (i - 1, k): 1 / h1 ** 2 - 1 / (2 * r * h1),
             (i, k + 1): 1 / h2 ** 2,
             (i, k - 1): 1 / h2 ** 2,
             (i, k): -2 / h1 ** 2 - 2 / h2 ** 2}
        return c, -kappa * rho[i, k] / eps
    return _dense_solve(rho.shape, boundary, row)


def tridiagonal(eps, rho, left, right, h=1.0, kappa=1.0, stencil="nodal"):
    """Direct banded solve of the 1D discrete problem between two plates."""
    eps = np.asarray(eps, dtype=float)
    rho = np.asarray(rho, dtype=float)
    n = eps.size
    m = n - 2
    ab = np.zeros((3, m))
    b = -kappa * rho[1:-1] * h * h
    for k in range(m):
        j = k + 1
        if stencil == "nodal":
            g = (eps[j + 1] - eps[j - 1]) / 4
            east, west, diag = eps[j] + g, eps[j] - g, -2 * eps[j]
        else:
            east = 2 * eps[j] * eps[j + 1] / (eps[j] + eps[j + 1])
            west = 2 * eps[j] * eps[j - 1] / (eps[j] + eps[j - 1])
            diag = -(east + west)
        ab[1, k] = diag
        if k + 1 < m:
            ab[0, k + 1] = east
        else:
            b[k] -= east * right
        if k > 0:
            ab[2, k - 1] = west
        else:
            b[k] -= west * left
    x = solve_banded((1, 1), ab, b)
    return np.concatenate([[left], x, [right]])


def capacitor_ramp(n2, low, high):
    return low + (high - low) * np.arange(n2) / (n2 - 1)


def log_profile(r, r_in, r_out, v_in, v_out):
    """A ln r + B through the two arc potentials."""
    a = (v_out - v_in) / math.log(r_out / r_in)
    return v_in + a * np.log(np.asarray(r) / r_in)


def series_capacitor_slopes(eps_left, eps_right, n, left, right):
    """Slopes of the exact piecewise-linear solution with the interface mid-gap."""
    length = n - 1
    half = length / 2
    # eps_l * s_l = eps_r * s_r, s_l*half + s_r*half = right - left
    s_l = (right - left) / (half * (1 + eps_left / eps_right))
    s_r = s_l * eps_left / eps_right
    return s_l, s_r


def nodal_update_flipped_gradient(phi, eps, rho, i, j):
    """Node update with the eps-difference factor written as (eW - eE)."""
    p, e = phi, eps
    average = (p[i + 1, j] + p[i - 1, j] + p[i, j + 1] + p[i, j - 1] + rho[i, j] / e[i, j]) / 4
    gradient = ((e[i - 1, j] - e[i + 1, j]) * (p[i + 1, j] - p[i - 1, j])
                + (e[i, j - 1] - e[i, j + 1]) * (p[i, j + 1] - p[i, j - 1])) / (16 * e[i, j])
    return average + gradient
