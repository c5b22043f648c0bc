# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Signatures mirror :mod:`neuropop._fallback` exactly."""

import numpy as np

from libc.math cimport exp


cdef inline void _exp_inplace(double* v, Py_ssize_t count) noexcept nogil:
    # flat loop so gcc can hand it to the vector exp in libmvec
    cdef Py_ssize_t i
    for i in range(count):
        v[i] = exp(v[i])


def forward(const double[:, ::1] W1, const double[::1] b1,
            const double[:, ::1] W2, const double[::1] b2,
            const double[:, ::1] z, bint quasi_pure, double epsilon,
            double[:, ::1] hidden, double[:, ::1] soft,
            double[:, ::1] out, long[::1] argmax):
    cdef Py_ssize_t b = z.shape[0], n = z.shape[1]
    cdef Py_ssize_t nh = W1.shape[0], ns = W2.shape[0]
    cdef Py_ssize_t i, j, k, c, best
    cdef double acc, top, total
    cdef double* hp = &hidden[0, 0]
    cdef double* sp = &soft[0, 0]
    with nogil:
        for i in range(b):
            for j in range(nh):
                acc = b1[j]
                for k in range(n):
                    acc += W1[j, k] * z[i, k]
                # exp stays finite under -ffast-math; the sigmoid is saturated anyway
                if acc > 500.0:
                    acc = 500.0
                elif acc < -500.0:
                    acc = -500.0
                hidden[i, j] = -acc
        _exp_inplace(hp, b * nh)
        for i in range(b * nh):
            hp[i] = 1.0 / (1.0 + hp[i])
        for i in range(b):
            top = -1e308
            for c in range(ns):
                acc = b2[c]
                for j in range(nh):
                    acc += W2[c, j] * hidden[i, j]
                soft[i, c] = acc
                if acc > top:
                    top = acc
            for c in range(ns):
                soft[i, c] -= top
        _exp_inplace(sp, b * ns)
        for i in range(b):
            total = 0.0
            for c in range(ns):
                total += soft[i, c]
            best = 0
            for c in range(ns):
                soft[i, c] = soft[i, c] / total
                if soft[i, c] > soft[i, best]:
                    best = c
            argmax[i] = best
            if quasi_pure:
                for c in range(ns):
                    out[i, c] = epsilon * soft[i, c]
                out[i, best] += 1.0 - epsilon
            else:
                for c in range(ns):
                    out[i, c] = soft[i, c]


def backward(const double[:, ::1] W2, const double[:, ::1] z,
             const double[:, ::1] hidden, const double[:, ::1] soft,
             const double[:, ::1] upstream, bint quasi_pure, double epsilon,
             double[:, ::1] gW1, double[::1] gb1,
             double[:, ::1] gW2, double[::1] gb2):
    cdef Py_ssize_t b = z.shape[0], n = z.shape[1]
    cdef Py_ssize_t nh = W2.shape[1], ns = W2.shape[0]
    cdef Py_ssize_t i, j, k, c
    cdef double scale = epsilon if quasi_pure else 1.0
    cdef double dot, acc, hj, gac, gpj
    cdef double[::1] ga = np.empty(ns)
    cdef double[::1] gp = np.empty(nh)
    with nogil:
        gW1[:, :] = 0.0
        gb1[:] = 0.0
        gW2[:, :] = 0.0
        gb2[:] = 0.0
        for i in range(b):
            dot = 0.0
            for c in range(ns):
                dot = dot + upstream[i, c] * soft[i, c]
            for c in range(ns):
                ga[c] = scale * soft[i, c] * (upstream[i, c] - dot)
            for j in range(nh):
                gp[j] = 0.0
            for c in range(ns):
                gac = ga[c]
                gb2[c] += gac
                for j in range(nh):
                    gW2[c, j] += gac * hidden[i, j]
                    gp[j] += gac * W2[c, j]
            for j in range(nh):
                hj = hidden[i, j]
                gpj = gp[j] * hj * (1.0 - hj)
                gb1[j] += gpj
                for k in range(n):
                    gW1[j, k] += gpj * z[i, k]


def replicator_run(const double[:, ::1] payoff, const double[:] x0,
                   double alpha, long steps, bint literal):
    cdef Py_ssize_t s = payoff.shape[0]
    cdef Py_ssize_t t, i, j
    cdef double phi, acc, total
    traj_arr = np.empty((steps + 1, s))
    cdef double[:, ::1] traj = traj_arr
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef double[::1] f = np.empty(s)
    for i in range(s):
        traj[0, i] = x[i]
    for t in range(1, steps + 1):
        phi = 0.0
        for i in range(s):
            acc = 0.0
            for j in range(s):
                acc += payoff[i, j] * x[j]
            f[i] = acc
            phi += x[i] * acc
        total = 0.0
        for i in range(s):
            if literal:
                x[i] = x[i] + alpha * (f[i] - phi)
            else:
                x[i] = x[i] + alpha * x[i] * (f[i] - phi)
            total += x[i]
        for i in range(s):
            if x[i] < 0.0 or x[i] > 1.0:
                return traj_arr[:t], t
            x[i] = x[i] / total
            traj[t, i] = x[i]
    return traj_arr, -1


def ipd_monte_carlo(const long[:] resp1, const long[:] resp2,
                    const double[:, ::1] draws, double noise,
                    const double[:] outcome_payoff, long open1, long open2):
    cdef Py_ssize_t rounds = draws.shape[0], t
    cdef long a = open1, b = open2, na, nb
    cdef double total = 0.0
    for t in range(rounds):
        if t == 0:
            na = open1
            nb = open2
        else:
            na = resp1[b]
            nb = resp2[a]
        if draws[t, 0] < noise:
            na = 1 - na
        if draws[t, 1] < noise:
            nb = 1 - nb
        a = na
        b = nb
        total += outcome_payoff[2 * a + b]
    return total / rounds
