# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Mirrors ``_pykernels`` function for function."""
import numpy as np

ctypedef double complex cplx


cdef inline double _lj_force(double r, double eps, double rm) nogil:
    cdef double q = rm / r
    cdef double q6 = q * q * q * q * q * q
    return 12.0 * eps / r * (q6 * q6 - q6)


def lj_verlet(double r0, double vr0, double eps, double rm, double mu,
              double dt, Py_ssize_t nsteps):
    r_out = np.empty(nsteps + 1)
    v_out = np.empty(nsteps + 1)
    cdef double[::1] rv = r_out
    cdef double[::1] vv = v_out
    cdef double r = r0, v = vr0, a, an
    cdef Py_ssize_t i
    cdef Py_ssize_t bad = -1
    with nogil:
        a = _lj_force(r, eps, rm) / mu
        rv[0] = r
        vv[0] = v
        for i in range(nsteps):
            r = r + v * dt + 0.5 * a * dt * dt
            if r <= 0.0:
                bad = i + 1
                break
            an = _lj_force(r, eps, rm) / mu
            v = v + 0.5 * (a + an) * dt
            a = an
            rv[i + 1] = r
            vv[i + 1] = v
    if bad >= 0:
        raise FloatingPointError(f"separation became non-positive at step {bad}")
    return r_out, v_out


cdef void _matmul(const cplx[:, ::1] a, const cplx[:, ::1] b, cplx[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0], i, j, k
    cdef cplx s
    for i in range(n):
        for j in range(n):
            s = 0
            for k in range(n):
                s = s + a[i, k] * b[k, j]
            out[i, j] = s


def ordered_product(const cplx[:, :, ::1] us):
    cdef Py_ssize_t n = us.shape[0], d = us.shape[1], k, i
    acc = np.eye(d, dtype=np.complex128)
    tmp = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] av = acc
    cdef cplx[:, ::1] tv = tmp
    with nogil:
        for k in range(n):
            _matmul(us[k], av, tv)
            av[:, :] = tv
    return acc


def dyson_accumulate(const cplx[:, :, ::1] hs, Py_ssize_t order, double h, bint collisions):
    cdef Py_ssize_t m_nodes = hs.shape[0], d = hs.shape[1]
    cdef Py_ssize_t m, j, k, a, b, c
    p_arr = np.zeros((order + 1, d, d), dtype=np.complex128)
    pw_arr = np.zeros((max(order, 1) + 1, d, d), dtype=np.complex128)
    new_arr = np.zeros((order + 1, d, d), dtype=np.complex128)
    tmp_arr = np.zeros((d, d), dtype=np.complex128)
    cdef cplx[:, :, ::1] p = p_arr
    cdef cplx[:, :, ::1] pw = pw_arr
    cdef cplx[:, :, ::1] newp = new_arr
    cdef cplx[:, ::1] tmp = tmp_arr
    cdef cplx s
    cdef cplx mih = -1j * h
    for a in range(d):
        p[0, a, a] = 1.0
    with nogil:
        for m in range(m_nodes):
            for a in range(d):
                for b in range(d):
                    pw[1, a, b] = mih * hs[m, a, b]
            if collisions:
                for j in range(2, order + 1):
                    _matmul(pw[j - 1], pw[1], tmp)
                    for a in range(d):
                        for b in range(d):
                            pw[j, a, b] = tmp[a, b] / j
                for k in range(order, 0, -1):
                    for a in range(d):
                        for b in range(d):
                            newp[k, a, b] = p[k, a, b]
                    for j in range(1, k + 1):
                        for a in range(d):
                            for b in range(d):
                                s = 0
                                for c in range(d):
                                    s = s + pw[j, a, c] * p[k - j, c, b]
                                newp[k, a, b] = newp[k, a, b] + s
                for k in range(1, order + 1):
                    p[k, :, :] = newp[k]
            else:
                for k in range(order, 0, -1):
                    _matmul(pw[1], p[k - 1], tmp)
                    for a in range(d):
                        for b in range(d):
                            p[k, a, b] = p[k, a, b] + tmp[a, b]
    return p_arr.sum(axis=0)
