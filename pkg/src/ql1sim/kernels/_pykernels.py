"""Pure numpy versions of the compiled kernels."""
import numpy as np


def _lj_force(r: float, eps: float, rm: float) -> float:
    q6 = (rm / r) ** 6
    return 12.0 * eps / r * (q6 * q6 - q6)


def lj_verlet(r0, vr0, eps, rm, mu, dt, nsteps):
    r_out = np.empty(nsteps + 1)
    v_out = np.empty(nsteps + 1)
    r, v = float(r0), float(vr0)
    a = _lj_force(r, eps, rm) / mu
    r_out[0], v_out[0] = r, v
    half_dt2 = 0.5 * dt * dt
    for i in range(1, nsteps + 1):
        r = r + v * dt + a * half_dt2
        if r <= 0.0:
            raise FloatingPointError(f"separation became non-positive at step {i}")
        an = _lj_force(r, eps, rm) / mu
        v = v + 0.5 * (a + an) * dt
        a = an
        r_out[i] = r
        v_out[i] = v
    return r_out, v_out


def ordered_product(us):
    """Return ``us[n-1] @ ... @ us[0]`` by pairwise tree reduction."""
    us = np.asarray(us, dtype=np.complex128)
    d = us.shape[1]
    if us.shape[0] == 0:
        return np.eye(d, dtype=np.complex128)
    while us.shape[0] > 1:
        if us.shape[0] % 2:
            us = np.concatenate([us, np.eye(d, dtype=np.complex128)[None]])
        us = us[1::2] @ us[0::2]
    return us[0].copy()


def dyson_accumulate(hs, order, h, collisions):
    hs = np.asarray(hs, dtype=np.complex128)
    d = hs.shape[1]
    p = np.zeros((order + 1, d, d), dtype=np.complex128)
    p[0] = np.eye(d)
    for hm in hs:
        a = -1j * h * hm
        if collisions:
            powers = [None, a]
            for j in range(2, order + 1):
                powers.append(powers[-1] @ a / j)
            newp = p.copy()
            for j in range(1, order + 1):
                newp[j:] += powers[j] @ p[: order + 1 - j]
            p = newp
        else:
            p[1:] += a @ p[:-1]
    return p.sum(axis=0)
