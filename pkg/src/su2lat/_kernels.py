"""Numba kernels for the sequential hot loops.

Everything here operates on raw arrays: link fields of shape (V, 4, 4)
[site, direction, quaternion component], neighbor tables of shape (V, 4),
and a 1-element uint64 RNG state that is advanced in place.  The update
sweeps are deliberately sequential (single stream, fixed site order) so
that runs are bit-reproducible from the seed.
"""

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True)
def next_u64(state):
    # SplitMix64: increment by the golden-ratio constant, then mix.
    state[0] = state[0] + _GAMMA
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def uniform(state):
    """Uniform double in [0, 1)."""
    return float(next_u64(state) >> np.uint64(11)) * _U53


@njit(cache=True)
def uniform_open(state):
    """Uniform double in (0, 1], safe for log()."""
    return 1.0 - uniform(state)


@njit(cache=True)
def fill_uniform(state, out):
    for i in range(out.size):
        out.flat[i] = uniform(state)


@njit(cache=True)
def _normal_pair(state):
    u1 = uniform_open(state)
    u2 = uniform(state)
    r = math.sqrt(-2.0 * math.log(u1))
    t = 2.0 * math.pi * u2
    return r * math.cos(t), r * math.sin(t)


@njit(cache=True)
def fill_normal(state, out):
    n = out.size
    i = 0
    while i + 1 < n:
        a, b = _normal_pair(state)
        out.flat[i] = a
        out.flat[i + 1] = b
        i += 2
    if i < n:
        a, b = _normal_pair(state)
        out.flat[i] = a


@njit(cache=True)
def _haar4(state):
    # Four standard normals normalized to the unit 3-sphere.
    while True:
        a, b = _normal_pair(state)
        c, d = _normal_pair(state)
        n2 = a * a + b * b + c * c + d * d
        if n2 > 1e-300:
            s = 1.0 / math.sqrt(n2)
            return a * s, b * s, c * s, d * s


@njit(cache=True)
def fill_haar(state, out):
    for i in range(out.shape[0]):
        a, b, c, d = _haar4(state)
        out[i, 0] = a
        out[i, 1] = b
        out[i, 2] = c
        out[i, 3] = d


@njit(cache=True, inline="always")
def _qmul(a1, b1, c1, d1, a2, b2, c2, d2):
    # Component product matching the 2x2 matrix product of the
    # [[a+ib, -c+id], [c+id, a-ib]] embedding (left-handed triple).
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 - c1 * d2 + d1 * c2,
        a1 * c2 + b1 * d2 + c1 * a2 - d1 * b2,
        a1 * d2 - b1 * c2 + c1 * b2 + d1 * a2,
    )


@njit(cache=True)
def staple_components(links, fwd, bwd, s, mu):
    """Sum of the six staples closing plaquettes through link (s, mu).

    Returns the unnormalized quaternion sum S such that
    Re Tr(U_mu(s) S) equals the sum of the six plaquette traces.
    """
    sa = 0.0
    sb = 0.0
    sc = 0.0
    sd = 0.0
    sp = fwd[s, mu]
    for nu in range(4):
        if nu == mu:
            continue
        # forward staple: U_nu(s+mu) U_mu(s+nu)^+ U_nu(s)^+
        i = fwd[s, nu]
        a1, b1, c1, d1 = _qmul(
            links[sp, nu, 0], links[sp, nu, 1], links[sp, nu, 2], links[sp, nu, 3],
            links[i, mu, 0], -links[i, mu, 1], -links[i, mu, 2], -links[i, mu, 3],
        )
        a1, b1, c1, d1 = _qmul(
            a1, b1, c1, d1,
            links[s, nu, 0], -links[s, nu, 1], -links[s, nu, 2], -links[s, nu, 3],
        )
        # backward staple: U_nu(s+mu-nu)^+ U_mu(s-nu)^+ U_nu(s-nu)
        j = bwd[s, nu]
        jm = fwd[j, mu]
        a2, b2, c2, d2 = _qmul(
            links[jm, nu, 0], -links[jm, nu, 1], -links[jm, nu, 2], -links[jm, nu, 3],
            links[j, mu, 0], -links[j, mu, 1], -links[j, mu, 2], -links[j, mu, 3],
        )
        a2, b2, c2, d2 = _qmul(
            a2, b2, c2, d2,
            links[j, nu, 0], links[j, nu, 1], links[j, nu, 2], links[j, nu, 3],
        )
        sa += a1 + a2
        sb += b1 + b2
        sc += c1 + c2
        sd += d1 + d2
    return sa, sb, sc, sd


@njit(cache=True)
def sample_x0(alpha, state):
    """Draw x0 from p(x0) ~ sqrt(1-x0^2) exp(alpha*x0) on [-1, 1].

    Kennedy-Pendleton accept/reject for alpha >= 0.1, direct inversion
    with sqrt(1-x^2) accept (Creutz style) below, where KP acceptance
    collapses.
    """
    if alpha < 0.1:
        emin = math.exp(-alpha)
        span = math.exp(alpha) - emin
        while True:
            u = uniform_open(state)
            x = math.log(emin + u * span) / alpha
            v = uniform(state)
            if v * v <= 1.0 - x * x:
                return x
    while True:
        r1 = uniform_open(state)
        r2 = uniform(state)
        r3 = uniform_open(state)
        cc = math.cos(2.0 * math.pi * r2)
        lam2 = -(math.log(r1) + cc * cc * math.log(r3)) / (2.0 * alpha)
        r4 = uniform(state)
        if r4 * r4 <= 1.0 - lam2:
            return 1.0 - 2.0 * lam2


@njit(cache=True)
def fill_x0(alpha, state, out):
    for i in range(out.size):
        out[i] = sample_x0(alpha, state)


@njit(cache=True)
def _heatbath_update(links, fwd, bwd, s, mu, beta, state):
    sa, sb, sc, sd = staple_components(links, fwd, bwd, s, mu)
    k = math.sqrt(sa * sa + sb * sb + sc * sc + sd * sd)
    alpha = beta * k
    if alpha < 1e-12:
        # flat weight (beta*k == 0): exact Haar redraw
        a, b, c, d = _haar4(state)
        links[s, mu, 0] = a
        links[s, mu, 1] = b
        links[s, mu, 2] = c
        links[s, mu, 3] = d
        return
    x0 = sample_x0(alpha, state)
    rho2 = 1.0 - x0 * x0
    rho = math.sqrt(rho2) if rho2 > 0.0 else 0.0
    # direction uniform on the 2-sphere
    nz = 2.0 * uniform(state) - 1.0
    phi = 2.0 * math.pi * uniform(state)
    rxy = math.sqrt(max(1.0 - nz * nz, 0.0))
    xb = rho * rxy * math.cos(phi)
    xc = rho * rxy * math.sin(phi)
    xd = rho * nz
    # U = X * Ahat^+, Ahat = S / k
    inv = 1.0 / k
    a, b, c, d = _qmul(x0, xb, xc, xd, sa * inv, -sb * inv, -sc * inv, -sd * inv)
    links[s, mu, 0] = a
    links[s, mu, 1] = b
    links[s, mu, 2] = c
    links[s, mu, 3] = d


@njit(cache=True)
def heatbath_sweep(links, fwd, bwd, beta, state):
    V = links.shape[0]
    for mu in range(4):
        for s in range(V):
            _heatbath_update(links, fwd, bwd, s, mu, beta, state)


@njit(cache=True)
def _overrelax_update(links, fwd, bwd, s, mu):
    sa, sb, sc, sd = staple_components(links, fwd, bwd, s, mu)
    k2 = sa * sa + sb * sb + sc * sc + sd * sd
    if k2 < 1e-300:
        return
    inv = 1.0 / math.sqrt(k2)
    aa, ab, ac, ad = sa * inv, -sb * inv, -sc * inv, -sd * inv  # Ahat^+
    ua, ub, uc, ud = (
        links[s, mu, 0],
        -links[s, mu, 1],
        -links[s, mu, 2],
        -links[s, mu, 3],
    )  # U^+
    # reflection U -> Ahat^+ U^+ Ahat^+ keeps Re Tr(U S) fixed
    a, b, c, d = _qmul(aa, ab, ac, ad, ua, ub, uc, ud)
    a, b, c, d = _qmul(a, b, c, d, aa, ab, ac, ad)
    links[s, mu, 0] = a
    links[s, mu, 1] = b
    links[s, mu, 2] = c
    links[s, mu, 3] = d


@njit(cache=True)
def overrelax_sweep(links, fwd, bwd):
    V = links.shape[0]
    for mu in range(4):
        for s in range(V):
            _overrelax_update(links, fwd, bwd, s, mu)


@njit(cache=True, inline="always")
def _plaq_staple(links, fwd, s, mu, nu):
    """Product U_nu(s+mu) U_mu(s+nu)^+ U_nu(s)^+ (plaquette minus its mu link)."""
    sp = fwd[s, mu]
    i = fwd[s, nu]
    a, b, c, d = _qmul(
        links[sp, nu, 0], links[sp, nu, 1], links[sp, nu, 2], links[sp, nu, 3],
        links[i, mu, 0], -links[i, mu, 1], -links[i, mu, 2], -links[i, mu, 3],
    )
    return _qmul(a, b, c, d,
                 links[s, nu, 0], -links[s, nu, 1], -links[s, nu, 2], -links[s, nu, 3])


@njit(cache=True, inline="always")
def _plaq_staple_dn(links, fwd, bwd, s, mu, nu):
    """Downward plaquette, based at s - nu, rearranged so the varying link
    U_mu(s) multiplies from the left:
    Box(s-nu) = Re Tr[U_mu(s) U_nu(s-nu+mu)^+ U_mu(s-nu)^+ U_nu(s-nu)]."""
    j = bwd[s, nu]
    jp = fwd[j, mu]
    a, b, c, d = _qmul(
        links[jp, nu, 0], -links[jp, nu, 1], -links[jp, nu, 2], -links[jp, nu, 3],
        links[j, mu, 0], -links[j, mu, 1], -links[j, mu, 2], -links[j, mu, 3],
    )
    return _qmul(a, b, c, d,
                 links[j, nu, 0], links[j, nu, 1], links[j, nu, 2], links[j, nu, 3])


@njit(cache=True, inline="always")
def _retrace_prod(ma, mb, mc, md, ra, rb, rc, rd):
    return 2.0 * (ma * ra - mb * rb - mc * rc - md * rd)


@njit(cache=True)
def apr_targets_single(links, fwd, targets):
    """Original canonical-plane plaquette values, one per link.

    Evaluated with the exact expressions the APR sweep uses, so that on
    an unmodified field the original link reproduces its target bit for
    bit and a codebook-valued field is an exact fixed point.
    """
    V = links.shape[0]
    for mu in range(4):
        nu = (mu + 1) % 4
        for s in range(V):
            ra, rb, rc, rd = _plaq_staple(links, fwd, s, mu, nu)
            targets[s, mu] = _retrace_prod(
                links[s, mu, 0], links[s, mu, 1], links[s, mu, 2], links[s, mu, 3],
                ra, rb, rc, rd,
            )


@njit(cache=True)
def apr_targets_all(links, fwd, bwd, tgt_up, tgt_dn):
    """Original values of all six plaquettes per link (up/down per plane)."""
    V = links.shape[0]
    for mu in range(4):
        for nu in range(4):
            if nu == mu:
                continue
            for s in range(V):
                ra, rb, rc, rd = _plaq_staple(links, fwd, s, mu, nu)
                tgt_up[s, mu, nu] = _retrace_prod(
                    links[s, mu, 0], links[s, mu, 1], links[s, mu, 2], links[s, mu, 3],
                    ra, rb, rc, rd,
                )
                ra, rb, rc, rd = _plaq_staple_dn(links, fwd, bwd, s, mu, nu)
                tgt_dn[s, mu, nu] = _retrace_prod(
                    links[s, mu, 0], links[s, mu, 1], links[s, mu, 2], links[s, mu, 3],
                    ra, rb, rc, rd,
                )


@njit(cache=True)
def apr_sweep_single(links, orig, targets, mesh, fwd, bwd):
    """Action-preserving rounding, one canonical plaquette per link.

    Directions are swept X, Y, Z, T; within a direction, sites run in
    storage order.  The link (s, mu) is replaced by the mesh element
    whose substitution brings the (mu, mu+1 mod 4) plaquette closest to
    its value on the original field (targets[s, mu]).  Ties prefer the
    element nearest the original link, then the lowest index.
    """
    V = links.shape[0]
    v = mesh.shape[0]
    for mu in range(4):
        nu = (mu + 1) % 4
        for s in range(V):
            ra, rb, rc, rd = _plaq_staple(links, fwd, s, mu, nu)
            tgt = targets[s, mu]
            ga = orig[s, mu, 0]
            gb = orig[s, mu, 1]
            gc = orig[s, mu, 2]
            gd = orig[s, mu, 3]
            best = 0
            best_dev = 1e300
            best_dist = 1e300
            for m in range(v):
                ma = mesh[m, 0]
                mb = mesh[m, 1]
                mc = mesh[m, 2]
                md = mesh[m, 3]
                val = _retrace_prod(ma, mb, mc, md, ra, rb, rc, rd)
                dev = abs(val - tgt)
                if dev > best_dev:
                    continue
                dist = (
                    (ma - ga) * (ma - ga)
                    + (mb - gb) * (mb - gb)
                    + (mc - gc) * (mc - gc)
                    + (md - gd) * (md - gd)
                )
                if dev < best_dev or dist < best_dist:
                    best = m
                    best_dev = dev
                    best_dist = dist
            links[s, mu, 0] = mesh[best, 0]
            links[s, mu, 1] = mesh[best, 1]
            links[s, mu, 2] = mesh[best, 2]
            links[s, mu, 3] = mesh[best, 3]


@njit(cache=True)
def apr_sweep_all(links, orig, tgt_up, tgt_dn, mesh, fwd, bwd):
    """APR variant scoring all six plaquettes that contain each link."""
    V = links.shape[0]
    v = mesh.shape[0]
    st = np.empty((6, 4))
    tg = np.empty(6)
    for mu in range(4):
        for s in range(V):
            n = 0
            for nu in range(4):
                if nu == mu:
                    continue
                a, b, c, d = _plaq_staple(links, fwd, s, mu, nu)
                st[n, 0] = a
                st[n, 1] = b
                st[n, 2] = c
                st[n, 3] = d
                tg[n] = tgt_up[s, mu, nu]
                n += 1
                a, b, c, d = _plaq_staple_dn(links, fwd, bwd, s, mu, nu)
                st[n, 0] = a
                st[n, 1] = b
                st[n, 2] = c
                st[n, 3] = d
                tg[n] = tgt_dn[s, mu, nu]
                n += 1
            ga = orig[s, mu, 0]
            gb = orig[s, mu, 1]
            gc = orig[s, mu, 2]
            gd = orig[s, mu, 3]
            best = 0
            best_dev = 1e300
            best_dist = 1e300
            for m in range(v):
                ma = mesh[m, 0]
                mb = mesh[m, 1]
                mc = mesh[m, 2]
                md = mesh[m, 3]
                dev = 0.0
                for j6 in range(6):
                    val = _retrace_prod(ma, mb, mc, md,
                                        st[j6, 0], st[j6, 1], st[j6, 2], st[j6, 3])
                    diff = val - tg[j6]
                    dev += diff * diff
                if dev > best_dev:
                    continue
                dist = (
                    (ma - ga) * (ma - ga)
                    + (mb - gb) * (mb - gb)
                    + (mc - gc) * (mc - gc)
                    + (md - gd) * (md - gd)
                )
                if dev < best_dev or dist < best_dist:
                    best = m
                    best_dev = dev
                    best_dist = dist
            links[s, mu, 0] = mesh[best, 0]
            links[s, mu, 1] = mesh[best, 1]
            links[s, mu, 2] = mesh[best, 2]
            links[s, mu, 3] = mesh[best, 3]
