"""Event-driven hard-sphere kernel (numba).

Every particle carries exactly one pending event: its earliest predicted
collision, wall bounce or cell crossing. Pending events live in an indexed
binary min-heap keyed by particle. A pair event is validated lazily: if the
partner's velocity changed since the prediction (its counter moved), the
owner is simply re-predicted.

Geometry: periodic in x and y, reflecting walls in z at sigma/2 and
Lz - sigma/2 (particle centres).
"""

import numpy as np
from numba import njit

WALL = -1
CROSS_X = -2  # CROSS_X - d for dimension d
NO_EVENT = -9

MIXED_SCATTER = 0
MIXED_PASS = 1

# stats slots
S_COLLISIONS = 0
S_INFECTIONS = 1
S_WALLS = 2
S_CROSSINGS = 3
S_EVENTS = 4
F_ENERGY_ERR = 0
F_MOMENTUM_ERR = 1


@njit(cache=True)
def _cell_id(cx, cy, cz, ncell):
    return (cx * ncell[1] + cy) * ncell[2] + cz


@njit(cache=True)
def link(i, cid, head, nxt, prv):
    h = head[cid]
    nxt[i] = h
    prv[i] = -1
    if h >= 0:
        prv[h] = i
    head[cid] = i


@njit(cache=True)
def unlink(i, cid, head, nxt, prv):
    p = prv[i]
    n = nxt[i]
    if p >= 0:
        nxt[p] = n
    else:
        head[cid] = n
    if n >= 0:
        prv[n] = p
    nxt[i] = -1
    prv[i] = -1


@njit(cache=True)
def build_cells(r, cell, ncell, width, head, nxt, prv):
    head[:] = -1
    for i in range(r.shape[0]):
        for d in range(3):
            c = int(r[i, d] / width[d])
            if c < 0:
                c = 0
            if c >= ncell[d]:
                c = ncell[d] - 1
            cell[i, d] = c
        link(i, _cell_id(cell[i, 0], cell[i, 1], cell[i, 2], ncell), head, nxt, prv)


# --- indexed heap -----------------------------------------------------------

@njit(cache=True)
def _swap(a, b, heap, hpos):
    pa = heap[a]
    pb = heap[b]
    heap[a] = pb
    heap[b] = pa
    hpos[pb] = a
    hpos[pa] = b


@njit(cache=True)
def _sift_up(k, heap, hpos, key):
    while k > 0:
        parent = (k - 1) >> 1
        if key[heap[k]] < key[heap[parent]]:
            _swap(k, parent, heap, hpos)
            k = parent
        else:
            break


@njit(cache=True)
def _sift_down(k, heap, hpos, key):
    n = heap.shape[0]
    while True:
        left = 2 * k + 1
        if left >= n:
            break
        best = left
        right = left + 1
        if right < n and key[heap[right]] < key[heap[left]]:
            best = right
        if key[heap[best]] < key[heap[k]]:
            _swap(k, best, heap, hpos)
            k = best
        else:
            break


@njit(cache=True)
def heap_update(i, heap, hpos, key):
    k = hpos[i]
    _sift_up(k, heap, hpos, key)
    _sift_down(hpos[i], heap, hpos, key)


@njit(cache=True)
def heap_build(heap, hpos, key):
    n = heap.shape[0]
    for k in range(n):
        heap[k] = k
        hpos[k] = k
    for k in range(n // 2 - 1, -1, -1):
        _sift_down(k, heap, hpos, key)


# --- prediction -------------------------------------------------------------

@njit(cache=True)
def predict(i, t, r, v, tl, tag, cell, ncell, width, box, sigma, mixed_mode,
            head, nxt, count, ev_t, ev_p, ev_c):
    """Store the earliest event of particle ``i`` as seen from time ``t``."""
    best_t = np.inf
    best_p = NO_EVENT
    best_c = 0
    sig2 = sigma * sigma
    dti = t - tl[i]
    xi = r[i, 0] + v[i, 0] * dti
    yi = r[i, 1] + v[i, 1] * dti
    zi = r[i, 2] + v[i, 2] * dti

    # cell crossings
    for d in range(3):
        vd = v[i, d]
        pos = r[i, d] + vd * dti
        if vd > 0.0:
            if d == 2 and cell[i, 2] == ncell[2] - 1:
                continue
            dt = ((cell[i, d] + 1) * width[d] - pos) / vd
        elif vd < 0.0:
            if d == 2 and cell[i, 2] == 0:
                continue
            dt = (cell[i, d] * width[d] - pos) / vd
        else:
            continue
        if dt < 0.0:
            dt = 0.0
        if t + dt < best_t:
            best_t = t + dt
            best_p = CROSS_X - d

    # z walls
    vz = v[i, 2]
    if vz > 0.0:
        dt = (box[2] - 0.5 * sigma - zi) / vz
    elif vz < 0.0:
        dt = (0.5 * sigma - zi) / vz
    else:
        dt = np.inf
    if dt < 0.0:
        dt = 0.0
    if t + dt < best_t:
        best_t = t + dt
        best_p = WALL

    # pair collisions against the 27 neighbouring cells
    for ox in range(-1, 2):
        cx = cell[i, 0] + ox
        if cx < 0:
            cx += ncell[0]
        elif cx >= ncell[0]:
            cx -= ncell[0]
        for oy in range(-1, 2):
            cy = cell[i, 1] + oy
            if cy < 0:
                cy += ncell[1]
            elif cy >= ncell[1]:
                cy -= ncell[1]
            for oz in range(-1, 2):
                cz = cell[i, 2] + oz
                if cz < 0 or cz >= ncell[2]:
                    continue
                m = head[_cell_id(cx, cy, cz, ncell)]
                while m >= 0:
                    if m != i:
                        if mixed_mode == MIXED_PASS and tag[i] > 0 and tag[m] > 0 \
                                and tag[i] != tag[m]:
                            m = nxt[m]
                            continue
                        dtm = t - tl[m]
                        rx = xi - (r[m, 0] + v[m, 0] * dtm)
                        ry = yi - (r[m, 1] + v[m, 1] * dtm)
                        rz = zi - (r[m, 2] + v[m, 2] * dtm)
                        rx -= box[0] * np.rint(rx / box[0])
                        ry -= box[1] * np.rint(ry / box[1])
                        vx = v[i, 0] - v[m, 0]
                        vy = v[i, 1] - v[m, 1]
                        vz = v[i, 2] - v[m, 2]
                        b = rx * vx + ry * vy + rz * vz
                        if b < 0.0:
                            vv = vx * vx + vy * vy + vz * vz
                            disc = b * b - vv * (rx * rx + ry * ry + rz * rz - sig2)
                            if disc > 0.0:
                                dt = (-b - np.sqrt(disc)) / vv
                                if dt < 0.0:
                                    dt = 0.0
                                if t + dt < best_t:
                                    best_t = t + dt
                                    best_p = m
                                    best_c = count[m]
                    m = nxt[m]
    ev_t[i] = best_t
    ev_p[i] = best_p
    ev_c[i] = best_c


@njit(cache=True)
def predict_all(t, r, v, tl, tag, cell, ncell, width, box, sigma, mixed_mode,
                head, nxt, count, ev_t, ev_p, ev_c):
    for i in range(r.shape[0]):
        predict(i, t, r, v, tl, tag, cell, ncell, width, box, sigma, mixed_mode,
                head, nxt, count, ev_t, ev_p, ev_c)


@njit(cache=True)
def _advance(i, t, r, v, tl):
    dt = t - tl[i]
    r[i, 0] += v[i, 0] * dt
    r[i, 1] += v[i, 1] * dt
    r[i, 2] += v[i, 2] * dt
    tl[i] = t


@njit(cache=True)
def run_until(t_stop, r, v, tl, tag, cell, ncell, width, box, sigma,
              contagion, mixed_mode, head, nxt, prv, count,
              ev_t, ev_p, ev_c, heap, hpos, istats, fstats):
    """Process every event with time < ``t_stop``.

    Returns 0 on success, 1 if an event lies in the past (queue corrupted).
    """
    t_now = 0.0
    for k in range(r.shape[0]):
        if tl[k] > t_now:
            t_now = tl[k]
    while True:
        i = heap[0]
        te = ev_t[i]
        if te >= t_stop:
            return 0
        if te < t_now - 1e-9:
            return 1
        t_now = te
        p = ev_p[i]
        istats[S_EVENTS] += 1
        if p >= 0:
            j = p
            if count[j] != ev_c[i]:
                predict(i, te, r, v, tl, tag, cell, ncell, width, box, sigma, mixed_mode,
                        head, nxt, count, ev_t, ev_p, ev_c)
                heap_update(i, heap, hpos, ev_t)
                continue
            _advance(i, te, r, v, tl)
            _advance(j, te, r, v, tl)
            rx = r[i, 0] - r[j, 0]
            ry = r[i, 1] - r[j, 1]
            rz = r[i, 2] - r[j, 2]
            rx -= box[0] * np.rint(rx / box[0])
            ry -= box[1] * np.rint(ry / box[1])
            rn = np.sqrt(rx * rx + ry * ry + rz * rz)
            nx = rx / rn
            ny = ry / rn
            nz = rz / rn
            e0 = 0.0
            p0 = 0.0
            for d in range(3):
                e0 += v[i, d] * v[i, d] + v[j, d] * v[j, d]
            px0 = v[i, 0] + v[j, 0]
            py0 = v[i, 1] + v[j, 1]
            pz0 = v[i, 2] + v[j, 2]
            bij = (v[i, 0] - v[j, 0]) * nx + (v[i, 1] - v[j, 1]) * ny + (v[i, 2] - v[j, 2]) * nz
            v[i, 0] -= bij * nx
            v[i, 1] -= bij * ny
            v[i, 2] -= bij * nz
            v[j, 0] += bij * nx
            v[j, 1] += bij * ny
            v[j, 2] += bij * nz
            e1 = 0.0
            for d in range(3):
                e1 += v[i, d] * v[i, d] + v[j, d] * v[j, d]
            err = abs(e1 - e0) / e0
            if err > fstats[F_ENERGY_ERR]:
                fstats[F_ENERGY_ERR] = err
            p0 = np.sqrt(px0 * px0 + py0 * py0 + pz0 * pz0) + np.sqrt(e0)
            perr = (abs(v[i, 0] + v[j, 0] - px0) + abs(v[i, 1] + v[j, 1] - py0)
                    + abs(v[i, 2] + v[j, 2] - pz0)) / p0
            if perr > fstats[F_MOMENTUM_ERR]:
                fstats[F_MOMENTUM_ERR] = perr
            if contagion:
                if tag[i] == 0 and tag[j] > 0:
                    tag[i] = tag[j]
                    istats[S_INFECTIONS] += 1
                elif tag[j] == 0 and tag[i] > 0:
                    tag[j] = tag[i]
                    istats[S_INFECTIONS] += 1
            count[i] += 1
            count[j] += 1
            istats[S_COLLISIONS] += 1
            predict(i, te, r, v, tl, tag, cell, ncell, width, box, sigma, mixed_mode,
                    head, nxt, count, ev_t, ev_p, ev_c)
            heap_update(i, heap, hpos, ev_t)
            predict(j, te, r, v, tl, tag, cell, ncell, width, box, sigma, mixed_mode,
                    head, nxt, count, ev_t, ev_p, ev_c)
            heap_update(j, heap, hpos, ev_t)
        elif p == WALL:
            _advance(i, te, r, v, tl)
            v[i, 2] = -v[i, 2]
            count[i] += 1
            istats[S_WALLS] += 1
            predict(i, te, r, v, tl, tag, cell, ncell, width, box, sigma, mixed_mode,
                    head, nxt, count, ev_t, ev_p, ev_c)
            heap_update(i, heap, hpos, ev_t)
        elif p <= CROSS_X and p >= CROSS_X - 2:
            d = CROSS_X - p
            _advance(i, te, r, v, tl)
            old = _cell_id(cell[i, 0], cell[i, 1], cell[i, 2], ncell)
            unlink(i, old, head, nxt, prv)
            if v[i, d] > 0.0:
                c = cell[i, d] + 1
                if c == ncell[d]:
                    c = 0
                    r[i, d] -= box[d]
            else:
                c = cell[i, d] - 1
                if c < 0:
                    c = ncell[d] - 1
                    r[i, d] += box[d]
            cell[i, d] = c
            link(i, _cell_id(cell[i, 0], cell[i, 1], cell[i, 2], ncell), head, nxt, prv)
            istats[S_CROSSINGS] += 1
            predict(i, te, r, v, tl, tag, cell, ncell, width, box, sigma, mixed_mode,
                    head, nxt, count, ev_t, ev_p, ev_c)
            heap_update(i, heap, hpos, ev_t)
        else:
            return 1
