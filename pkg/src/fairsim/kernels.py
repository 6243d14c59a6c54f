"""Slotted CSMA/CA contention kernel for one allocation period.

Two implementations of the same state machine:

* ``contend_loops`` - scalar loops, compiled with numba when enabled;
* ``contend_numpy`` - per-round vectorised numpy, the fallback.

Both consume the same pre-drawn uniform buffer in the same order, so for a
given input they return identical integers and floats. ``contend`` is bound
to one of them according to ``FAIRSIM_DISABLE_NUMBA``.

State arrays (mutated in place, one entry per flow):
    bc        remaining backoff slots, -1 = not drawn yet
    cw        current contention window
    queued    frames waiting, including the one in progress
    rem_bits  bits left of the head-of-line frame
Carry (a transmission crossing the period end):
    carry_f = [busy seconds left, payload seconds left]
    carry_i = [kind (0 none, 1 success, 2 collision), winner flow, winner payload bits]
Outputs, all zeroed by the caller:
    frames_done, collisions  per flow, int
    payload_air, occupied    per flow, seconds
    channel = [success busy, collision busy, idle] seconds, [collision events]
"""

from __future__ import annotations

import math

import numpy as np

from ._jit import HAS_NUMBA, USE_NUMBA

NONE, SUCCESS, COLLISION = 0, 1, 2
_BITS_EPS = 1e-6


def draws_bound(n_flows: int, period: float, slot: float, sifs: float) -> int:
    """Upper bound on backoff draws inside one period.

    Every round spends at least one AIFS (>= sifs + slot) idle, and at most
    all flows redraw per round.
    """
    rounds = int(math.ceil(period / (sifs + slot))) + 2
    return n_flows * (rounds + 1)


def contend_loops(aifsn, rate, frame_bits, mpdu_bits, slot, sifs, overhead, cw_min, cw_max, period,
                  bc, cw, queued, rem_bits, carry_f, carry_i, rnd,
                  frames_done, collisions, payload_air, occupied, channel):
    n = aifsn.shape[0]
    win = np.zeros(n, dtype=np.bool_)
    t = 0.0
    cursor = 0

    # finish (or continue) a transmission carried over from the last period
    if carry_i[0] != NONE:
        left = carry_f[0]
        portion = left if left <= period else period
        pay = carry_f[1] * (portion / left)
        kind = carry_i[0]
        w = carry_i[1]
        if kind == SUCCESS:
            channel[0] += portion
            payload_air[w] += pay
            occupied[w] += portion
        else:
            channel[1] += portion
        carry_f[0] = left - portion
        carry_f[1] = carry_f[1] - pay
        t = portion
        if left <= period:
            if kind == SUCCESS:
                rem_bits[w] -= carry_i[2]
                if rem_bits[w] <= _BITS_EPS:
                    frames_done[w] += 1
                    queued[w] -= 1
                    rem_bits[w] = frame_bits[w] if queued[w] > 0 else 0.0
            carry_i[0] = NONE
            carry_i[1] = -1
            carry_i[2] = 0
            carry_f[0] = 0.0
            carry_f[1] = 0.0
        else:
            return cursor

    while t < period:
        # draw backoff for flows that need one, ascending flow order
        any_flow = False
        best = 1 << 62
        for f in range(n):
            if rate[f] > 0.0 and queued[f] > 0:
                if bc[f] < 0:
                    bc[f] = int(math.floor(rnd[cursor] * cw[f]))
                    cursor += 1
                c = aifsn[f] + bc[f]
                if c < best:
                    best = c
                any_flow = True
        if not any_flow:
            channel[2] += period - t
            break

        wait = sifs + best * slot
        if t + wait > period:
            # medium idle to the period end; backoff counts down past AIFS
            elapsed = 0
            if period - t > sifs:
                elapsed = int(math.floor((period - t - sifs) / slot))
            for f in range(n):
                if rate[f] > 0.0 and queued[f] > 0:
                    dec = elapsed - aifsn[f]
                    if dec > 0:
                        bc[f] -= dec
            channel[2] += period - t
            break
        t += wait
        channel[2] += wait

        n_win = 0
        winner = -1
        longest = 0.0
        for f in range(n):
            win[f] = False
            if rate[f] > 0.0 and queued[f] > 0:
                if aifsn[f] + bc[f] == best:
                    win[f] = True
                    n_win += 1
                    winner = f
                    b = rem_bits[f]
                    if mpdu_bits > 0.0 and mpdu_bits < b:
                        b = mpdu_bits
                    pt = b / rate[f]
                    if pt > longest:
                        longest = pt
                else:
                    dec = best - aifsn[f]
                    if dec > 0:
                        bc[f] -= dec

        dur = overhead + longest
        if n_win == 1:
            w = winner
            bits = rem_bits[w]
            if mpdu_bits > 0.0 and mpdu_bits < bits:
                bits = mpdu_bits
            cw[w] = cw_min
            bc[w] = -1
            if t + dur <= period:
                channel[0] += dur
                payload_air[w] += longest
                occupied[w] += dur
                t += dur
                rem_bits[w] -= bits
                if rem_bits[w] <= _BITS_EPS:
                    frames_done[w] += 1
                    queued[w] -= 1
                    rem_bits[w] = frame_bits[w] if queued[w] > 0 else 0.0
            else:
                portion = period - t
                pay = longest * (portion / dur)
                channel[0] += portion
                payload_air[w] += pay
                occupied[w] += portion
                carry_i[0] = SUCCESS
                carry_i[1] = w
                carry_i[2] = int(bits)
                carry_f[0] = dur - portion
                carry_f[1] = longest - pay
                t = period
        else:
            channel[3] += 1.0
            for f in range(n):
                if win[f]:
                    collisions[f] += 1
                    nxt = 2 * cw[f] + 1
                    cw[f] = nxt if nxt < cw_max else cw_max
                    bc[f] = -1
                    occupied[f] += dur if t + dur <= period else period - t
            if t + dur <= period:
                channel[1] += dur
                t += dur
            else:
                channel[1] += period - t
                carry_i[0] = COLLISION
                carry_i[1] = -1
                carry_i[2] = 0
                carry_f[0] = dur - (period - t)
                carry_f[1] = 0.0
                t = period
    return cursor


def contend_numpy(aifsn, rate, frame_bits, mpdu_bits, slot, sifs, overhead, cw_min, cw_max, period,
                  bc, cw, queued, rem_bits, carry_f, carry_i, rnd,
                  frames_done, collisions, payload_air, occupied, channel):
    t = 0.0
    cursor = 0

    if carry_i[0] != NONE:
        left = carry_f[0]
        portion = left if left <= period else period
        pay = carry_f[1] * (portion / left)
        kind = int(carry_i[0])
        w = int(carry_i[1])
        if kind == SUCCESS:
            channel[0] += portion
            payload_air[w] += pay
            occupied[w] += portion
        else:
            channel[1] += portion
        carry_f[0] = left - portion
        carry_f[1] = carry_f[1] - pay
        t = portion
        if left <= period:
            if kind == SUCCESS:
                rem_bits[w] -= carry_i[2]
                if rem_bits[w] <= _BITS_EPS:
                    frames_done[w] += 1
                    queued[w] -= 1
                    rem_bits[w] = frame_bits[w] if queued[w] > 0 else 0.0
            carry_i[:] = (NONE, -1, 0)
            carry_f[:] = 0.0
        else:
            return cursor

    live = rate > 0.0
    while t < period:
        contending = live & (queued > 0)
        if not contending.any():
            channel[2] += period - t
            break
        fresh = np.flatnonzero(contending & (bc < 0))
        if fresh.size:
            bc[fresh] = np.floor(rnd[cursor:cursor + fresh.size] * cw[fresh]).astype(np.int64)
            cursor += fresh.size
        count = aifsn + bc
        best = int(count[contending].min())

        wait = sifs + best * slot
        if t + wait > period:
            elapsed = int(math.floor((period - t - sifs) / slot)) if period - t > sifs else 0
            dec = elapsed - aifsn
            m = contending & (dec > 0)
            bc[m] -= dec[m]
            channel[2] += period - t
            break
        t += wait
        channel[2] += wait

        win = contending & (count == best)
        losers = contending & ~win
        dec = best - aifsn
        m = losers & (dec > 0)
        bc[m] -= dec[m]

        idx = np.flatnonzero(win)
        bits = rem_bits[idx]
        if mpdu_bits > 0.0:
            bits = np.minimum(bits, mpdu_bits)
        pts = bits / rate[idx]
        longest = float(pts.max())
        dur = overhead + longest
        if idx.size == 1:
            w = int(idx[0])
            b = float(bits[0])
            cw[w] = cw_min
            bc[w] = -1
            if t + dur <= period:
                channel[0] += dur
                payload_air[w] += longest
                occupied[w] += dur
                t += dur
                rem_bits[w] -= b
                if rem_bits[w] <= _BITS_EPS:
                    frames_done[w] += 1
                    queued[w] -= 1
                    rem_bits[w] = frame_bits[w] if queued[w] > 0 else 0.0
            else:
                portion = period - t
                pay = longest * (portion / dur)
                channel[0] += portion
                payload_air[w] += pay
                occupied[w] += portion
                carry_i[:] = (SUCCESS, w, int(b))
                carry_f[:] = (dur - portion, longest - pay)
                t = period
        else:
            channel[3] += 1.0
            collisions[idx] += 1
            cw[idx] = np.minimum(2 * cw[idx] + 1, cw_max)
            bc[idx] = -1
            fits = t + dur <= period
            occupied[idx] += dur if fits else period - t
            if fits:
                channel[1] += dur
                t += dur
            else:
                channel[1] += period - t
                carry_i[:] = (COLLISION, -1, 0)
                carry_f[:] = (dur - (period - t), 0.0)
                t = period
    return cursor


if HAS_NUMBA:
    import numba as _nb

    contend_numba = _nb.njit(cache=True)(contend_loops)
else:  # pragma: no cover
    contend_numba = None

contend = contend_numba if USE_NUMBA else contend_numpy
