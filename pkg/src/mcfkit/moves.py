"""The elementary move calculus on slices.

Every step is a local rewrite of the event word, certified by full
re-propagation.  A MoveTrace (initial word + step list) is the artifact's
representation of an augmented Legendrian cobordism; verify_trace replays
it and fails loudly at the first illegal step.

Move ids and their forward direction:

  E1  remove an adjacent (i,j)-handleslide pair with opposite coefficients
  E2  merge two adjacent (i,j)-handleslides (backward: split)
  E3  handleslide moves right past a crossing or cusp
  E4  commute two disjoint-enough handleslides
  E5  commute two chained handleslides, emitting the product handleslide
  E6  handleslide moves right past a basepoint (coefficient scaled)
  E7  remove a super-handleslide batch (backward: create)
  F1  remove an adjacent basepoint pair with inverse multipliers
  F2  merge two adjacent homology basepoints on one strand
  F3  basepoint moves right past a front event ('around' hops a cusp point)
  F4  commute two adjacent basepoints
  R0  commute two adjacent front events with disjoint z-spans
  R1  remove a swallowtail tail, emitting a spin point (backward: create)
  R2  absorb two crossings into a cusp (backward: emit)
  R3  braid relation on three adjacent crossings
  C1  remove an adjacent lc/rc unknot bubble (backward: insert)
  C2  remove an adjacent rc/lc pair (backward: pinch two strands)
  C3  remove an adjacent clasp (backward: insert)
  rotate  move the cut point of a closed word (bookkeeping, not a move)
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .matrices import Matrix
from .mcf import Differential, MCFError, ValidatedMCF, propagate
from .words import (
    Basepoint,
    Crossing,
    Handleslide,
    LeftCusp,
    RightCusp,
    SpinPoint,
    TangleWord,
    rotate as rotate_word,
)


class MoveError(ValueError):
    pass


@dataclass(frozen=True)
class MoveStep:
    move: str
    forward: bool
    at: int
    params: tuple = ()


@dataclass
class ApplyResult:
    mcf: ValidatedMCF
    window: tuple  # (start, removed_count, inserted_count) in old event indices

    def remap(self, old_index: int):
        a, removed, inserted = self.window
        if old_index < a:
            return old_index
        if old_index < a + removed:
            return None
        return old_index - removed + inserted


@dataclass
class MoveTrace:
    initial: ValidatedMCF
    steps: list


def _is_front(e) -> bool:
    return isinstance(e, (Crossing, LeftCusp, RightCusp))


def _is_bp(e) -> bool:
    return isinstance(e, (Basepoint, SpinPoint))


def _bp_mult(field, e):
    return e.t if isinstance(e, Basepoint) else field.neg(field.one())


# -- position bookkeeping for commuting front events ------------------------


def commute_front(eL, eR):
    """Given adjacent front events [eL, eR] with disjoint z-spans, return
    the swapped pair [eR', eL'] with positions adjusted, or raise."""
    if isinstance(eL, Crossing):
        k = eL.k
        if isinstance(eR, Crossing):
            if abs(eR.k - k) < 2:
                raise MoveError(f"crossings at {k},{eR.k} interleave")
            return eR, eL
        if isinstance(eR, LeftCusp):
            l = eR.k
            if l <= k:
                return eR, Crossing(k + 2)
            if l >= k + 2:
                return eR, eL
            raise MoveError("cusp splits the crossing strands")
        if isinstance(eR, RightCusp):
            l = eR.k
            if l + 1 < k:
                return eR, Crossing(k - 2)
            if l > k + 1:
                return eR, eL
            raise MoveError("right cusp touches the crossing strands")
    if isinstance(eL, LeftCusp):
        k, m = eL.k, eL.m
        if isinstance(eR, Crossing):
            l = eR.k
            if l + 1 < k:
                return eR, eL
            if l > k + 1:
                return Crossing(l - 2), eL
            raise MoveError("crossing touches the new cusp strands")
        if isinstance(eR, LeftCusp):
            l = eR.k
            if l < k:
                return eR, LeftCusp(k + 2, m)
            if l >= k + 2:
                return LeftCusp(l - 2, eR.m), eL
            raise MoveError("cusps interleave")
        if isinstance(eR, RightCusp):
            l = eR.k
            if l + 1 < k:
                return eR, LeftCusp(k - 2, m)
            if l > k + 1:
                return RightCusp(l - 2), eL
            raise MoveError("cusps touch")
    if isinstance(eL, RightCusp):
        k = eL.k
        if isinstance(eR, Crossing):
            l = eR.k
            if l + 1 < k:
                return eR, eL
            if l >= k:
                return Crossing(l + 2), eL
            raise MoveError("crossing touches the dying strands")
        if isinstance(eR, LeftCusp):
            l = eR.k
            if l < k:
                return eR, RightCusp(k + 2)
            if l >= k:
                return LeftCusp(l + 2, eR.m), eL
        if isinstance(eR, RightCusp):
            l = eR.k
            if l + 1 < k:
                return eR, RightCusp(k - 2)
            if l >= k:
                return RightCusp(l + 2), eL
            raise MoveError("cusps touch")
    raise MoveError(f"cannot commute {eL!r} and {eR!r}")


def _hs_past_front(field, hs: Handleslide, ev, moving_right: bool) -> Handleslide:
    """Relabel a handleslide's endpoints across a front event (E3)."""
    i, j = hs.i, hs.j

    def cross(k, x):
        if x == k:
            return k + 1
        if x == k + 1:
            return k
        return x

    if isinstance(ev, Crossing):
        k = ev.k
        if {i, j} == {k, k + 1}:
            raise MoveError("handleslide endpoints coincide with the crossing strands")
        return Handleslide(cross(k, i), cross(k, j), hs.b)
    if isinstance(ev, LeftCusp):
        k = ev.k
        if moving_right:  # relabel from the (n)-side to the (n+2)-side
            ni = i if i < k else i + 2
            nj = j if j < k else j + 2
            return Handleslide(ni, nj, hs.b)
        if i in (k, k + 1) or j in (k, k + 1):
            raise MoveError("handleslide endpoint on a cusp sheet")
        ni = i if i < k else i - 2
        nj = j if j < k else j - 2
        return Handleslide(ni, nj, hs.b)
    if isinstance(ev, RightCusp):
        k = ev.k
        if moving_right:
            if i in (k, k + 1) or j in (k, k + 1):
                raise MoveError("handleslide endpoint on a cusp sheet")
            ni = i if i < k else i - 2
            nj = j if j < k else j - 2
            return Handleslide(ni, nj, hs.b)
        ni = i if i < k else i + 2
        nj = j if j < k else j + 2
        return Handleslide(ni, nj, hs.b)
    raise MoveError(f"not a front event: {ev!r}")


def _bp_past_front(field, bp, ev, moving_right: bool):
    """Relabel a basepoint's sheet across a front event (F3 sideways/strand)."""
    k = bp.k

    def rebuild(nk):
        return Basepoint(nk, bp.t) if isinstance(bp, Basepoint) else SpinPoint(nk)

    if isinstance(ev, Crossing):
        c = ev.k
        if k == c:
            return rebuild(c + 1)
        if k == c + 1:
            return rebuild(c)
        return bp
    if isinstance(ev, LeftCusp):
        c = ev.k
        if moving_right:
            return rebuild(k if k < c else k + 2)
        if k in (c, c + 1):
            raise MoveError("basepoint on a cusp sheet: use the 'around' variant")
        return rebuild(k if k < c else k - 2)
    if isinstance(ev, RightCusp):
        c = ev.k
        if moving_right:
            if k in (c, c + 1):
                raise MoveError("basepoint on a cusp sheet: use the 'around' variant")
            return rebuild(k if k < c else k - 2)
        return rebuild(k if k < c else k + 2)
    raise MoveError(f"not a front event: {ev!r}")


# -- R1 tail construction ----------------------------------------------------


def tail_word(field, rho, d: Differential, k: int, down: bool, reflected: bool):
    """The swallowtail event block for sheet k against the differential d
    on its left.  Upward tails sprout above the sheet, downward below."""
    n = d.n()
    if not 1 <= k <= n:
        raise MoveError(f"tail sheet {k} out of range")
    one = field.one()
    m = d.mu[k - 1]
    if not down:
        batch = []
        for i in range(1, k):
            a = d.matrix.a[i - 1][k - 1]
            if a:
                batch.append(Handleslide(i, k, field.neg(a)))
        core = [
            Handleslide(k + 1, k + 2, field.neg(one)),
            Crossing(k + 1),
            Handleslide(k + 1, k + 2, one),
        ]
        # x-mirror places the batch after the crossing block (coefficients
        # are forced by the differential either way)
        mid = batch + core if not reflected else core + batch
        return [LeftCusp(k, m)] + mid + [RightCusp(k)]
    mm = (m - 1) % rho if rho else m - 1
    batch = []
    for j in range(k + 1, n + 1):
        a = d.matrix.a[k - 1][j - 1]
        if a:
            batch.append(Handleslide(k + 2, j + 2, a))
    core = [
        Handleslide(k, k + 1, one),
        Crossing(k),
        Handleslide(k, k + 1, field.neg(one)),
    ]
    mid = batch + core if not reflected else core + batch
    return [LeftCusp(k + 1, mm)] + mid + [RightCusp(k + 1)]


# -- E7 batch ----------------------------------------------------------------


def super_handleslide_batch(field, rho, d: Differential, k: int, l: int, c):
    """Emitted handleslides of a (k,l) super-handleslide with coefficient c,
    against the differential d; canonical order (i,l) asc then (k,j) asc."""
    n = d.n()
    if not (1 <= k < l <= n):
        raise MoveError(f"super-handleslide endpoints ({k},{l}) out of range")
    need = (d.mu[l - 1] - 1) % rho if rho else d.mu[l - 1] - 1
    if d.mu[k - 1] != need:
        raise MoveError(
            f"super-handleslide needs potentials offset by -1, got "
            f"({d.mu[k-1]}, {d.mu[l-1]})"
        )
    batch = []
    for i in range(1, k):
        a = d.matrix.a[i - 1][k - 1]
        if a:
            batch.append(Handleslide(i, l, field.mul(c, a)))
    for j in range(l + 1, n + 1):
        a = d.matrix.a[l - 1][j - 1]
        if a:
            batch.append(Handleslide(k, j, field.mul(c, a)))
    # the chain-homotopy identity A C + C A = sum of batch matrices
    C = Matrix.unit(field, n, k - 1, l - 1, c)
    lhs = d.matrix * C + C * d.matrix
    rhs = Matrix.zero(field, n)
    prod = Matrix.identity(field, n)
    for h in batch:
        B = Matrix.unit(field, n, h.i - 1, h.j - 1, h.b)
        rhs = rhs + B
        prod = (Matrix.identity(field, n) + B) * prod
    if lhs != rhs or prod != Matrix.identity(field, n) + rhs:
        raise AssertionError("super-handleslide identity A·C + C·A = ΣB failed")
    return batch


# -- the move dispatcher -----------------------------------------------------


def apply_move(m: ValidatedMCF, step: MoveStep) -> ApplyResult:
    w = m.word
    es = list(w.events)
    f = m.field
    rho = m.rho
    mv, fwd, at, params = step.move, step.forward, step.at, step.params

    def need_events(a, count, what):
        if not (0 <= a and a + count <= len(es)):
            raise MoveError(f"{mv} at {a}: needs {count} events, word has {len(es)} ({what})")

    def hs_at(i, what="handleslide"):
        e = es[i]
        if not isinstance(e, Handleslide):
            raise MoveError(f"{mv} at {at}: event {i} is not a {what} ({e!r})")
        return e

    def gap_ok(g):
        if not (0 <= g <= len(es)):
            raise MoveError(f"{mv}: gap {g} out of range")

    if mv == "rotate":
        if not w.closed:
            raise MoveError("rotate applies to closed words")
        steps = at % max(1, len(es))
        dd = m.regions[steps]
        new_d0 = tuple(
            (i + 1, j + 1, dd.matrix.a[i][j])
            for i in range(dd.n())
            for j in range(dd.n())
            if dd.matrix.a[i][j]
        )
        nw = rotate_word(w, steps, new_d0)
        return ApplyResult(propagate(nw), (0, len(es), len(es)))

    a = at
    repl: list
    removed: int

    if mv == "E1":
        if fwd:
            need_events(a, 2, "handleslide pair")
            h1, h2 = hs_at(a), hs_at(a + 1)
            if (h1.i, h1.j) != (h2.i, h2.j) or f.add(h1.b, h2.b):
                raise MoveError(
                    f"E1 at {a}: not an (i,j)-pair with opposite coefficients"
                )
            repl, removed = [], 2
        else:
            gap_ok(a)
            i, j, b = params
            repl, removed = [Handleslide(i, j, b), Handleslide(i, j, f.neg(b))], 0
    elif mv == "E2":
        if fwd:
            need_events(a, 2, "handleslide pair")
            h1, h2 = hs_at(a), hs_at(a + 1)
            if (h1.i, h1.j) != (h2.i, h2.j):
                raise MoveError(f"E2 at {a}: handleslides connect different pairs")
            repl, removed = [Handleslide(h1.i, h1.j, f.add(h1.b, h2.b))], 2
        else:
            need_events(a, 1, "handleslide")
            h = hs_at(a)
            (b1,) = params
            repl, removed = [
                Handleslide(h.i, h.j, b1),
                Handleslide(h.i, h.j, f.sub(h.b, b1)),
            ], 1
    elif mv == "E3":
        need_events(a, 2, "handleslide and front event")
        if fwd:
            h, ev = hs_at(a), es[a + 1]
            if not _is_front(ev):
                raise MoveError(f"E3 at {a}: second event is not a crossing or cusp")
            repl, removed = [ev, _hs_past_front(f, h, ev, True)], 2
        else:
            ev, h = es[a], hs_at(a + 1)
            if not _is_front(ev):
                raise MoveError(f"E3 at {a}: first event is not a crossing or cusp")
            repl, removed = [_hs_past_front(f, h, ev, False), ev], 2
    elif mv == "E4":
        need_events(a, 2, "handleslide pair")
        h1, h2 = hs_at(a), hs_at(a + 1)
        if h1.j == h2.i or h1.i == h2.j:
            raise MoveError(f"E4 at {a}: handleslides are chained; use E5")
        repl, removed = [h2, h1], 2
    elif mv == "E5":
        if fwd:
            need_events(a, 2, "handleslide pair")
            h1, h2 = hs_at(a), hs_at(a + 1)
            if h1.j == h2.i:  # (i,j) then (j,k)
                prod = Handleslide(h1.i, h2.j, f.neg(f.mul(h1.b, h2.b)))
                repl, removed = [h2, prod, h1], 2
            elif h2.j == h1.i:  # (j,k) then (i,j)
                prod = Handleslide(h2.i, h1.j, f.mul(h1.b, h2.b))
                repl, removed = [h2, prod, h1], 2
            else:
                raise MoveError(f"E5 at {a}: handleslides are not chained")
        else:
            need_events(a, 3, "handleslide triple")
            h1, hp, h2 = hs_at(a), hs_at(a + 1), hs_at(a + 2)
            if h2.j == h1.i:  # [ (j,k), (i,k), (i,j) ] -> [ (i,j), (j,k) ]
                expect = f.neg(f.mul(h2.b, h1.b))
                if (hp.i, hp.j) != (h2.i, h1.j) or hp.b != expect:
                    raise MoveError(f"E5 reverse at {a}: middle handleslide mismatch")
                repl, removed = [h2, h1], 3
            elif h1.j == h2.i:  # [ (i,j), (i,k), (j,k) ] -> [ (j,k), (i,j) ]
                expect = f.mul(h2.b, h1.b)
                if (hp.i, hp.j) != (h1.i, h2.j) or hp.b != expect:
                    raise MoveError(f"E5 reverse at {a}: middle handleslide mismatch")
                repl, removed = [h2, h1], 3
            else:
                raise MoveError(f"E5 reverse at {a}: outer handleslides not chained")
    elif mv == "E6":
        need_events(a, 2, "handleslide and basepoint")
        if fwd:
            h, bp = hs_at(a), es[a + 1]
            if not _is_bp(bp):
                raise MoveError(f"E6 at {a}: second event is not a basepoint")
            t = _bp_mult(f, bp)
            b = h.b
            if bp.k == h.i:
                b = f.mul(b, t)
            if bp.k == h.j:
                b = f.mul(b, f.inv(t))
            repl, removed = [bp, Handleslide(h.i, h.j, b)], 2
        else:
            bp, h = es[a], hs_at(a + 1)
            if not _is_bp(bp):
                raise MoveError(f"E6 at {a}: first event is not a basepoint")
            t = _bp_mult(f, bp)
            b = h.b
            if bp.k == h.i:
                b = f.mul(b, f.inv(t))
            if bp.k == h.j:
                b = f.mul(b, t)
            repl, removed = [Handleslide(h.i, h.j, b), bp], 2
    elif mv == "E7":
        if fwd:
            k, l, c = params
            d = m.regions[a]
            batch = super_handleslide_batch(f, rho, d, k, l, c)
            need_events(a, len(batch), "super-handleslide batch")
            got = es[a:a + len(batch)]
            if got != batch:
                raise MoveError(
                    f"E7 at {a}: events do not match the ({k},{l}) batch with c={f.show(c)}"
                )
            repl, removed = [], len(batch)
        else:
            gap_ok(a)
            k, l, c = params
            d = m.regions[a]
            repl, removed = super_handleslide_batch(f, rho, d, k, l, c), 0
    elif mv == "F1":
        if fwd:
            need_events(a, 2, "basepoint pair")
            b1, b2 = es[a], es[a + 1]
            if not (_is_bp(b1) and _is_bp(b2)) or b1.k != b2.k:
                raise MoveError(f"F1 at {a}: not a basepoint pair on one strand")
            if type(b1) is not type(b2):
                raise MoveError(f"F1 at {a}: mixed basepoint kinds")
            if isinstance(b1, Basepoint) and f.mul(b1.t, b2.t) != f.one():
                raise MoveError(f"F1 at {a}: multipliers are not inverse")
            repl, removed = [], 2
        else:
            gap_ok(a)
            if params[0] == "sp":
                k = params[1]
                repl, removed = [SpinPoint(k), SpinPoint(k)], 0
            else:
                _, k, t = params
                repl, removed = [Basepoint(k, t), Basepoint(k, f.inv(t))], 0
    elif mv == "F2":
        if fwd:
            need_events(a, 2, "basepoint pair")
            b1, b2 = es[a], es[a + 1]
            if not (isinstance(b1, Basepoint) and isinstance(b2, Basepoint)) or b1.k != b2.k:
                raise MoveError(f"F2 at {a}: not homology basepoints on one strand")
            repl, removed = [Basepoint(b1.k, f.mul(b2.t, b1.t))], 2
        else:
            need_events(a, 1, "basepoint")
            b = es[a]
            if not isinstance(b, Basepoint):
                raise MoveError(f"F2 reverse at {a}: not a homology basepoint")
            (t1,) = params
            repl, removed = [
                Basepoint(b.k, t1),
                Basepoint(b.k, f.mul(b.t, f.inv(t1))),
            ], 1
    elif mv == "F3":
        if params and params[0] == "around":
            # hop around a cusp point; bp adjacent to the cusp on its inner side
            need_events(a, 1, "cusp")
            ev = es[a]
            if isinstance(ev, LeftCusp):
                bidx = a + 1
            elif isinstance(ev, RightCusp):
                bidx = a - 1
            else:
                raise MoveError(f"F3 around at {a}: not a cusp")
            if not (0 <= bidx < len(es)) or not _is_bp(es[bidx]):
                raise MoveError(f"F3 around at {a}: no adjacent basepoint")
            bp = es[bidx]
            c = ev.k
            if bp.k == c:
                nk = c + 1
            elif bp.k == c + 1:
                nk = c
            else:
                raise MoveError(f"F3 around at {a}: basepoint not on a cusp sheet")
            nbp = SpinPoint(nk) if isinstance(bp, SpinPoint) else Basepoint(nk, f.inv(bp.t))
            a = min(a, bidx)
            repl = [es[a], es[a + 1]]
            repl[bidx - a] = nbp
            removed = 2
        elif fwd:
            need_events(a, 2, "basepoint and front event")
            bp, ev = es[a], es[a + 1]
            if not _is_bp(bp) or not _is_front(ev):
                raise MoveError(f"F3 at {a}: expected basepoint then front event")
            repl, removed = [ev, _bp_past_front(f, bp, ev, True)], 2
        else:
            ev, bp = es[a], es[a + 1]
            if not _is_bp(bp) or not _is_front(ev):
                raise MoveError(f"F3 at {a}: expected front event then basepoint")
            repl, removed = [_bp_past_front(f, bp, ev, False), ev], 2
    elif mv == "F4":
        need_events(a, 2, "basepoint pair")
        b1, b2 = es[a], es[a + 1]
        if not (_is_bp(b1) and _is_bp(b2)):
            raise MoveError(f"F4 at {a}: not a basepoint pair")
        repl, removed = [b2, b1], 2
    elif mv == "R0":
        need_events(a, 2, "front event pair")
        e1, e2 = es[a], es[a + 1]
        if not (_is_front(e1) and _is_front(e2)):
            raise MoveError(f"R0 at {a}: not front events")
        e2n, e1n = commute_front(e1, e2)
        repl, removed = [e2n, e1n], 2
    elif mv == "R1":
        down, reflected, k = params[0] == "down", bool(params[1]), params[2]
        if fwd:
            if f.char != 2:
                need_events(a, 1, "spin point")
                sp = es[a]
                if not isinstance(sp, SpinPoint) or sp.k != k:
                    raise MoveError(f"R1 at {a}: needs a spin point on sheet {k}")
                d = m.regions[a]
                repl, removed = tail_word(f, rho, d, k, down, reflected), 1
            else:
                gap_ok(a)
                d = m.regions[a]
                repl, removed = tail_word(f, rho, d, k, down, reflected), 0
        else:
            d = m.regions[a]
            expect = tail_word(f, rho, d, k, down, reflected)
            need_events(a, len(expect), "swallowtail block")
            if es[a:a + len(expect)] != expect:
                raise MoveError(
                    f"R1 reverse at {a}: events do not match the mandated tail "
                    f"pattern for sheet {k}"
                )
            repl = [] if f.char == 2 else [SpinPoint(k)]
            removed = len(expect)
    elif mv == "R2":
        side = params[0]  # 'above' or 'below': where the new cusp lands
        if fwd:
            need_events(a, 1, "cusp")
            ev = es[a]
            n_here = len(m.profile.gap_mu[a])
            if isinstance(ev, LeftCusp):
                k = ev.k
                if side == "above":
                    if k < 2:
                        raise MoveError("R2: no strand above the cusp")
                    repl = [LeftCusp(k - 1, ev.m), Crossing(k), Crossing(k - 1)]
                else:
                    if k > n_here:
                        raise MoveError("R2: no strand below the cusp")
                    repl = [LeftCusp(k + 1, ev.m), Crossing(k), Crossing(k + 1)]
            elif isinstance(ev, RightCusp):
                k = ev.k
                if side == "above":
                    if k < 2:
                        raise MoveError("R2: no strand above the cusp")
                    repl = [Crossing(k - 1), Crossing(k), RightCusp(k - 1)]
                else:
                    if k + 2 > n_here:
                        raise MoveError("R2: no strand below the cusp")
                    repl = [Crossing(k + 1), Crossing(k), RightCusp(k + 1)]
            else:
                raise MoveError(f"R2 at {a}: not a cusp")
            removed = 1
        else:
            need_events(a, 3, "cusp with two crossings")
            e1, e2, e3 = es[a:a + 3]
            if isinstance(e1, LeftCusp) and isinstance(e2, Crossing) and isinstance(e3, Crossing):
                k = e1.k
                if side == "above" and (e2.k, e3.k) == (k + 1, k):
                    repl = [LeftCusp(k + 1, e1.m)]
                elif side == "below" and (e2.k, e3.k) == (k - 1, k):
                    repl = [LeftCusp(k - 1, e1.m)]
                else:
                    raise MoveError(f"R2 reverse at {a}: crossing pattern mismatch")
            elif isinstance(e1, Crossing) and isinstance(e2, Crossing) and isinstance(e3, RightCusp):
                k = e3.k
                if side == "above" and (e1.k, e2.k) == (k, k + 1):
                    repl = [RightCusp(k + 1)]
                elif side == "below" and (e1.k, e2.k) == (k, k - 1):
                    repl = [RightCusp(k - 1)]
                else:
                    raise MoveError(f"R2 reverse at {a}: crossing pattern mismatch")
            else:
                raise MoveError(f"R2 reverse at {a}: not a cusp-with-crossings block")
            removed = 3
    elif mv == "R3":
        need_events(a, 3, "crossing triple")
        e1, e2, e3 = es[a:a + 3]
        if not all(isinstance(e, Crossing) for e in (e1, e2, e3)):
            raise MoveError(f"R3 at {a}: not three crossings")
        if e1.k == e3.k and abs(e2.k - e1.k) == 1:
            repl = [Crossing(e2.k), Crossing(e1.k), Crossing(e2.k)]
            removed = 3
        else:
            raise MoveError(f"R3 at {a}: not a braid-relation triple")
    elif mv == "C1":
        if fwd:
            need_events(a, 2, "unknot bubble")
            e1, e2 = es[a], es[a + 1]
            if not (isinstance(e1, LeftCusp) and isinstance(e2, RightCusp) and e1.k == e2.k):
                raise MoveError(f"C1 at {a}: not an adjacent lc/rc bubble")
            repl, removed = [], 2
        else:
            gap_ok(a)
            k, mm = params
            repl, removed = [LeftCusp(k, mm), RightCusp(k)], 0
    elif mv == "C2":
        if fwd:
            need_events(a, 2, "rc/lc pair")
            e1, e2 = es[a], es[a + 1]
            if not (isinstance(e1, RightCusp) and isinstance(e2, LeftCusp) and e1.k == e2.k):
                raise MoveError(f"C2 at {a}: not an adjacent rc/lc pair")
            mu_l = m.profile.gap_mu[a]
            if mu_l[e1.k] != e2.m:
                raise MoveError(
                    f"C2 at {a}: cusp potentials differ ({mu_l[e1.k]} vs {e2.m})"
                )
            repl, removed = [], 2
        else:
            gap_ok(a)
            (k,) = params
            d = m.regions[a]
            n = d.n()
            if not 1 <= k <= n - 1:
                raise MoveError(f"C2 reverse: sheets ({k},{k+1}) out of range")
            if d.matrix.a[k - 1][k] != f.one():
                raise MoveError(
                    f"C2 reverse: differential does not split (entry "
                    f"({k},{k+1}) = {f.show(d.matrix.a[k-1][k])}, need 1)"
                )
            for i in range(n):
                for j in range(n):
                    if (i in (k - 1, k)) != (j in (k - 1, k)) and d.matrix.a[i][j]:
                        raise MoveError(
                            f"C2 reverse: sheets {k},{k+1} appear in other "
                            f"differentials (entry ({i+1},{j+1}))"
                        )
            repl, removed = [RightCusp(k), LeftCusp(k, d.mu[k])], 0
    elif mv == "C3":
        if fwd:
            need_events(a, 2, "clasp")
            e1, e2 = es[a], es[a + 1]
            if not (
                isinstance(e1, Crossing) and isinstance(e2, Crossing) and e1.k == e2.k
            ):
                raise MoveError(f"C3 at {a}: not an adjacent same-position clasp")
            repl, removed = [], 2
        else:
            gap_ok(a)
            (k,) = params
            d = m.regions[a]
            if not 1 <= k <= d.n() - 1:
                raise MoveError(f"C3 reverse: position {k} out of range")
            if d.matrix.a[k - 1][k]:
                raise MoveError(
                    f"C3 reverse: entry ({k},{k+1}) of the differential must vanish"
                )
            repl, removed = [Crossing(k), Crossing(k)], 0
    else:
        raise MoveError(f"unknown move {mv!r}")

    new_events = tuple(es[:a] + repl + es[a + removed:])
    nw = TangleWord(w.rho, w.field, w.left_mu, new_events, w.closed, w.d0)
    try:
        nm = propagate(nw)
    except (MCFError, ValueError) as e:
        raise MoveError(f"{mv} at {at}: result fails validation: {e}") from None
    return ApplyResult(nm, (a, removed, len(repl)))


def applicable_moves(m: ValidatedMCF, window=None) -> list:
    """All applicable single-event-pair moves with window (complete), plus
    the triple moves R3/R2-reverse for convenience."""
    lo, hi = window if window else (0, len(m.word.events))
    out = []
    for a in range(lo, hi - 1):
        for mv in ("E1", "E2", "E3", "E4", "E5", "E6", "F1", "F2", "F3", "F4",
                   "R0", "C1", "C2", "C3"):
            for fwd in (True, False):
                if mv in ("E1", "E2", "F1", "F2", "C1", "C2", "C3") and not fwd:
                    continue  # parametric insertions are not enumerable
                if mv in ("E4", "F4", "R0") and not fwd:
                    continue
                step = MoveStep(mv, fwd, a)
                try:
                    apply_move(m, step)
                except MoveError:
                    continue
                out.append(step)
    for a in range(lo, max(lo, hi - 2)):
        step = MoveStep("R3", True, a)
        try:
            apply_move(m, step)
            out.append(step)
        except MoveError:
            pass
    return out


def verify_trace(t: MoveTrace) -> ValidatedMCF:
    """Replay all steps; fail loudly at the first illegal one."""
    state = t.initial
    for i, step in enumerate(t.steps):
        try:
            state = apply_move(state, step).mcf
        except MoveError as e:
            raise MoveError(f"trace step {i}: {e}") from None
    return state


# -- trace (de)serialization ------------------------------------------------


def step_json(field, step: MoveStep) -> dict:
    params = []
    for p in step.params:
        if isinstance(p, (int, str, bool)):
            params.append(p)
        else:
            params.append({"scalar": field.show(p)})
    return {"move": step.move, "forward": step.forward, "at": step.at,
            "params": params}


def step_from_json(field, data: dict) -> MoveStep:
    params = []
    for p in data.get("params", []):
        if isinstance(p, dict) and "scalar" in p:
            params.append(field.parse_scalar(p["scalar"]))
        else:
            params.append(p)
    return MoveStep(data["move"], bool(data["forward"]), int(data["at"]),
                    tuple(params))


def trace_lines(t: MoveTrace, initial_name: str, initial_text: str) -> str:
    digest = hashlib.sha256(initial_text.encode()).hexdigest()
    f = t.initial.field
    lines = [json.dumps({"initial": initial_name, "sha256": digest})]
    for s in t.steps:
        lines.append(json.dumps(step_json(f, s)))
    return "\n".join(lines) + "\n"


def trace_from_lines(initial: ValidatedMCF, text: str, initial_text: str | None = None):
    rows = [json.loads(ln) for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise MoveError("empty trace file")
    head = rows[0]
    if initial_text is not None:
        digest = hashlib.sha256(initial_text.encode()).hexdigest()
        if head.get("sha256") != digest:
            raise MoveError("trace header hash does not match the initial tangle")
    f = initial.field
    return MoveTrace(initial, [step_from_json(f, r) for r in rows[1:]])
