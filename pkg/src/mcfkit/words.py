"""Event words for 1-dimensional Legendrian tangle fronts.

A tangle is an ordered list of events read left to right: crossings,
cusps, handleslides and basepoints, together with the Maslov potentials of
the strands entering from the left.  Positions are 1-based from the top
strand.  Handleslide coefficients and basepoint multipliers are stored
with respect to left-to-right traversal of the base interval.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fields import Field, FieldError


class WordError(ValueError):
    """Structural problem in a tangle word."""


@dataclass(frozen=True)
class Crossing:
    k: int


@dataclass(frozen=True)
class LeftCusp:
    k: int
    m: int  # potential of the lower new sheet; upper sheet gets m+1


@dataclass(frozen=True)
class RightCusp:
    k: int


@dataclass(frozen=True)
class Handleslide:
    i: int
    j: int
    b: object  # scalar


@dataclass(frozen=True)
class Basepoint:
    k: int
    t: object  # nonzero scalar, left-to-right continuation multiplier


@dataclass(frozen=True)
class SpinPoint:
    k: int  # multiplier -1; only in characteristic != 2


Event = object  # union of the above


@dataclass(frozen=True)
class TangleWord:
    rho: int
    field: Field
    left_mu: tuple
    events: tuple
    closed: bool = False
    d0: tuple = ()  # ((i, j, coeff), ...) entries of the initial differential

    def degree(self, m: int) -> int:
        return m % self.rho if self.rho else m

    def n_left(self) -> int:
        return len(self.left_mu)


@dataclass
class StrandProfile:
    """Per-gap strand data and global curve tracing for a word."""

    gap_mu: list  # gap index (0..len(events)) -> tuple of potentials
    right_mu: tuple
    right_cusps: int
    components: int
    endpoint_partner: dict  # ('L'|'R', pos) -> ('L'|'R', pos) for open strands
    closure_permutation: list | None  # 1-based images, when L/R counts match

    def strand_counts(self):
        return [len(m) for m in self.gap_mu]


def _deg(rho: int, m: int) -> int:
    return m % rho if rho else m


def validate_word(w: TangleWord) -> StrandProfile:
    """Check structural validity and compute the strand profile."""
    rho, field = w.rho, w.field
    if rho < 0:
        raise WordError("grading modulus must be non-negative")
    mu = [_deg(rho, m) for m in w.left_mu]
    gap_mu = [tuple(mu)]

    # union-find over strand segment ids
    parent: list[int] = []

    def fresh() -> int:
        parent.append(len(parent))
        return len(parent) - 1

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int):
        parent[find(x)] = find(y)

    cur = [fresh() for _ in mu]
    left_ids = list(cur)
    right_cusps = 0

    for idx, e in enumerate(w.events):
        n = len(mu)
        if isinstance(e, Crossing):
            k = e.k
            if not 1 <= k <= n - 1:
                raise WordError(f"event {idx}: crossing position {k} out of range (n={n})")
            mu[k - 1], mu[k] = mu[k], mu[k - 1]
            cur[k - 1], cur[k] = cur[k], cur[k - 1]
        elif isinstance(e, LeftCusp):
            k = e.k
            if not 1 <= k <= n + 1:
                raise WordError(f"event {idx}: left cusp position {k} out of range (n={n})")
            m = _deg(rho, e.m)
            up = _deg(rho, m + 1)
            mu[k - 1:k - 1] = [up, m]
            a, b = fresh(), fresh()
            union(a, b)
            cur[k - 1:k - 1] = [a, b]
        elif isinstance(e, RightCusp):
            k = e.k
            if not 1 <= k <= n - 1:
                raise WordError(f"event {idx}: right cusp position {k} out of range (n={n})")
            if mu[k - 1] != _deg(rho, mu[k] + 1):
                raise WordError(
                    f"event {idx}: right cusp at {k} needs potentials offset by 1, "
                    f"got ({mu[k-1]}, {mu[k]})"
                )
            union(cur[k - 1], cur[k])
            del mu[k - 1:k + 1]
            del cur[k - 1:k + 1]
            right_cusps += 1
        elif isinstance(e, Handleslide):
            i, j = e.i, e.j
            if not (1 <= i < j <= n):
                raise WordError(f"event {idx}: handleslide endpoints ({i},{j}) out of range (n={n})")
            if mu[i - 1] != mu[j - 1]:
                raise WordError(
                    f"event {idx}: handleslide needs equal potentials, "
                    f"got ({mu[i-1]}, {mu[j-1]})"
                )
        elif isinstance(e, Basepoint):
            k = e.k
            if not 1 <= k <= n:
                raise WordError(f"event {idx}: basepoint position {k} out of range (n={n})")
            if field.is_zero(e.t):
                raise WordError(f"event {idx}: basepoint multiplier must be nonzero")
        elif isinstance(e, SpinPoint):
            if field.char == 2:
                raise WordError(
                    f"event {idx}: spin basepoint forbidden in characteristic 2"
                )
            k = e.k
            if not 1 <= k <= n:
                raise WordError(f"event {idx}: spin point position {k} out of range (n={n})")
        else:
            raise WordError(f"event {idx}: unknown event {e!r}")
        gap_mu.append(tuple(mu))

    right_ids = list(cur)
    if w.closed:
        if tuple(mu) != tuple(gap_mu[0]):
            raise WordError(
                f"closed word boundary mismatch: left {gap_mu[0]}, right {tuple(mu)}"
            )
        for a, b in zip(left_ids, right_ids):
            union(a, b)

    components = len({find(x) for x in range(len(parent))})

    endpoint_partner: dict = {}
    closure_permutation = None
    if not w.closed:
        by_class: dict[int, list] = {}
        for i, s in enumerate(left_ids):
            by_class.setdefault(find(s), []).append(("L", i + 1))
        for i, s in enumerate(right_ids):
            by_class.setdefault(find(s), []).append(("R", i + 1))
        for eps in by_class.values():
            if len(eps) == 2:
                endpoint_partner[eps[0]] = eps[1]
                endpoint_partner[eps[1]] = eps[0]
            elif len(eps) != 0:
                raise WordError("strand tracing is not a pairing (internal error)")
        if len(left_ids) == len(right_ids):
            perm = []
            ok = True
            for i in range(len(left_ids)):
                p = endpoint_partner.get(("L", i + 1))
                if p is None or p[0] != "R":
                    ok = False
                    break
                perm.append(p[1])
            closure_permutation = perm if ok else None

    return StrandProfile(
        gap_mu=gap_mu,
        right_mu=tuple(mu),
        right_cusps=right_cusps,
        components=components,
        endpoint_partner=endpoint_partner,
        closure_permutation=closure_permutation,
    )


# -- word-level operations -------------------------------------------------


def concat(a: TangleWord, b: TangleWord) -> TangleWord:
    if a.closed or b.closed:
        raise WordError("can only concatenate interval words")
    if a.field != b.field or a.rho != b.rho:
        raise WordError("field/grading mismatch in concatenation")
    if b.d0:
        raise WordError("right factor of a concatenation must not carry d0 entries")
    pa = validate_word(a)
    if pa.right_mu != tuple(_deg(a.rho, m) for m in b.left_mu):
        raise WordError(
            f"boundary mismatch: {pa.right_mu} vs {tuple(b.left_mu)}"
        )
    return TangleWord(
        a.rho, a.field, tuple(a.left_mu), a.events + b.events, False, a.d0
    )


def reverse(a: TangleWord) -> TangleWord:
    """Mirror across a vertical line: reversed events, negated handleslide
    coefficients, inverted basepoint multipliers."""
    if a.closed:
        raise WordError("reverse acts on interval words")
    if a.d0:
        raise WordError("reverse requires a zero initial differential")
    prof = validate_word(a)
    f = a.field
    out = []
    for idx in range(len(a.events) - 1, -1, -1):
        e = a.events[idx]
        if isinstance(e, Crossing):
            out.append(e)
        elif isinstance(e, LeftCusp):
            out.append(RightCusp(e.k))
        elif isinstance(e, RightCusp):
            lower = prof.gap_mu[idx][e.k]  # potential of sheet k+1 before the cusp
            out.append(LeftCusp(e.k, lower))
        elif isinstance(e, Handleslide):
            out.append(Handleslide(e.i, e.j, f.neg(e.b)))
        elif isinstance(e, Basepoint):
            out.append(Basepoint(e.k, f.inv(e.t)))
        elif isinstance(e, SpinPoint):
            out.append(e)
    return TangleWord(a.rho, a.field, prof.right_mu, tuple(out), False, ())


def close(a: TangleWord) -> TangleWord:
    if a.closed:
        raise WordError("word already closed")
    prof = validate_word(a)
    if prof.right_mu != tuple(_deg(a.rho, m) for m in a.left_mu):
        raise WordError(
            f"cannot close: boundary potentials differ ({a.left_mu} vs {prof.right_mu})"
        )
    return TangleWord(a.rho, a.field, tuple(a.left_mu), a.events, True, a.d0)


def cut(a: TangleWord) -> TangleWord:
    """Forget the closing identification, keeping the same cut point."""
    if not a.closed:
        raise WordError("cut acts on closed words")
    return TangleWord(a.rho, a.field, tuple(a.left_mu), a.events, False, a.d0)


def rotate(a: TangleWord, steps: int, new_d0: tuple) -> TangleWord:
    """Move the cut point of a closed word past `steps` leading events."""
    if not a.closed:
        raise WordError("rotate acts on closed words")
    prof = validate_word(a)
    steps %= max(1, len(a.events))
    return TangleWord(
        a.rho,
        a.field,
        prof.gap_mu[steps],
        a.events[steps:] + a.events[:steps],
        True,
        new_d0,
    )


def trivial_word(field: Field, rho: int, mu) -> TangleWord:
    return TangleWord(rho, field, tuple(_deg(rho, m) for m in mu), (), False, ())


# -- DSL ---------------------------------------------------------------------


def _tokenize(text: str):
    toks = []
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        col = 1
        i = 0
        while i < len(body):
            c = body[i]
            if c.isspace():
                i += 1
                continue
            if c in "[],()":
                toks.append((c, ln, i + 1))
                i += 1
                continue
            j = i
            while j < len(body) and not body[j].isspace() and body[j] not in "[],()":
                j += 1
            toks.append((body[i:j], ln, i + 1))
            i = j
    return toks


class _TokenStream:
    def __init__(self, toks):
        self.toks = toks
        self.at = 0

    def peek(self):
        return self.toks[self.at][0] if self.at < len(self.toks) else None

    def next(self, what="token"):
        if self.at >= len(self.toks):
            last = self.toks[-1] if self.toks else ("", 0, 0)
            raise WordError(f"line {last[1]}:{last[2]}: expected {what}, found end of input")
        t = self.toks[self.at]
        self.at += 1
        return t

    def expect(self, lit):
        t, ln, col = self.next(repr(lit))
        if t != lit:
            raise WordError(f"line {ln}:{col}: expected {lit!r}, found {t!r}")
        return t

    def err(self, msg):
        if self.at < len(self.toks):
            _, ln, col = self.toks[self.at]
            raise WordError(f"line {ln}:{col}: {msg}")
        raise WordError(msg)


def parse_tangle(text: str) -> TangleWord:
    """Parse the tangle DSL.  The grammar:

    tangle := header "events:" event*
    header := "rho=" INT "field=" FIELD "mu=" "[" INT ("," INT)* "]" ["closed"]
    event  := "x" POS | "lc" POS INT | "rc" POS
            | "hs" POS POS SCALAR | "bp" POS SCALAR | "sp" POS
            | "d0" "(" POS "," POS "," SCALAR ")"
    """
    ts = _TokenStream(_tokenize(text))

    def kv(key):
        t, ln, col = ts.next(f"{key}=...")
        if t.startswith(key + "="):
            rest = t[len(key) + 1:]
            if rest:
                return rest, ln, col
            t2, ln, col = ts.next("value")
            return t2, ln, col
        raise WordError(f"line {ln}:{col}: expected {key}=..., found {t!r}")

    v, ln, col = kv("rho")
    try:
        rho = int(v)
    except ValueError:
        raise WordError(f"line {ln}:{col}: bad rho {v!r}") from None
    if rho < 0:
        raise WordError(f"line {ln}:{col}: rho must be non-negative")

    v, ln, col = kv("field")
    if ts.peek() == "(":  # the tokenizer split "GF(p)" at the parentheses
        ts.expect("(")
        inner, _, _ = ts.next("field modulus")
        ts.expect(")")
        v = f"{v}({inner})"
    try:
        field = Field.parse(v)
    except FieldError as e:
        raise WordError(f"line {ln}:{col}: {e}") from None

    t, ln, col = ts.next("mu=[...]")
    if t == "mu=" or t == "mu":
        pass
    elif t.startswith("mu="):
        ts.at -= 1
        ts.toks[ts.at] = (t[3:], ln, col)
    else:
        raise WordError(f"line {ln}:{col}: expected mu=[...], found {t!r}")
    ts.expect("[")
    mu = []
    if ts.peek() != "]":
        while True:
            t, ln, col = ts.next("integer potential")
            try:
                mu.append(int(t))
            except ValueError:
                raise WordError(f"line {ln}:{col}: bad potential {t!r}") from None
            if ts.peek() == ",":
                ts.expect(",")
                continue
            break
    ts.expect("]")

    closed = False
    if ts.peek() == "closed":
        ts.next()
        closed = True

    t, ln, col = ts.next("'events:'")
    if t not in ("events:", "events"):
        raise WordError(f"line {ln}:{col}: expected 'events:', found {t!r}")
    if t == "events":
        ts.expect(":") if ts.peek() == ":" else ts.err("expected ':' after events")

    def pos(what="position"):
        t, ln, col = ts.next(what)
        try:
            v = int(t)
        except ValueError:
            raise WordError(f"line {ln}:{col}: bad {what} {t!r}") from None
        if v < 1:
            raise WordError(f"line {ln}:{col}: {what} must be >= 1")
        return v

    def scalar():
        t, ln, col = ts.next("scalar")
        neg = False
        if t == "-":
            neg, (t, ln, col) = True, ts.next("scalar")
        try:
            v = field.parse_scalar(t)
        except (ValueError, ZeroDivisionError):
            raise WordError(f"line {ln}:{col}: bad scalar {t!r}") from None
        return field.neg(v) if neg else v

    events = []
    d0 = []
    while ts.peek() is not None:
        t, ln, col = ts.next("event")
        if t == "x":
            events.append(Crossing(pos()))
        elif t == "lc":
            k = pos()
            t2, l2, c2 = ts.next("potential")
            try:
                m = int(t2)
            except ValueError:
                raise WordError(f"line {l2}:{c2}: bad potential {t2!r}") from None
            events.append(LeftCusp(k, m % rho if rho else m))
        elif t == "rc":
            events.append(RightCusp(pos()))
        elif t == "hs":
            i = pos("upper endpoint")
            j = pos("lower endpoint")
            events.append(Handleslide(i, j, scalar()))
        elif t == "bp":
            events.append(Basepoint(pos(), scalar()))
        elif t == "sp":
            events.append(SpinPoint(pos()))
        elif t == "d0":
            ts.expect("(")
            i = pos()
            ts.expect(",")
            j = pos()
            ts.expect(",")
            c = scalar()
            ts.expect(")")
            d0.append((i, j, c))
        else:
            raise WordError(f"line {ln}:{col}: unknown event {t!r}")

    w = TangleWord(
        rho, field, tuple(m % rho if rho else m for m in mu), tuple(events),
        closed, tuple(d0),
    )
    validate_word(w)
    return w


def serialize_tangle(w: TangleWord) -> str:
    f = w.field
    head = f"rho={w.rho} field={f.spec()} mu=[{','.join(str(m) for m in w.left_mu)}]"
    if w.closed:
        head += " closed"
    lines = [head, "events:"]
    for i, j, c in w.d0:
        lines.append(f"  d0({i},{j},{f.show(c)})")
    for e in w.events:
        if isinstance(e, Crossing):
            lines.append(f"  x {e.k}")
        elif isinstance(e, LeftCusp):
            lines.append(f"  lc {e.k} {e.m}")
        elif isinstance(e, RightCusp):
            lines.append(f"  rc {e.k}")
        elif isinstance(e, Handleslide):
            lines.append(f"  hs {e.i} {e.j} {f.show(e.b)}")
        elif isinstance(e, Basepoint):
            lines.append(f"  bp {e.k} {f.show(e.t)}")
        elif isinstance(e, SpinPoint):
            lines.append(f"  sp {e.k}")
    return "\n".join(lines) + "\n"


def word_json(w: TangleWord) -> dict:
    f = w.field
    evs = []
    for e in w.events:
        if isinstance(e, Crossing):
            evs.append({"type": "x", "k": e.k})
        elif isinstance(e, LeftCusp):
            evs.append({"type": "lc", "k": e.k, "m": e.m})
        elif isinstance(e, RightCusp):
            evs.append({"type": "rc", "k": e.k})
        elif isinstance(e, Handleslide):
            evs.append({"type": "hs", "i": e.i, "j": e.j, "b": f.show(e.b)})
        elif isinstance(e, Basepoint):
            evs.append({"type": "bp", "k": e.k, "t": f.show(e.t)})
        elif isinstance(e, SpinPoint):
            evs.append({"type": "sp", "k": e.k})
    return {
        "rho": w.rho,
        "field": f.spec(),
        "mu": list(w.left_mu),
        "closed": w.closed,
        "d0": [[i, j, f.show(c)] for i, j, c in w.d0],
        "events": evs,
    }


def word_from_json(data: dict) -> TangleWord:
    field = Field.parse(data["field"])
    rho = int(data["rho"])
    events = []
    for e in data["events"]:
        t = e["type"]
        if t == "x":
            events.append(Crossing(int(e["k"])))
        elif t == "lc":
            events.append(LeftCusp(int(e["k"]), int(e["m"])))
        elif t == "rc":
            events.append(RightCusp(int(e["k"])))
        elif t == "hs":
            events.append(Handleslide(int(e["i"]), int(e["j"]), field.parse_scalar(e["b"])))
        elif t == "bp":
            events.append(Basepoint(int(e["k"]), field.parse_scalar(e["t"])))
        elif t == "sp":
            events.append(SpinPoint(int(e["k"])))
        else:
            raise WordError(f"unknown event type {t!r}")
    d0 = tuple(
        (int(i), int(j), field.parse_scalar(c)) for i, j, c in data.get("d0", [])
    )
    w = TangleWord(
        rho, field, tuple(int(m) for m in data["mu"]), tuple(events),
        bool(data.get("closed", False)), d0,
    )
    validate_word(w)
    return w
