"""Propagation of differential families through an event word.

Each gap between consecutive events carries a strictly upper triangular
differential of degree +1 (mod rho).  Crossing, cusp, handleslide and
basepoint events transform it; the transformations double as the chain
maps whose composite is the continuation map.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

from .fields import Field
from .matrices import Matrix, GradedMatrix
from .words import (
    Basepoint,
    Crossing,
    Handleslide,
    LeftCusp,
    RightCusp,
    SpinPoint,
    StrandProfile,
    TangleWord,
    validate_word,
)


class MCFError(ValueError):
    """The word admits no consistent family of differentials."""


@dataclass(frozen=True)
class Differential:
    matrix: Matrix
    mu: tuple

    def n(self) -> int:
        return len(self.mu)


def check_differential(d: Differential, rho: int, where: str = ""):
    """d strictly upper triangular, d^2 = 0, degree +1 (mod rho)."""
    A = d.matrix
    n = d.n()
    if A.rows != n or A.cols != n:
        raise MCFError(f"{where}: differential size {A.rows}x{A.cols} != {n} strands")
    for i in range(n):
        for j in range(n):
            x = A.a[i][j]
            if not x:
                continue
            if i >= j:
                raise MCFError(f"{where}: entry ({i+1},{j+1}) below the diagonal")
            need = (d.mu[j] + 1) % rho if rho else d.mu[j] + 1
            if d.mu[i] != need:
                raise MCFError(
                    f"{where}: entry ({i+1},{j+1}) violates the degree condition "
                    f"(mu={d.mu[i]} vs {d.mu[j]}+1)"
                )
    sq = A * A
    if not sq.is_zero():
        raise MCFError(f"{where}: d^2 != 0")


def _step_differential(field: Field, rho: int, A: Matrix, mu, e, where: str) -> Matrix:
    """Differential on the right of event e, given A on its left."""
    n = len(mu)
    if isinstance(e, Crossing):
        k = e.k - 1
        if A.a[k][k + 1]:
            raise MCFError(
                f"{where}: crossing at {e.k} needs a zero ({e.k},{e.k+1}) entry, "
                f"got {field.show(A.a[k][k+1])}"
            )
        B = A.copy()
        B.a[k], B.a[k + 1] = B.a[k + 1], B.a[k]
        for row in B.a:
            row[k], row[k + 1] = row[k + 1], row[k]
        return B
    if isinstance(e, LeftCusp):
        k = e.k - 1
        z = field.zero()
        out = []
        for i in range(n + 2):
            row = []
            oi = i if i < k else i - 2
            for j in range(n + 2):
                oj = j if j < k else j - 2
                if i in (k, k + 1) or j in (k, k + 1):
                    row.append(z)
                else:
                    row.append(A.a[oi][oj])
            out.append(row)
        out[k][k + 1] = field.one()
        return Matrix(field, out)
    if isinstance(e, RightCusp):
        k = e.k - 1
        if A.a[k][k + 1] != field.one():
            raise MCFError(
                f"{where}: right cusp at {e.k} needs entry exactly 1, "
                f"got {field.show(A.a[k][k+1])}"
            )
        for i in range(n):
            for j in range(n):
                if (i in (k, k + 1)) != (j in (k, k + 1)):
                    if A.a[i][j]:
                        raise MCFError(
                            f"{where}: right cusp at {e.k}: differential does not "
                            f"split off the cusp sheets (entry ({i+1},{j+1}) nonzero)"
                        )
        keep = [i for i in range(n) if i not in (k, k + 1)]
        return A.submatrix(keep, keep)
    if isinstance(e, Handleslide):
        i, j, b = e.i - 1, e.j - 1, e.b
        B = A.copy()
        # (I + b E_ij) A (I - b E_ij); the E A E term vanishes (A[j][i] = 0)
        for c in range(A.cols):
            if A.a[j][c]:
                B.a[i][c] = field.add(B.a[i][c], field.mul(b, A.a[j][c]))
        for r in range(A.rows):
            if A.a[r][i]:
                B.a[r][j] = field.sub(B.a[r][j], field.mul(b, A.a[r][i]))
        return B
    if isinstance(e, (Basepoint, SpinPoint)):
        k = (e.k - 1)
        t = e.t if isinstance(e, Basepoint) else field.neg(field.one())
        tinv = field.inv(t)
        B = A.copy()
        B.a[k] = [field.mul(t, x) for x in B.a[k]]
        for row in B.a:
            row[k] = field.mul(row[k], tinv)
        return B
    raise MCFError(f"{where}: unknown event {e!r}")


def event_matrix(field: Field, e, n: int) -> Matrix:
    """Chain map of a single event, as a matrix from the left complex to
    the right complex (left-to-right traversal)."""
    if isinstance(e, Crossing):
        k = e.k - 1
        images = list(range(n))
        images[k], images[k + 1] = k + 1, k
        return Matrix.permutation(field, images)
    if isinstance(e, LeftCusp):
        k = e.k - 1
        M = Matrix.zero(field, n + 2, n)
        one = field.one()
        for j in range(n):
            M.a[j if j < k else j + 2][j] = one
        return M
    if isinstance(e, RightCusp):
        k = e.k - 1
        M = Matrix.zero(field, n - 2, n)
        one = field.one()
        for j in range(n):
            if j < k:
                M.a[j][j] = one
            elif j > k + 1:
                M.a[j - 2][j] = one
        return M
    if isinstance(e, Handleslide):
        return Matrix.transvection(field, n, e.i - 1, e.j - 1, e.b)
    if isinstance(e, Basepoint):
        d = [field.one()] * n
        d[e.k - 1] = e.t
        return Matrix.diagonal(field, d)
    if isinstance(e, SpinPoint):
        d = [field.one()] * n
        d[e.k - 1] = field.neg(field.one())
        return Matrix.diagonal(field, d)
    raise MCFError(f"unknown event {e!r}")


@dataclass
class ValidatedMCF:
    word: TangleWord
    profile: StrandProfile
    regions: list  # Differential per gap, len(events)+1
    full: bool

    @property
    def field(self) -> Field:
        return self.word.field

    @property
    def rho(self) -> int:
        return self.word.rho

    def n_gaps(self) -> int:
        return len(self.regions)


def initial_differential(w: TangleWord, profile: StrandProfile | None = None) -> Differential:
    profile = profile or validate_word(w)
    mu0 = profile.gap_mu[0]
    f = w.field
    A = Matrix.zero(f, len(mu0))
    for i, j, c in w.d0:
        if not (1 <= i < j <= len(mu0)):
            raise MCFError(f"d0 entry ({i},{j}) out of range")
        A.a[i - 1][j - 1] = f.add(A.a[i - 1][j - 1], c)
    return Differential(A, mu0)


def propagate(w: TangleWord, d0: Differential | None = None) -> ValidatedMCF:
    """Propagate the initial differential through the word; certify axioms."""
    profile = validate_word(w)
    if d0 is None:
        d0 = initial_differential(w, profile)
    if tuple(d0.mu) != profile.gap_mu[0]:
        raise MCFError("initial differential potentials do not match the left boundary")
    check_differential(d0, w.rho, "gap 0")
    f = w.field
    regions = [d0]
    A = d0.matrix
    for idx, e in enumerate(w.events):
        mu_l = profile.gap_mu[idx]
        A = _step_differential(f, w.rho, A, mu_l, e, f"event {idx}")
        d = Differential(A, profile.gap_mu[idx + 1])
        check_differential(d, w.rho, f"gap {idx+1}")
        regions.append(d)
    if w.closed and regions[-1].matrix != d0.matrix:
        raise MCFError("closed-word holonomy mismatch: propagating once around "
                       "does not return the initial differential")
    full = (
        not w.closed
        and regions[0].matrix.is_zero()
        and regions[-1].matrix.is_zero()
    )
    return ValidatedMCF(w, profile, regions, full)


def continuation_matrix(m: ValidatedMCF, from_gap: int, to_gap: int) -> Matrix:
    """Composite chain map from gap `from_gap` to gap `to_gap` (left to
    right; indices may exceed the gap count for closed words, wrapping)."""
    N = len(m.word.events)
    if to_gap < from_gap:
        raise ValueError("to_gap must be >= from_gap")
    if not m.word.closed and not (0 <= from_gap <= to_gap <= N):
        raise ValueError(f"gap range ({from_gap},{to_gap}) out of bounds")
    f = m.field
    n = len(m.profile.gap_mu[from_gap % (N + 1) if not m.word.closed else from_gap % N])
    if m.word.closed:
        n = len(m.profile.gap_mu[from_gap % N])
    M = Matrix.identity(f, n)
    for g in range(from_gap, to_gap):
        e = m.word.events[g % N] if m.word.closed else m.word.events[g]
        M = event_matrix(f, e, M.rows) * M
    # chain map certificate: d_to * f = f * d_from
    d_from = m.regions[from_gap % N if m.word.closed else from_gap].matrix
    d_to = m.regions[to_gap % N if m.word.closed else to_gap].matrix
    if (d_to * M) != (M * d_from):
        raise AssertionError("continuation is not a chain map (internal error)")
    return M


def monodromy(m: ValidatedMCF) -> GradedMatrix:
    """Graded monodromy matrix of a full interval tangle."""
    if m.word.closed:
        raise MCFError("monodromy of an interval word; use cohomology_monodromy "
                       "for closed words")
    if not m.full:
        raise MCFError("monodromy requires a full tangle (zero boundary differentials)")
    f = m.field
    M = continuation_matrix(m, 0, len(m.word.events))
    mu_l = m.profile.gap_mu[0]
    mu_r = m.profile.right_mu
    if sorted(mu_l) != sorted(mu_r):
        raise MCFError("boundary potential multisets differ; no graded monodromy")
    for i in range(len(mu_r)):
        for j in range(len(mu_l)):
            if M.a[i][j] and mu_r[i] != mu_l[j]:
                raise AssertionError("monodromy entry between different degrees")
    blocks = {}
    for d in sorted(set(mu_l)):
        rows = [i for i, x in enumerate(mu_r) if x == d]
        cols = [j for j, x in enumerate(mu_l) if x == d]
        blocks[d] = M.submatrix(rows, cols)
    return GradedMatrix(f, m.rho, blocks)


@dataclass
class FiberCohomology:
    graded_dims: dict
    cycles: dict  # degree -> list of column vectors (in full complex coords)
    boundaries: dict
    barannikov: object = None  # filled by barannikov.attach_basis


def fiber_cohomology(m: ValidatedMCF, gap: int) -> FiberCohomology:
    d = m.regions[gap]
    f = m.field
    mu = d.mu
    n = len(mu)
    degs = sorted(set(mu))
    dims, cycles, boundaries = {}, {}, {}
    for l in degs:
        idx = [i for i, x in enumerate(mu) if x == l]
        up = (l + 1) % m.rho if m.rho else l + 1
        dn = (l - 1) % m.rho if m.rho else l - 1
        idx_up = [i for i, x in enumerate(mu) if x == up]
        idx_dn = [i for i, x in enumerate(mu) if x == dn]
        if idx_up:
            dl = d.matrix.submatrix(idx_up, idx)  # d restricted to degree l
            _, _, ker, _ = dl.rank_and_basis()
        else:  # no generators one degree up: everything is a cycle
            ker = [[f.one() if t == s else f.zero() for t in range(len(idx))]
                   for s in range(len(idx))]
        cyc = []
        for v in ker:
            w = [f.zero()] * n
            for pos, i in enumerate(idx):
                w[i] = v[pos]
            cyc.append(w)
        if idx_dn:
            ddn = d.matrix.submatrix(idx, idx_dn)
            _, _, _, img = ddn.rank_and_basis()
        else:
            img = []
        bnd = []
        for v in img:
            w = [f.zero()] * n
            for pos, i in enumerate(idx):
                w[i] = v[pos]
            bnd.append(w)
        dims[l] = len(cyc) - len(bnd)
        cycles[l] = cyc
        boundaries[l] = bnd
    return FiberCohomology({l: d_ for l, d_ in dims.items() if d_}, cycles, boundaries)


def cohomology_monodromy(m: ValidatedMCF) -> GradedMatrix:
    """Induced map on fiber cohomology at the cut of a closed word, in the
    fixed-generator basis of the Barannikov form of the cut differential.
    Only its conjugacy class is an invariant of the closed tangle."""
    if not m.word.closed:
        raise MCFError("cohomology monodromy needs a closed word")
    from .barannikov import barannikov_form  # local import to avoid a cycle

    N = len(m.word.events)
    f = m.field
    d0 = m.regions[0]
    M = continuation_matrix(m, 0, N)
    bf = barannikov_form(d0)
    fixed = [j for j in range(d0.n()) if bf.involution[j] == j]
    # conjugate the chain map into normal-form coordinates
    G = bf.change_of_basis * M * bf.change_of_basis.inverse()
    lower = {i for i in range(d0.n()) if bf.involution[i] > i}
    for b in fixed:
        col = [G.a[r][b] for r in range(d0.n())]
        for r, x in enumerate(col):
            if x and r not in lower and bf.involution[r] != r:
                raise AssertionError("image of a cycle is not a cycle")
    blocks = {}
    for l in sorted({d0.mu[j] for j in fixed}):
        idx = [j for j in fixed if d0.mu[j] == l]
        blocks[l] = Matrix(f, [[G.a[r][c] for c in idx] for r in idx])
    return GradedMatrix(f, m.rho, blocks)
