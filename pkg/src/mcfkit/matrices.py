"""Dense exact matrices over a Field, plus the Frobenius (rational canonical)
form used as the conjugacy certificate for monodromy classes."""

from __future__ import annotations

from .fields import Field, FieldError


class Matrix:
    """Immutable-by-convention dense matrix with entries in one field."""

    __slots__ = ("field", "rows", "cols", "a")

    def __init__(self, field: Field, entries):
        self.field = field
        self.a = [list(r) for r in entries]
        self.rows = len(self.a)
        self.cols = len(self.a[0]) if self.a else 0
        for r in self.a:
            if len(r) != self.cols:
                raise ValueError("ragged matrix")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(field: Field, rows: int, cols: int | None = None) -> "Matrix":
        cols = rows if cols is None else cols
        z = field.zero()
        return Matrix(field, [[z] * cols for _ in range(rows)])

    @staticmethod
    def identity(field: Field, n: int) -> "Matrix":
        m = Matrix.zero(field, n, n)
        one = field.one()
        for i in range(n):
            m.a[i][i] = one
        return m

    @staticmethod
    def unit(field: Field, n: int, i: int, j: int, coeff=None) -> "Matrix":
        """coeff * E_{i,j} (0-based indices)."""
        m = Matrix.zero(field, n, n)
        m.a[i][j] = field.one() if coeff is None else coeff
        return m

    @staticmethod
    def transvection(field: Field, n: int, i: int, j: int, b) -> "Matrix":
        """I + b * E_{i,j} (0-based)."""
        m = Matrix.identity(field, n)
        m.a[i][j] = field.add(m.a[i][j], b)
        return m

    @staticmethod
    def diagonal(field: Field, diag) -> "Matrix":
        n = len(diag)
        m = Matrix.zero(field, n, n)
        for i, d in enumerate(diag):
            m.a[i][i] = d
        return m

    @staticmethod
    def permutation(field: Field, images) -> "Matrix":
        """Q_pi with Q[pi(j)][j] = 1, where images[j] = pi(j) (0-based)."""
        n = len(images)
        m = Matrix.zero(field, n, n)
        one = field.one()
        for j, i in enumerate(images):
            m.a[i][j] = one
        return m

    def copy(self) -> "Matrix":
        return Matrix(self.field, self.a)

    # -- arithmetic --------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.field == other.field
            and self.a == other.a
        )

    def __hash__(self):
        return hash((self.field, tuple(tuple(r) for r in self.a)))

    def __repr__(self):
        return f"Matrix({self.field.spec()}, {self.a})"

    def __add__(self, other: "Matrix") -> "Matrix":
        f = self.field
        return Matrix(
            f,
            [
                [f.add(x, y) for x, y in zip(r1, r2)]
                for r1, r2 in zip(self.a, other.a)
            ],
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        f = self.field
        return Matrix(
            f,
            [
                [f.sub(x, y) for x, y in zip(r1, r2)]
                for r1, r2 in zip(self.a, other.a)
            ],
        )

    def __mul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"dim mismatch {self.rows}x{self.cols} * {other.rows}x{other.cols}")
        f = self.field
        zero = f.zero()
        ob = other.a
        out = []
        for r in self.a:
            row = []
            for j in range(other.cols):
                s = zero
                for k, x in enumerate(r):
                    if x:
                        s = f.add(s, f.mul(x, ob[k][j]))
                row.append(s)
            out.append(row)
        return Matrix(f, out)

    def scale(self, c) -> "Matrix":
        f = self.field
        return Matrix(f, [[f.mul(c, x) for x in r] for r in self.a])

    def is_zero(self) -> bool:
        return all(not x for r in self.a for x in r)

    def is_identity(self) -> bool:
        one = self.field.one()
        return self.rows == self.cols and all(
            self.a[i][j] == (one if i == j else self.field.zero())
            for i in range(self.rows)
            for j in range(self.cols)
        )

    # -- elimination -------------------------------------------------------

    def rref(self):
        """Reduced row echelon form; returns (R, pivot column list)."""
        f = self.field
        m = [row[:] for row in self.a]
        pivots = []
        r = 0
        for c in range(self.cols):
            pr = next((i for i in range(r, self.rows) if m[i][c]), None)
            if pr is None:
                continue
            m[r], m[pr] = m[pr], m[r]
            inv = f.inv(m[r][c])
            m[r] = [f.mul(inv, x) for x in m[r]]
            for i in range(self.rows):
                if i != r and m[i][c]:
                    t = m[i][c]
                    m[i] = [f.sub(x, f.mul(t, y)) for x, y in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == self.rows:
                break
        return Matrix(f, m), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def rank_and_basis(self):
        """(rank, pivot columns, kernel basis, image basis).

        Kernel vectors are length-``cols`` column vectors; the image basis
        is the set of pivot columns of the original matrix.
        """
        f = self.field
        R, pivots = self.rref()
        rank = len(pivots)
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        kernel = []
        for fc in free:
            v = [f.zero()] * self.cols
            v[fc] = f.one()
            for r, pc in enumerate(pivots):
                v[pc] = f.neg(R.a[r][fc])
            kernel.append(v)
        image = [[self.a[i][c] for i in range(self.rows)] for c in pivots]
        return rank, pivots, kernel, image

    def inverse(self) -> "Matrix":
        if self.rows != self.cols:
            raise ValueError("inverse of non-square matrix")
        f = self.field
        n = self.rows
        aug = [self.a[i][:] + Matrix.identity(f, n).a[i] for i in range(n)]
        R, pivots = Matrix(f, aug).rref()
        if pivots[:n] != list(range(n)):
            raise ZeroDivisionError("matrix is singular")
        return Matrix(f, [R.a[i][n:] for i in range(n)])

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows

    def transpose(self) -> "Matrix":
        return Matrix(self.field, [list(c) for c in zip(*self.a)]) if self.a else self

    def submatrix(self, row_idx, col_idx) -> "Matrix":
        return Matrix(self.field, [[self.a[i][j] for j in col_idx] for i in row_idx])

    def apply(self, vec):
        """Matrix times column vector (list of scalars)."""
        f = self.field
        out = []
        for r in self.a:
            s = f.zero()
            for x, v in zip(r, vec):
                if x and v:
                    s = f.add(s, f.mul(x, v))
            out.append(s)
        return out


# -- polynomials over a field (dense, low-to-high), for the Frobenius form --


def _pstrip(p):
    while p and not p[-1]:
        p.pop()
    return p


def _pmul(f: Field, p, q):
    if not p or not q:
        return []
    out = [f.zero()] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if not x:
            continue
        for j, y in enumerate(q):
            if y:
                out[i + j] = f.add(out[i + j], f.mul(x, y))
    return _pstrip(out)


def _psub(f: Field, p, q):
    n = max(len(p), len(q))
    out = []
    for i in range(n):
        a = p[i] if i < len(p) else f.zero()
        b = q[i] if i < len(q) else f.zero()
        out.append(f.sub(a, b))
    return _pstrip(out)


def _pdivmod(f: Field, p, q):
    p = p[:]
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [f.zero()] * max(0, len(p) - len(q) + 1)
    inv = f.inv(q[-1])
    while len(p) >= len(q):
        c = f.mul(p[-1], inv)
        d = len(p) - len(q)
        quot[d] = c
        for i, y in enumerate(q):
            p[d + i] = f.sub(p[d + i], f.mul(c, y))
        _pstrip(p)
        if not p:
            break
    return _pstrip(quot), p


def _pmonic(f: Field, p):
    if not p:
        return p
    inv = f.inv(p[-1])
    return [f.mul(inv, x) for x in p]


def rational_canonical_form(m: Matrix) -> Matrix:
    """Frobenius normal form: block diagonal of companion matrices of the
    invariant factors of xI - m.  Two square matrices over the same field
    are similar iff their forms are equal."""
    if m.rows != m.cols:
        raise ValueError("rational canonical form needs a square matrix")
    f = m.field
    n = m.rows
    if n == 0:
        return m.copy()
    # xI - A as a polynomial matrix over F[x]
    P = [
        [
            _pstrip(
                [f.neg(m.a[i][j])] + ([f.one()] if i == j else [])
            )
            for j in range(n)
        ]
        for i in range(n)
    ]

    def deg(p):
        return len(p) - 1 if p else -1

    # Smith normal form over the Euclidean domain F[x]
    for t in range(n):
        while True:
            pos = [
                (deg(P[i][j]), i, j)
                for i in range(t, n)
                for j in range(t, n)
                if P[i][j]
            ]
            if not pos:
                break
            _, pi, pj = min(pos)
            P[t], P[pi] = P[pi], P[t]
            for row in P:
                row[t], row[pj] = row[pj], row[t]
            changed = False
            for i in range(t + 1, n):
                if P[i][t]:
                    q, _ = _pdivmod(f, P[i][t], P[t][t])
                    for j in range(t, n):
                        P[i][j] = _psub(f, P[i][j], _pmul(f, q, P[t][j]))
                    changed = True
            for j in range(t + 1, n):
                if P[t][j]:
                    q, _ = _pdivmod(f, P[t][j], P[t][t])
                    for i in range(t, n):
                        P[i][j] = _psub(f, P[i][j], _pmul(f, q, P[i][t]))
                    changed = True
            if changed and (
                any(P[i][t] for i in range(t + 1, n))
                or any(P[t][j] for j in range(t + 1, n))
            ):
                continue  # remainders became new smaller pivot candidates
            # divisibility: pivot must divide every remaining entry
            ok = True
            for i in range(t + 1, n):
                for j in range(t + 1, n):
                    if P[i][j]:
                        _, rem = _pdivmod(f, P[i][j], P[t][t])
                        if rem:
                            for jj in range(t, n):
                                P[t][jj] = _psub(
                                    f, P[t][jj], _pmul(f, [f.neg(f.one())], P[i][jj])
                                )
                            ok = False
                            break
                if not ok:
                    break
            if ok:
                break
        if P[t][t]:
            P[t][t] = _pmonic(f, P[t][t])

    factors = [P[i][i] for i in range(n) if deg(P[i][i]) >= 1]
    factors.sort(key=lambda p: (len(p), [f.show(c) for c in p]))
    out = Matrix.zero(f, n, n)
    at = 0
    for p in factors:
        d = deg(p)
        for k in range(d - 1):
            out.a[at + k + 1][at + k] = f.one()
        for k in range(d):
            out.a[at + k][at + d - 1] = f.neg(p[k])
        at += d
    if at != n:
        raise AssertionError("invariant factor degrees do not sum to n")
    return out


class GradedMatrix:
    """Invertible block family indexed by degree (int; reduced mod rho>0)."""

    __slots__ = ("field", "rho", "blocks")

    def __init__(self, field: Field, rho: int, blocks: dict):
        self.field = field
        self.rho = rho
        self.blocks = {}
        for d, b in blocks.items():
            d = d % rho if rho else d
            if b.rows != b.cols:
                raise ValueError(f"block {d} not square")
            self.blocks[d] = b
        for d, b in self.blocks.items():
            if not b.is_invertible():
                raise ValueError(f"block {d} is singular")

    def graded_dims(self) -> dict:
        return {d: b.rows for d, b in sorted(self.blocks.items()) if b.rows}

    def __eq__(self, other):
        if not isinstance(other, GradedMatrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.rho == other.rho
            and {d: b for d, b in self.blocks.items() if b.rows}
            == {d: b for d, b in other.blocks.items() if b.rows}
        )

    def __repr__(self):
        return f"GradedMatrix(rho={self.rho}, blocks={self.blocks})"

    def __mul__(self, other: "GradedMatrix") -> "GradedMatrix":
        if self.rho != other.rho or self.field != other.field:
            raise ValueError("graded matrix mismatch")
        degs = set(self.blocks) | set(other.blocks)
        out = {}
        for d in degs:
            a = self.blocks.get(d)
            b = other.blocks.get(d)
            if a is None or b is None:
                raise ValueError(f"degree {d} present on one side only")
            out[d] = a * b
        return GradedMatrix(self.field, self.rho, out)

    def inverse(self) -> "GradedMatrix":
        return GradedMatrix(
            self.field, self.rho, {d: b.inverse() for d, b in self.blocks.items()}
        )

    def canonical_conjugacy_form(self) -> "GradedMatrix":
        return GradedMatrix(
            self.field,
            self.rho,
            {d: rational_canonical_form(b) for d, b in self.blocks.items()},
        )


def parse_graded_matrix(field: Field, rho: int, data: dict) -> GradedMatrix:
    """From the JSON form {"blocks": {"deg": [[scalar strings]]}}."""
    blocks = {}
    for k, rows in data.get("blocks", data).items():
        blocks[int(k)] = Matrix(
            field, [[field.parse_scalar(str(x)) for x in r] for r in rows]
        )
    return GradedMatrix(field, rho, blocks)


def graded_matrix_json(gm: GradedMatrix) -> dict:
    f = gm.field
    return {
        "graded_dims": {str(d): n for d, n in gm.graded_dims().items()},
        "blocks": {
            str(d): [[f.show(x) for x in r] for r in b.a]
            for d, b in sorted(gm.blocks.items())
            if b.rows
        },
    }
