"""Exact linear algebra for families of symmetric two-tensors.

This module works in the pair-coordinate model of Sym^2(V) for an
n-dimensional space V with basis v_1, ..., v_n: a tensor is a rational
linear combination of the products v_k v_l with 1 <= k <= l <= n, so
dim Sym^2(V) = n(n+1)/2.  Two structured families live here:

* ``tau_tensor(k, l, n)``:  v_k v_l - v_k^2 - v_l^2 + p_2  with
  p_2 = sum_j v_j^2, i.e. v_k v_l + sum_{j != k,l} v_j^2 after cancellation.
* ``sigma_tensor(w, k, l)``:  w_k w_l + w_l w_k + sum_{j != k,l} w_j w_j
  for a tuple of concrete vectors w_j, realised as a symmetric matrix.

Rank computations are exact over the rationals.  A floating mode with
singular-value thresholding exists only for interoperability with the
numerically computed tensors of :mod:`periodvar.variation`.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement

import numpy as np

from .errors import ArgumentError, DegenerateSampleError

#: Relative singular-value cutoff used by float-mode rank computations.
FLOAT_RANK_THRESHOLD = 1e-8

#: Primes used to certify full-rank results quickly before falling back to
#: rational elimination.  Both fit in int64 with room for a product of two
#: reduced entries.
_CERTIFICATE_PRIMES = (2147483647, 2147483629)

#: Bound on numerators/denominators of randomly sampled rational entries.
RANDOM_ENTRY_BOUND = 1000

#: How many times degenerate random samples are re-drawn before giving up.
REDRAW_CAP = 20


def pair_basis(n):
    """Ordered index pairs (k, l) with 1 <= k <= l <= n, lexicographically."""
    return list(combinations_with_replacement(range(1, n + 1), 2))


def sym2_dimension(n):
    """Dimension n(n+1)/2 of Sym^2 of an n-dimensional space."""
    return n * (n + 1) // 2


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    raise ArgumentError(f"exact arithmetic requires int or Fraction entries, got {type(value).__name__}")


class SymTensor:
    """Exact element of Sym^2(V), stored as coefficients over the pair basis.

    ``coeffs`` maps unordered pairs (k, l), 1 <= k <= l <= n, to rationals;
    absent pairs are zero.  Addition and scalar multiplication stay in the
    type, so spans can be computed without leaving exact arithmetic.
    """

    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs=None):
        n = int(n)
        if n < 1:
            raise ArgumentError("dimension must be at least 1")
        self.n = n
        self.coeffs = {}
        for (k, l), value in (coeffs or {}).items():
            if not (1 <= k <= l <= self.n):
                raise ArgumentError(f"pair ({k}, {l}) out of range for dimension {n}")
            value = _as_fraction(value)
            if value:
                self.coeffs[(int(k), int(l))] = value

    def __add__(self, other):
        if not isinstance(other, SymTensor) or other.n != self.n:
            return NotImplemented
        merged = dict(self.coeffs)
        for key, value in other.coeffs.items():
            merged[key] = merged.get(key, Fraction(0)) + value
        return SymTensor(self.n, merged)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        scalar = _as_fraction(scalar) if not isinstance(scalar, Fraction) else scalar
        return SymTensor(self.n, {key: scalar * value for key, value in self.coeffs.items()})

    def __eq__(self, other):
        return isinstance(other, SymTensor) and self.n == other.n and self.coeffs == other.coeffs

    def __repr__(self):
        terms = []
        for (k, l), value in sorted(self.coeffs.items()):
            name = f"v{k}^2" if k == l else f"v{k}v{l}"
            terms.append(f"{value}*{name}")
        return f"SymTensor(n={self.n}, {' + '.join(terms) or '0'})"

    def coefficient(self, k, l):
        """Coefficient of v_k v_l (order of k, l irrelevant)."""
        if k > l:
            k, l = l, k
        return self.coeffs.get((k, l), Fraction(0))

    def vector(self):
        """Coefficients over the ordered pair basis of Sym^2(V)."""
        return [self.coeffs.get(pair, Fraction(0)) for pair in pair_basis(self.n)]

    def to_matrix(self):
        """Symmetric matrix with entry (k, l) equal to the v_k v_l coefficient."""
        entries = [[Fraction(0)] * self.n for _ in range(self.n)]
        for (k, l), value in self.coeffs.items():
            entries[k - 1][l - 1] = value
            entries[l - 1][k - 1] = value
        return SymMatrix(entries)


class SymMatrix:
    """Symmetric g x g matrix over exact rationals or complex floats.

    Exact entries must be symmetric on the nose; float entries are accepted
    when the relative asymmetry is below 1e-12 and are then symmetrised.
    """

    __slots__ = ("g", "entries", "mode")

    _FLOAT_SYMMETRY_TOL = 1e-12

    def __init__(self, entries):
        rows = [list(row) for row in entries]
        g = len(rows)
        if g == 0 or any(len(row) != g for row in rows):
            raise ArgumentError("entries must form a square matrix")
        self.g = g
        exact = all(isinstance(x, (int, np.integer, Fraction)) for row in rows for x in row)
        if exact:
            data = np.empty((g, g), dtype=object)
            for i in range(g):
                for j in range(g):
                    data[i, j] = _as_fraction(rows[i][j])
            for i in range(g):
                for j in range(i + 1, g):
                    if data[i, j] != data[j, i]:
                        raise ArgumentError(f"entries ({i}, {j}) and ({j}, {i}) differ")
            self.mode = "exact"
        else:
            data = np.asarray(rows, dtype=complex)
            scale = max(1.0, float(np.abs(data).max()))
            if float(np.abs(data - data.T).max()) > self._FLOAT_SYMMETRY_TOL * scale:
                raise ArgumentError("matrix is not symmetric to float tolerance")
            data = (data + data.T) / 2
            self.mode = "float"
        self.entries = data

    def __repr__(self):
        return f"SymMatrix(g={self.g}, mode={self.mode})"

    def __eq__(self, other):
        if not isinstance(other, SymMatrix) or other.g != self.g or other.mode != self.mode:
            return False
        if self.mode == "exact":
            return all(self.entries[i, j] == other.entries[i, j] for i in range(self.g) for j in range(self.g))
        return bool(np.array_equal(self.entries, other.entries))

    def vector(self):
        """Upper-triangle entries in pair-basis order."""
        return [self.entries[k - 1, l - 1] for (k, l) in pair_basis(self.g)]

    def to_complex(self):
        if self.mode == "float":
            return np.array(self.entries, dtype=complex)
        return np.array([[complex(x) for x in row] for row in self.entries], dtype=complex)

    def rank(self, threshold=None):
        """Rank of the matrix itself (exact elimination or thresholded SVD)."""
        if self.mode == "exact":
            return _fraction_rank([list(row) for row in self.entries])
        s = np.linalg.svd(self.to_complex(), compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            return 0
        cut = (FLOAT_RANK_THRESHOLD if threshold is None else threshold) * s[0]
        return int(np.sum(s > cut))


def _ambient_dimension(tensor):
    if isinstance(tensor, SymTensor):
        return tensor.n
    if isinstance(tensor, SymMatrix):
        return tensor.g
    raise ArgumentError(f"expected SymTensor or SymMatrix, got {type(tensor).__name__}")


def tau_tensor(k, l, n):
    """The tensor v_k v_l - v_k^2 - v_l^2 + sum_j v_j^2 in dimension n.

    The squares of v_k and v_l cancel, leaving v_k v_l plus the squares of
    the remaining basis vectors.
    """
    if n < 2:
        raise ArgumentError("tau_tensor needs dimension at least 2")
    if not (1 <= k < l <= n):
        raise ArgumentError(f"need 1 <= k < l <= n, got k={k}, l={l}, n={n}")
    coeffs = {(k, l): Fraction(1)}
    for j in range(1, n + 1):
        if j != k and j != l:
            coeffs[(j, j)] = Fraction(1)
    return SymTensor(n, coeffs)


def e1_tensor(i, n):
    """The product (v_1 + ... + v_n) v_i as an element of Sym^2(V)."""
    if not (1 <= i <= n):
        raise ArgumentError(f"index {i} out of range for dimension {n}")
    coeffs = {(i, i): Fraction(1)}
    for j in range(1, n + 1):
        if j != i:
            coeffs[(min(i, j), max(i, j))] = Fraction(1)
    return SymTensor(n, coeffs)


def sigma_tensor(vectors, k, l):
    """Symmetric matrix w_k w_l + w_l w_k + sum_{j != k,l} w_j w_j.

    ``vectors`` is a tuple of n >= 3 vectors of a common dimension g; the
    result is exact when every entry is an int or Fraction and floating
    otherwise.  Indices k < l are 1-based.
    """
    vectors = [list(v) for v in vectors]
    n = len(vectors)
    if n < 3:
        raise ArgumentError("sigma_tensor needs at least 3 vectors")
    if not (1 <= k < l <= n):
        raise ArgumentError(f"need 1 <= k < l <= n, got k={k}, l={l}, n={n}")
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise ArgumentError(f"vectors have mismatched dimensions {sorted(dims)}")
    g = dims.pop()
    exact = all(isinstance(x, (int, np.integer, Fraction)) for v in vectors for x in v)
    if exact:
        ws = [[_as_fraction(x) for x in v] for v in vectors]
        entries = [[Fraction(0)] * g for _ in range(g)]
        wk, wl = ws[k - 1], ws[l - 1]
        for p in range(g):
            for q in range(g):
                entries[p][q] = wk[p] * wl[q] + wl[p] * wk[q]
        for j, w in enumerate(ws, start=1):
            if j in (k, l):
                continue
            for p in range(g):
                for q in range(g):
                    entries[p][q] += w[p] * w[q]
        return SymMatrix(entries)
    ws = np.asarray(vectors, dtype=complex)
    wk, wl = ws[k - 1], ws[l - 1]
    out = np.outer(wk, wl) + np.outer(wl, wk)
    for j in range(n):
        if j not in (k - 1, l - 1):
            out += np.outer(ws[j], ws[j])
    return SymMatrix(out)


def sigma_product_tensor(vectors, k, l):
    """Symmetric-product representative of sigma: (w_k w_l + w_l w_k)/2 + sum w_j w_j.

    This is the image of ``tau_tensor(k, l, n)`` under v_j -> w_j with honest
    polynomial multiplication, the object whose span the independence lemma
    is about.  It differs from :func:`sigma_tensor` by halving the mixed
    term; the two conventions have equal spans except for n = 3 tuples with
    sum(w_j) = 0, where the polarized matrices satisfy the exact relation
    sum_{k<l} sigma_kl = (sum w)(sum w)^T = 0 and drop one dimension.
    """
    polarized = sigma_tensor(vectors, k, l)
    g = polarized.g
    if polarized.mode == "exact":
        wk = [_as_fraction(x) for x in vectors[k - 1]]
        wl = [_as_fraction(x) for x in vectors[l - 1]]
        entries = [
            [polarized.entries[p, q] - Fraction(wk[p] * wl[q] + wl[p] * wk[q], 2) for q in range(g)]
            for p in range(g)
        ]
        return SymMatrix(entries)
    wk = np.asarray(vectors[k - 1], dtype=complex)
    wl = np.asarray(vectors[l - 1], dtype=complex)
    return SymMatrix(polarized.to_complex() - (np.outer(wk, wl) + np.outer(wl, wk)) / 2)


# ---------------------------------------------------------------------------
# rank machinery


def _modular_rank(rows, p):
    """Rank of a rational matrix reduced mod p (a lower bound for the true rank)."""
    nrows = len(rows)
    ncols = len(rows[0])
    mat = np.empty((nrows, ncols), dtype=np.int64)
    inv_cache = {}
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            x = _as_fraction(x)
            den = x.denominator % p
            if den == 0:
                return None  # prime unusable for this matrix
            inv = inv_cache.get(den)
            if inv is None:
                inv = pow(den, -1, p)
                inv_cache[den] = inv
            mat[i, j] = (x.numerator % p) * inv % p
    r = 0
    for c in range(ncols):
        pivots = np.nonzero(mat[r:, c])[0]
        if pivots.size == 0:
            continue
        piv = r + int(pivots[0])
        if piv != r:
            mat[[r, piv]] = mat[[piv, r]]
        inv = pow(int(mat[r, c]), -1, p)
        mat[r] = mat[r] * inv % p
        col = mat[r + 1:, c].copy()
        if col.size:
            mat[r + 1:] = (mat[r + 1:] - np.outer(col, mat[r])) % p
        r += 1
        if r == nrows:
            break
    return r


def _fraction_rank(rows):
    """Rank by Gaussian elimination over the rationals."""
    mat = [[_as_fraction(x) for x in row] for row in rows]
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    rank = 0
    for c in range(ncols):
        piv = next((r for r in range(rank, nrows) if mat[r][c]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pivot = mat[rank][c]
        # normalising the pivot row keeps entry growth in check
        mat[rank] = [x / pivot for x in mat[rank]]
        prow = mat[rank]
        for r in range(rank + 1, nrows):
            factor = mat[r][c]
            if factor:
                mat[r] = [a - factor * b for a, b in zip(mat[r], prow)]
        rank += 1
        if rank == nrows:
            break
    return rank


def _rational_rank(rows):
    """Exact rank; a full-rank result mod p certifies the answer cheaply."""
    if not rows:
        return 0
    cap = min(len(rows), len(rows[0]))
    for p in _CERTIFICATE_PRIMES:
        r = _modular_rank(rows, p)
        if r == cap:
            return cap
    return _fraction_rank(rows)


def span_rank(tensors, mode="exact", threshold=None):
    """Dimension of the span of the given tensors.

    All elements must share one ambient dimension.  In exact mode the rank is
    computed over the rationals (rejecting float-mode matrices); in float
    mode singular values below ``threshold`` (default
    :data:`FLOAT_RANK_THRESHOLD`) times the largest are treated as zero.
    """
    tensors = list(tensors)
    if not tensors:
        return 0
    dims = {_ambient_dimension(t) for t in tensors}
    if len(dims) != 1:
        raise ArgumentError(f"mixed ambient dimensions {sorted(dims)}")
    if mode == "exact":
        for t in tensors:
            if isinstance(t, SymMatrix) and t.mode != "exact":
                raise ArgumentError("exact mode requires exact-entry tensors")
        return _rational_rank([t.vector() for t in tensors])
    if mode == "float":
        a = np.array([[complex(x) for x in t.vector()] for t in tensors], dtype=complex)
        s = np.linalg.svd(a, compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            return 0
        cut = (FLOAT_RANK_THRESHOLD if threshold is None else threshold) * s[0]
        return int(np.sum(s > cut))
    raise ArgumentError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# verification suites


@dataclass
class TauIndependenceReport:
    n: int
    rank: int
    expected: int
    passed: bool


@dataclass
class DirectSumReport:
    n: int
    rank_union: int
    expected: int
    passed: bool


@dataclass
class SigmaSpanReport:
    n: int
    g: int
    zero_sum: bool
    dims: list
    expected: int
    passed: bool
    redraws: int


def verify_tau_independence(n):
    """Check that the n(n-1)/2 tensors tau_{kl} are linearly independent."""
    if n < 2:
        raise ArgumentError("need n >= 2")
    taus = [tau_tensor(k, l, n) for k, l in combinations(range(1, n + 1), 2)]
    rank = span_rank(taus, mode="exact")
    expected = n * (n - 1) // 2
    return TauIndependenceReport(n=n, rank=rank, expected=expected, passed=rank == expected)


def verify_direct_sum_e1V(n):
    """Check that the tau span plus the products e_1 v_i fill Sym^2(V).

    Since the two pieces have complementary dimensions n(n-1)/2 and n, a
    union rank of n(n+1)/2 is equivalent to the sum being direct.
    """
    if n < 2:
        raise ArgumentError("need n >= 2")
    tensors = [tau_tensor(k, l, n) for k, l in combinations(range(1, n + 1), 2)]
    tensors += [e1_tensor(i, n) for i in range(1, n + 1)]
    rank = span_rank(tensors, mode="exact")
    expected = sym2_dimension(n)
    return DirectSumReport(n=n, rank_union=rank, expected=expected, passed=rank == expected)


def random_rational_vector(g, rng):
    """Vector of g rationals with numerator and denominator bounded by 1000."""
    return [
        Fraction(rng.randint(-RANDOM_ENTRY_BOUND, RANDOM_ENTRY_BOUND), rng.randint(1, RANDOM_ENTRY_BOUND))
        for _ in range(g)
    ]


def _vector_rank(vectors):
    return _rational_rank([list(v) for v in vectors])


def _sample_vectors(n, g, zero_sum, rng):
    """Draw n rational vectors in dimension g, re-drawing degenerate samples."""
    target = n - 1 if zero_sum else min(n, g)
    for _ in range(REDRAW_CAP):
        if zero_sum:
            vectors = [random_rational_vector(g, rng) for _ in range(n - 1)]
            last = [-sum(col) for col in zip(*vectors)]
            vectors.append(last)
        else:
            vectors = [random_rational_vector(g, rng) for _ in range(n)]
        if _vector_rank(vectors) == target:
            return vectors
    raise DegenerateSampleError(f"no non-degenerate sample after {REDRAW_CAP} draws (n={n}, g={g})")


def _sigma_family_rows(vectors):
    """Pair-basis rows of 2 * sigma_product_tensor for all k < l, over the integers.

    Clearing denominators with one common scalar and doubling are uniform
    rescalings of every family member, so the span rank is unchanged while
    the arithmetic stays in (fast) machine-assisted big integers.
    """
    n = len(vectors)
    g = len(vectors[0])
    scale = 1
    for v in vectors:
        for x in v:
            d = _as_fraction(x).denominator
            scale = scale * d // math.gcd(scale, d)
    w = [[int(_as_fraction(x) * scale) for x in v] for v in vectors]
    squares = [[[wj[p] * wj[q] for q in range(g)] for p in range(g)] for wj in w]
    p2 = [[sum(squares[j][p][q] for j in range(n)) for q in range(g)] for p in range(g)]
    pairs = [(k - 1, l - 1) for (k, l) in pair_basis(g)]
    rows = []
    for k, l in combinations(range(n), 2):
        wk, wl = w[k], w[l]
        row = []
        for p, q in pairs:
            mixed = wk[p] * wl[q] + wl[p] * wk[q]
            row.append(mixed + 2 * (p2[p][q] - squares[k][p][q] - squares[l][p][q]))
        rows.append(row)
    return rows


def verify_sigma_span(n, g=None, trials=5, zero_sum=False, seed=0):
    """Check that the sigma matrices of random vector tuples span n(n-1)/2 dimensions.

    With ``zero_sum`` the sample satisfies sum(w_i) = 0 and spans an
    (n-1)-dimensional space, the configuration in which the span statement
    is sharp.  The family is built from :func:`sigma_product_tensor`
    (see there for why the polarized normalisation would be wrong at n = 3).
    Trials are seeded independently so results do not depend on evaluation
    order.
    """
    if n < 3:
        raise ArgumentError("need n >= 3 for the sigma family")
    if g is None:
        g = n
    if zero_sum and g < n - 1:
        raise ArgumentError(f"zero-sum sample needs g >= n - 1, got g={g}")
    if not zero_sum and g < n:
        raise ArgumentError(f"generic sample needs g >= n, got g={g}")
    expected = n * (n - 1) // 2
    dims = []
    redraws = 0
    for trial in range(trials):
        rng = random.Random((seed, n, g, bool(zero_sum), trial))
        vectors = _sample_vectors(n, g, zero_sum, rng)
        dims.append(_rational_rank(_sigma_family_rows(vectors)))
    passed = all(d == expected for d in dims)
    return SigmaSpanReport(
        n=n, g=g, zero_sum=zero_sum, dims=dims, expected=expected, passed=passed, redraws=redraws
    )


# ---------------------------------------------------------------------------
# quadrics through point sets


def _rational_nullspace(rows):
    """Basis of the rational null space of the matrix with the given rows."""
    ncols = len(rows[0])
    mat = [[_as_fraction(x) for x in row] for row in rows]
    nrows = len(mat)
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if mat[i][c]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        pivot = mat[r][c]
        mat[r] = [x / pivot for x in mat[r]]
        for i in range(nrows):
            if i != r and mat[i][c]:
                factor = mat[i][c]
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for c in free:
        vec = [Fraction(0)] * ncols
        vec[c] = Fraction(1)
        for row_idx, pc in enumerate(pivots):
            vec[pc] = -mat[row_idx][c]
        basis.append(vec)
    return basis


def _unvec_symmatrix(vec, g, exact):
    if exact:
        entries = [[Fraction(0)] * g for _ in range(g)]
    else:
        entries = [[0j] * g for _ in range(g)]
    for value, (k, l) in zip(vec, pair_basis(g)):
        entries[k - 1][l - 1] = value
        entries[l - 1][k - 1] = value
    return SymMatrix(entries)


def quadrics_through(points, mode="exact", threshold=None):
    """Basis of {Q symmetric : v^T Q v = 0 for every point v}.

    Each point imposes one linear condition on the g(g+1)/2 coefficients of
    Q.  Pair a quadric with a symmetric matrix via :func:`quadric_pairing`.
    """
    points = [list(p) for p in points]
    if not points:
        raise ArgumentError("need at least one point")
    dims = {len(p) for p in points}
    if len(dims) != 1:
        raise ArgumentError(f"points have mismatched dimensions {sorted(dims)}")
    g = dims.pop()
    pairs = pair_basis(g)
    if mode == "exact":
        rows = []
        for p in points:
            p = [_as_fraction(x) for x in p]
            rows.append([p[k - 1] * p[l - 1] * (2 if k != l else 1) for (k, l) in pairs])
        basis = _rational_nullspace(rows)
        return [_unvec_symmatrix(vec, g, exact=True) for vec in basis]
    if mode == "float":
        rows = np.array(
            [[complex(p[k - 1]) * complex(p[l - 1]) * (2 if k != l else 1) for (k, l) in pairs] for p in points],
            dtype=complex,
        )
        u, s, vh = np.linalg.svd(rows)
        cut = (FLOAT_RANK_THRESHOLD if threshold is None else threshold) * (s[0] if s.size else 1.0)
        rank = int(np.sum(s > cut))
        return [_unvec_symmatrix(vh[i].conj(), g, exact=False) for i in range(rank, vh.shape[0])]
    raise ArgumentError(f"unknown mode {mode!r}")


def quadric_pairing(quadric, sym):
    """Trace pairing trace(Q S) between a quadric and a symmetric matrix."""
    if quadric.g != sym.g:
        raise ArgumentError("dimension mismatch in pairing")
    if quadric.mode == "exact" and sym.mode == "exact":
        total = Fraction(0)
        for i in range(quadric.g):
            for j in range(quadric.g):
                total += quadric.entries[i, j] * sym.entries[j, i]
        return total
    return complex(np.trace(quadric.to_complex() @ sym.to_complex()))


def evaluate_quadric(quadric, point):
    """The value v^T Q v of a quadric at a point."""
    if quadric.mode == "exact":
        p = [_as_fraction(x) for x in point]
        total = Fraction(0)
        for i in range(quadric.g):
            for j in range(quadric.g):
                total += p[i] * quadric.entries[i, j] * p[j]
        return total
    v = np.asarray(point, dtype=complex)
    return complex(v @ quadric.to_complex() @ v)
