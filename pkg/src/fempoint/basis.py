"""Lagrange polynomial bases on the reference tetrahedron.

A basis of degree d has one node per lattice point (a/d, b/d, c/d) with
a, b, c >= 0 and a + b + c <= d, enumerated with a outermost, then b, then
c innermost. Basis functions are stored as coefficient rows over the
monomial set {xi0^a xi1^b xi2^c : a+b+c <= d} enumerated in the same index
order, obtained by solving the generalized Vandermonde system once per
degree. Values, gradients and Hessians are evaluated analytically from
those coefficients; polynomials extend globally, so evaluation points are
not restricted to K.
"""

import numpy as np

MAX_DEGREE = 6

_CACHE = {}


def node_count(degree):
    """Dimension of the degree-d Lagrange space on a tetrahedron."""
    return (degree + 1) * (degree + 2) * (degree + 3) // 6


def lattice_triples(degree):
    """Node/monomial exponent triples (a, b, c) in canonical order."""
    return [
        (a, b, c)
        for a in range(degree + 1)
        for b in range(degree + 1 - a)
        for c in range(degree + 1 - a - b)
    ]


class LagrangeBasis:
    """Immutable nodal Lagrange basis of a fixed degree.

    Attributes
    ----------
    degree : int
    node_count : int
    nodes : (M, 3) float array of nodal reference coordinates
    exponents : (M, 3) int array, monomial exponents in index order
    coeffs : (M, M) float array; row j holds the monomial coefficients of
        basis function j, so ``coeffs @ mono(xi)`` evaluates all functions
    """

    def __init__(self, degree):
        if not 1 <= degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in 1..{MAX_DEGREE}, got {degree}")
        trips = lattice_triples(degree)
        m = len(trips)
        self.degree = degree
        self.node_count = m
        self.exponents = np.array(trips, dtype=np.intp)
        self.nodes = self.exponents.astype(float) / degree
        vand = (self.nodes[:, None, :] ** self.exponents[None, :, :]).prod(axis=-1)
        try:
            inv = np.linalg.solve(vand, np.eye(m))
        except np.linalg.LinAlgError as exc:  # distinct nodes: cannot happen
            raise RuntimeError("singular Vandermonde system") from exc
        self.coeffs = np.ascontiguousarray(inv.T)
        self._lattice_index = {t: i for i, t in enumerate(trips)}
        self._grad_flat = self._build_grad()
        self._hess_flat = None
        self._lebesgue = None
        # slots of the four reference vertices within the node ordering
        d = degree
        self.vertex_slots = tuple(
            self._lattice_index[t]
            for t in ((0, 0, 0), (d, 0, 0), (0, d, 0), (0, 0, d))
        )

    def _build_grad(self):
        m = self.node_count
        grad = np.zeros((3, m, m))
        for mi, (a, b, c) in enumerate(map(tuple, self.exponents)):
            col = self.coeffs[:, mi]
            if a > 0:
                grad[0, :, self._lattice_index[(a - 1, b, c)]] += a * col
            if b > 0:
                grad[1, :, self._lattice_index[(a, b - 1, c)]] += b * col
            if c > 0:
                grad[2, :, self._lattice_index[(a, b, c - 1)]] += c * col
        return np.ascontiguousarray(grad.reshape(3 * m, m))

    def _build_hess(self):
        m = self.node_count
        pairs = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
        hess = np.zeros((6, m, m))
        for mi, exp in enumerate(map(tuple, self.exponents)):
            col = self.coeffs[:, mi]
            for pi, (k, l) in enumerate(pairs):
                e = list(exp)
                factor = e[k]
                e[k] -= 1
                factor *= e[l]
                e[l] -= 1
                if factor == 0:
                    continue
                hess[pi, :, self._lattice_index[tuple(e)]] += factor * col
        return np.ascontiguousarray(hess.reshape(6 * m, m))

    def monomials(self, xi):
        """Monomial values at ``xi`` in index order."""
        d = self.degree
        powers = np.empty((3, d + 1))
        powers[:, 0] = 1.0
        for e in range(1, d + 1):
            powers[:, e] = powers[:, e - 1] * xi
        exps = self.exponents
        return powers[0, exps[:, 0]] * powers[1, exps[:, 1]] * powers[2, exps[:, 2]]

    def eval(self, xi):
        """Values of all basis functions at ``xi``, shape (M,)."""
        return self.coeffs @ self.monomials(xi)

    def eval_grad(self, xi):
        """Gradients d p_j / d xi_k at ``xi``, shape (M, 3)."""
        m = self.node_count
        return (self._grad_flat @ self.monomials(xi)).reshape(3, m).T

    def eval_with_grad(self, xi):
        """Values and gradients from a single monomial evaluation."""
        mono = self.monomials(xi)
        m = self.node_count
        return self.coeffs @ mono, (self._grad_flat @ mono).reshape(3, m).T

    def eval_hess(self, xi):
        """Hessians d2 p_j / (d xi_k d xi_l), shape (M, 3, 3), symmetric."""
        if self._hess_flat is None:
            self._hess_flat = self._build_hess()
        m = self.node_count
        h = (self._hess_flat @ self.monomials(xi)).reshape(6, m)
        out = np.empty((m, 3, 3))
        out[:, 0, 0] = h[0]
        out[:, 1, 1] = h[1]
        out[:, 2, 2] = h[2]
        out[:, 0, 1] = out[:, 1, 0] = h[3]
        out[:, 0, 2] = out[:, 2, 0] = h[4]
        out[:, 1, 2] = out[:, 2, 1] = h[5]
        return out

    def lebesgue_bound(self):
        """Safe upper bound on max over K of sum_j |p_j(xi)|.

        Sampled on a dense lattice and padded; used to bound how far the
        image of a cell can overshoot the hull of its geometry nodes.
        """
        if self._lebesgue is None:
            n = 12
            worst = 1.0
            for a in range(n + 1):
                for b in range(n + 1 - a):
                    for c in range(n + 1 - a - b):
                        xi = np.array([a, b, c], dtype=float) / n
                        worst = max(worst, np.abs(self.eval(xi)).sum())
            self._lebesgue = 1.3 * worst
        return self._lebesgue


def make_basis(degree):
    """Return the (cached, shared) Lagrange basis of the given degree."""
    basis = _CACHE.get(degree)
    if basis is None:
        basis = LagrangeBasis(degree)
        _CACHE[degree] = basis
    return basis
