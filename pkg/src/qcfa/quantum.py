"""Dense complex linear algebra and quantum-channel primitives.

Density operators, Kraus families (selective quantum operations), channel
application, partial traces, Schatten norms, Choi matrices and superoperators.

Vectorization convention: column stacking throughout.  For a matrix X,
vec(X) stacks the columns of X, so vec(E X F) = (F^T kron E) vec(X).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

# Numerical tolerances.  Double precision leaves ample headroom at the matrix
# dimensions this package works with (<= a few hundred).
HERM_TOL = 1e-9
PSD_TOL = 1e-9
TRACE_TOL = 1e-9
CHANNEL_TOL = 1e-9
ZERO_TOL = 1e-12
NORM_TOL = 1e-6


def as_complex_matrix(entries) -> np.ndarray:
    """Coerce to a 2-d complex128 array, rejecting NaN/Inf entries."""
    m = np.asarray(entries, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {m.ndim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix contains non-finite entries")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Inverse of :func:`vec`; assumes a square matrix unless told otherwise."""
    v = np.asarray(v).reshape(-1)
    if shape is None:
        dim = int(round(np.sqrt(v.size)))
        shape = (dim, dim)
    return v.reshape(shape, order="F")


def hermitize(m: np.ndarray) -> np.ndarray:
    """(M + M†)/2; only meaningful when M is Hermitian within tolerance."""
    return (m + dagger(m)) / 2.0


def min_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of a (near-)Hermitian matrix."""
    return float(np.linalg.eigvalsh(hermitize(m))[0])


@dataclass(frozen=True)
class DensityOperator:
    """A PSD, unit-trace matrix; invariants checked at construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"density operator must be square, got {m.shape}")
        if schatten_norm(m - dagger(m), 2) > HERM_TOL:
            raise ValueError("density operator is not Hermitian within tolerance")
        if min_eigenvalue(m) < -PSD_TOL:
            raise ValueError("density operator has a negative eigenvalue beyond tolerance")
        if abs(np.trace(m) - 1.0) > TRACE_TOL:
            raise ValueError(f"density operator trace {np.trace(m)} is not 1 within tolerance")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class KrausFamily:
    """A selective quantum operation: operators E_(r,j) indexed by result r.

    ``ops`` maps each result to its tuple of Kraus operators (the j index);
    results absent from ``ops`` contribute no operators.  ``index_bound``
    caps the number of operators per result.  A family is a valid operation
    when sum_(r,j) E†E equals the identity; see :func:`check_completeness`.
    """

    results: tuple[str, ...]
    ops: Mapping[str, tuple[np.ndarray, ...]]
    index_bound: int

    def __post_init__(self):
        dims = set()
        clean: dict[str, tuple[np.ndarray, ...]] = {}
        for r, mats in self.ops.items():
            if r not in self.results:
                raise ValueError(f"operator given for unknown result {r!r}")
            if len(mats) > self.index_bound:
                raise ValueError(
                    f"result {r!r} has {len(mats)} Kraus operators, bound is {self.index_bound}"
                )
            mats = tuple(as_complex_matrix(m) for m in mats)
            for m in mats:
                if m.shape[0] != m.shape[1]:
                    raise ValueError("Kraus operators must be square")
                dims.add(m.shape[0])
            clean[r] = mats
        if len(dims) > 1:
            raise ValueError(f"Kraus operators have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "ops", clean)
        object.__setattr__(self, "results", tuple(self.results))
        object.__setattr__(self, "_dim", dims.pop() if dims else 0)

    @property
    def dim(self) -> int:
        return self._dim  # type: ignore[attr-defined]

    def operators(self, result: str) -> tuple[np.ndarray, ...]:
        return self.ops.get(result, ())

    def result_map(self, result: str, a: np.ndarray) -> np.ndarray:
        """The (not trace-preserving) map A -> sum_j E_(r,j) A E_(r,j)†."""
        out = np.zeros_like(np.asarray(a, dtype=np.complex128))
        for e in self.operators(result):
            out += e @ a @ dagger(e)
        return out


def check_completeness(fam: KrausFamily) -> tuple[bool, float]:
    """Whether sum E†E equals the identity; returns (ok, residual 2-norm)."""
    dim = fam.dim
    if dim == 0:
        raise ValueError("Kraus family has no operators")
    acc = np.zeros((dim, dim), dtype=np.complex128)
    for r in fam.results:
        for e in fam.operators(r):
            acc += dagger(e) @ e
    residual = schatten_norm(acc - np.eye(dim), 2)
    return residual <= CHANNEL_TOL, float(residual)


def apply_kraus(
    fam: KrausFamily, rho: DensityOperator
) -> dict[str, tuple[float, DensityOperator | None]]:
    """Apply a selective quantum operation to a density operator.

    Returns, per result r, the pair (probability, post-state) where the
    probability is Tr(sum_j E A E†) and the post-state is that operator
    renormalized; the post-state is None when the probability is below
    ZERO_TOL.  Probabilities sum to 1 within TRACE_TOL.
    """
    if fam.dim != rho.dim:
        raise ValueError(f"dimension mismatch: family {fam.dim}, state {rho.dim}")
    ok, residual = check_completeness(fam)
    if not ok:
        raise ValueError(f"Kraus family violates completeness (residual {residual:.3e})")
    out: dict[str, tuple[float, DensityOperator | None]] = {}
    for r in fam.results:
        image = fam.result_map(r, rho.matrix)
        p = float(np.trace(image).real)
        if p > ZERO_TOL:
            out[r] = (p, DensityOperator(image / p))
        else:
            out[r] = (max(p, 0.0), None)
    total = sum(p for p, _ in out.values())
    if abs(total - 1.0) > TRACE_TOL:
        raise ValueError(f"result probabilities sum to {total}, not 1")
    return out


def schatten_norm(m: np.ndarray, p: int) -> float:
    """Schatten p-norm (sum of p-th powers of singular values, to the 1/p)."""
    if p < 1:
        raise ValueError("Schatten norm requires p >= 1")
    m = as_complex_matrix(m)
    sv = np.linalg.svd(m, compute_uv=False)
    return float(np.sum(sv**p) ** (1.0 / p))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return schatten_norm(np.asarray(a) - np.asarray(b), 1)


def partial_trace(
    z: np.ndarray, dims: tuple[int, int], drop_last: bool = True
) -> np.ndarray:
    """Trace out one tensor factor of an operator on a bipartite space.

    ``dims`` is (d_keep, d_drop); when ``drop_last`` the operator acts on
    C^d_keep (x) C^d_drop with the dropped factor last, otherwise it acts on
    C^d_drop (x) C^d_keep.
    """
    d_keep, d_drop = dims
    z = as_complex_matrix(z)
    total = d_keep * d_drop
    if z.shape != (total, total):
        raise ValueError(f"cannot factor {z.shape} as ({d_keep}*{d_drop})^2")
    if drop_last:
        t = z.reshape(d_keep, d_drop, d_keep, d_drop)
        return np.einsum("ijkj->ik", t)
    t = z.reshape(d_drop, d_keep, d_drop, d_keep)
    return np.einsum("jijk->ik", t)


@dataclass(frozen=True)
class SuperOperator:
    """A linear map on operators, stored as its action on column-stacked vecs."""

    action: np.ndarray
    in_dim: int
    out_dim: int

    def __post_init__(self):
        a = as_complex_matrix(self.action)
        if a.shape != (self.out_dim**2, self.in_dim**2):
            raise ValueError(
                f"action shape {a.shape} does not match dims "
                f"({self.out_dim}^2, {self.in_dim}^2)"
            )
        object.__setattr__(self, "action", a)

    def apply(self, z: np.ndarray) -> np.ndarray:
        return unvec(self.action @ vec(as_complex_matrix(z)), (self.out_dim, self.out_dim))

    def __sub__(self, other: "SuperOperator") -> "SuperOperator":
        if (self.in_dim, self.out_dim) != (other.in_dim, other.out_dim):
            raise ValueError("superoperator dimension mismatch")
        return SuperOperator(self.action - other.action, self.in_dim, self.out_dim)


def kraus_to_super(ops, dim: int | None = None) -> SuperOperator:
    """Superoperator of A -> sum_i E_i A E_i† (column-stacking convention)."""
    ops = [as_complex_matrix(e) for e in ops]
    if not ops:
        if dim is None:
            raise ValueError("need a dimension for an empty Kraus list")
        return SuperOperator(np.zeros((dim**2, dim**2)), dim, dim)
    d = ops[0].shape[0]
    action = np.zeros((d**2, d**2), dtype=np.complex128)
    for e in ops:
        action += np.kron(e.conj(), e)
    return SuperOperator(action, d, d)


def identity_super(dim: int) -> SuperOperator:
    return SuperOperator(np.eye(dim**2, dtype=np.complex128), dim, dim)


def choi_matrix(phi: SuperOperator) -> np.ndarray:
    """Choi matrix J(Phi) = sum_ij |i><j| (x) Phi(|i><j|).

    For a quantum channel J(Phi) is PSD with trace equal to the input
    dimension.
    """
    if phi.in_dim != phi.out_dim:
        raise ValueError("Choi matrix requires a square superoperator")
    d = phi.in_dim
    out = np.zeros((d * phi.out_dim, d * phi.out_dim), dtype=np.complex128)
    basis = np.eye(d)
    for i in range(d):
        for j in range(d):
            e_ij = np.outer(basis[i], basis[j])
            out += np.kron(e_ij, phi.apply(e_ij))
    return out


def choi_trace_norm_bound(phi: SuperOperator, psi: SuperOperator) -> float:
    """Trace norm of the Choi matrix of Phi - Psi.

    This is a sound upper bound on the induced trace norm ||Phi - Psi||_1,
    and the canonical efficiently computable one.
    """
    return schatten_norm(choi_matrix(phi - psi), 1)


def induced_trace_norm_estimate(
    phi: SuperOperator,
    psi: SuperOperator,
    restarts: int = 16,
    seed: int = 0,
    iterations: int = 200,
) -> float:
    """Lower estimate of the induced trace norm ||Phi - Psi||_1.

    Maximizes ||(Phi - Psi)(u v†)||_1 over unit vectors u, v by multistart
    alternating ascent; deterministic given the seed.  The reported value is
    the exact trace norm of the best rank-one image found, hence always a
    lower bracket (the Choi bound above is the upper bracket).
    """
    delta = phi - psi
    d = delta.in_dim
    rng = np.random.Generator(np.random.Philox(seed))
    a = delta.action

    def norm_at(u, v):
        return schatten_norm(delta.apply(np.outer(u, v.conj())), 1)

    best = 0.0
    for _ in range(max(1, restarts)):
        u = rng.normal(size=d) + 1j * rng.normal(size=d)
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        value = norm_at(u, v)
        for _ in range(iterations):
            w = delta.apply(np.outer(u, v.conj()))
            p, _, qh = np.linalg.svd(w)
            u_opt = p @ qh  # unitary maximizing Re tr(U† W)
            # With U fixed, tr(U† Delta(u v†)) = <T v, u> for T below.
            t = unvec(dagger(a) @ vec(u_opt), (d, d))
            tv = t @ v
            if np.linalg.norm(tv) > ZERO_TOL:
                u = tv / np.linalg.norm(tv)
            tu = dagger(t) @ u
            if np.linalg.norm(tu) > ZERO_TOL:
                v = tu / np.linalg.norm(tu)
            new_value = norm_at(u, v)
            if new_value <= value + 1e-13:
                value = max(value, new_value)
                break
            value = new_value
        best = max(best, value)
    return best


def random_density(dim: int, rng: np.random.Generator) -> DensityOperator:
    """A Haar-ish random density operator (Wishart normalized)."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ dagger(g)
    return DensityOperator(m / np.trace(m))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar random unitary via QR of a complex Gaussian matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_isometry_blocks(
    dim: int, blocks: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Partition a random (blocks*dim x dim) isometry into dim x dim blocks.

    The blocks E_1..E_b satisfy sum E†E = I exactly (up to roundoff), so they
    form a valid selective quantum operation with one operator per result.
    """
    g = rng.normal(size=(blocks * dim, dim)) + 1j * rng.normal(size=(blocks * dim, dim))
    q, _ = np.linalg.qr(g)
    return [q[i * dim : (i + 1) * dim, :].copy() for i in range(blocks)]
