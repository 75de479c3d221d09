"""Small-scale quantum numerics: states, gates, isometry channels, distances."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.optimize import minimize

TOL = 1e-12


class QuantumError(ValueError):
    pass


def cmatrix(rows) -> np.ndarray:
    return np.atleast_2d(np.asarray(rows, dtype=complex))


def is_hermitian(a: np.ndarray, tol: float = TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, atol=tol, rtol=0)


def is_isometry(t: np.ndarray, tol: float = TOL) -> bool:
    t = np.asarray(t)
    if t.ndim != 2 or t.shape[0] < t.shape[1]:
        return False
    return np.allclose(t.conj().T @ t, np.eye(t.shape[1]), atol=tol, rtol=0)


def trace_norm(a: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    a = np.asarray(a, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if not is_hermitian(a, 1e-10 * scale):
        raise QuantumError("trace_norm expects a Hermitian matrix")
    return float(np.sum(np.abs(np.linalg.eigvalsh(a))))


def pure(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1, 1)
    return v @ v.conj().T


def bloch(v) -> tuple:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape != (2,):
        raise QuantumError("bloch expects a vector in C^2")
    if abs(np.linalg.norm(v) - 1) > 1e-9:
        raise QuantumError("bloch expects a unit vector")
    a, b = v
    c = np.conj(a) * b
    return (float(2 * c.real), float(2 * c.imag), float(abs(a) ** 2 - abs(b) ** 2))


# --- gates --------------------------------------------------------------------


def phase(phi: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * phi)]], dtype=complex)


def ry(phi: float) -> np.ndarray:
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def hadamard() -> np.ndarray:
    return ry(math.pi / 2) @ phase(math.pi)


def shift(n: int) -> np.ndarray:
    """Controlled shift on C^2 (x) C^n: control 0 steps left, control 1 steps right."""
    if n < 1:
        raise QuantumError("shift needs n >= 1")
    s = np.zeros((2 * n, 2 * n), dtype=complex)
    for i in range(n):
        s[(i - 1) % n, i] = 1
        s[n + (i + 1) % n, n + i] = 1
    return s


# --- channels -------------------------------------------------------------------


@dataclass(frozen=True)
class Isometry:
    t: np.ndarray

    @property
    def n_in(self) -> int:
        return self.t.shape[1]

    @property
    def n_out(self) -> int:
        return self.t.shape[0]


@dataclass(frozen=True)
class Discard:
    """Trace out the whole input; the output is the one-dimensional system."""

    n: int

    @property
    def n_in(self) -> int:
        return self.n

    @property
    def n_out(self) -> int:
        return 1


@dataclass(frozen=True)
class Composite:
    """Apply ``parts`` left to right."""

    parts: tuple

    @property
    def n_in(self) -> int:
        return self.parts[0].n_in

    @property
    def n_out(self) -> int:
        return self.parts[-1].n_out


@dataclass(frozen=True)
class TensorPair:
    left: "Channel"
    right: "Channel"

    @property
    def n_in(self) -> int:
        return self.left.n_in * self.right.n_in

    @property
    def n_out(self) -> int:
        return self.left.n_out * self.right.n_out


Channel = Union[Isometry, Discard, Composite, TensorPair]


def isometry(t) -> Isometry:
    t = np.asarray(t, dtype=complex)
    if not is_isometry(t, 1e-10):
        raise QuantumError("matrix is not an isometry")
    return Isometry(t)


def compose(*parts: Channel) -> Channel:
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, Composite) else [p])
    for a, b in zip(flat, flat[1:]):
        if a.n_out != b.n_in:
            raise QuantumError(f"cannot compose a channel into {a.n_out} dims with one from {b.n_in}")
    return flat[0] if len(flat) == 1 else Composite(tuple(flat))


def stinespring(c: Channel) -> tuple[np.ndarray, int]:
    """Isometry V: C^n -> C^m (x) C^k with c(rho) = Tr_k(V rho V*); returns (V, k)."""
    if isinstance(c, Isometry):
        return c.t, 1
    if isinstance(c, Discard):
        return np.eye(c.n, dtype=complex), c.n
    if isinstance(c, Composite):
        v, k = stinespring(c.parts[0])
        for p in c.parts[1:]:
            w, k2 = stinespring(p)
            # rows of (W (x) I_k) V are indexed by (m2, k2, k)
            v, k = np.kron(w, np.eye(k)) @ v, k2 * k
        return v, k
    if isinstance(c, TensorPair):
        v1, k1 = stinespring(c.left)
        v2, k2 = stinespring(c.right)
        m1, m2 = c.left.n_out, c.right.n_out
        big = np.kron(v1, v2)  # rows indexed by (m1, k1, m2, k2)
        big = big.reshape(m1, k1, m2, k2, -1).transpose(0, 2, 1, 3, 4).reshape(m1 * m2 * k1 * k2, -1)
        return big, k1 * k2
    raise QuantumError(f"not a channel: {c!r}")


def channel_apply(c: Channel, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (c.n_in, c.n_in):
        raise QuantumError(f"state of size {rho.shape} does not fit a channel on {c.n_in} dims")
    v, k = stinespring(c)
    out = v @ rho @ v.conj().T
    m = c.n_out
    out = out.reshape(m, k, m, k)
    return np.einsum("ajbj->ab", out)


def as_isometry(c: Channel) -> np.ndarray:
    v, k = stinespring(c)
    if k != 1:
        raise QuantumError("channel discards a subsystem, it is not isometry-induced")
    return v


# --- diamond distance -------------------------------------------------------


def unit_vector(params: np.ndarray, n: int) -> np.ndarray:
    """Map 2n-2 reals (n-1 hyperspherical angles, n-1 phases) to a unit vector."""
    angles, phases = params[: n - 1], params[n - 1:]
    mags = np.empty(n)
    s = 1.0
    for i, a in enumerate(angles):
        mags[i] = s * math.cos(a)
        s *= math.sin(a)
    mags[n - 1] = s
    ph = np.concatenate([[0.0], phases])
    return mags * np.exp(1j * ph)


def pure_trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """trace_norm(aa* - bb*) for unit vectors: 2 sqrt(1 - |<a, b>|^2).

    The square root is taken as the norm of the part of b orthogonal to a, which
    stays accurate when the two states are close.
    """
    r = b - np.vdot(a, b) * a
    return min(2.0, 2.0 * float(np.linalg.norm(r)))


def _pure_gap(t: np.ndarray, s: np.ndarray, v: np.ndarray) -> float:
    return pure_trace_distance(t @ v, s @ v)


def diamond_distance_iso(t, s, starts: int = 32, seed: int = 0, tol: float = 1e-8) -> float:
    """Max over unit inputs of the trace distance between the two isometry channels."""
    t = t.t if isinstance(t, Isometry) else np.asarray(t, dtype=complex)
    s = s.t if isinstance(s, Isometry) else np.asarray(s, dtype=complex)
    if t.shape != s.shape:
        raise QuantumError(f"dimension mismatch: {t.shape} vs {s.shape}")
    n = t.shape[1]
    if n == 1:
        return _pure_gap(t, s, np.ones(1, dtype=complex))
    rng = np.random.default_rng(seed)

    def f(p):
        return -_pure_gap(t, s, unit_vector(p, n))

    best = 0.0
    for k in range(starts):
        x0 = np.concatenate([rng.uniform(0, math.pi / 2, n - 1), rng.uniform(0, 2 * math.pi, n - 1)])
        res = minimize(f, x0, method="Powell", options={"xtol": tol, "ftol": tol, "maxfev": 4000})
        best = max(best, -float(res.fun), -f(x0))
    return min(best, 2.0)


def channel_distance(c1: Channel, c2: Channel, starts: int = 32, seed: int = 0) -> float:
    if (c1.n_in, c1.n_out) != (c2.n_in, c2.n_out):
        raise QuantumError("channels have different dimensions")
    if c1.n_out == 1:
        return 0.0  # every channel into the trivial system is the trace
    return diamond_distance_iso(as_isometry(c1), as_isometry(c2), starts, seed)


def permutation_isometry(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Unitary sending factor ``perm[j]`` of C^dims[0] (x) ... to output position j."""
    dims = list(dims)
    total = int(np.prod(dims)) if dims else 1
    if not dims:
        return np.eye(1, dtype=complex)
    eye = np.eye(total, dtype=complex).reshape(dims + [total])
    out = np.transpose(eye, list(perm) + [len(dims)])
    return out.reshape(total, total)
