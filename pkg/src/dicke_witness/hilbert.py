"""Finite Hilbert spaces for collective spins and a single bosonic mode.

Basis conventions (carried by every serialized state as ``ORDERING``):

* Dicke space of ``N`` two-level particles, ``S = N/2``: basis ``|S, m>`` with
  ``m = -S, ..., +S`` ascending, so index ``k = m + S`` counts excitations.
* Fock space truncated at ``n_max``: ``|0>, ..., |n_max>`` ascending.
* Full ``2**N`` space: particle 0 is the most significant tensor factor and
  the local basis is ``(|g>, |e>)``.
* Composite spaces are spin-major: ``kron(spin, field)``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

ORDERING = "m_asc_n_asc_spin_major"

MAX_DICKE_N = 4096
FULL_SPACE_DEFAULT_MAX = 12
FULL_SPACE_HARD_MAX = 16
VARIANCE_CLAMP = 1e-10
STATE_TOL = 1e-10
TAIL_TOL = 1e-8


class DimensionError(ValueError):
    """Operand dimensions do not match or exceed a configured cap."""


class StateValidationError(ValueError):
    """A state does not satisfy normalization / hermiticity / positivity."""


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DickeSpace:
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"particle count must be a positive integer, got {self.N}")
        if self.N > MAX_DICKE_N:
            raise DimensionError(f"N={self.N} exceeds the Dicke-space cap {MAX_DICKE_N}")

    @property
    def S(self) -> float:
        return self.N / 2

    @property
    def dim(self) -> int:
        return self.N + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.dim) - self.S


@dataclass(frozen=True)
class FockSpace:
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError(f"n_max must be a nonnegative integer, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class FullSpace:
    """The unsymmetrized 2**N space of N qubits."""

    N: int
    allow_large: bool = False

    def __post_init__(self):
        cap = FULL_SPACE_HARD_MAX if self.allow_large else FULL_SPACE_DEFAULT_MAX
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.N > cap:
            hint = "" if self.allow_large else " (pass allow_large=True to go up to 16)"
            raise DimensionError(f"full 2^N space refused for N={self.N} > {cap}{hint}")

    @property
    def dim(self) -> int:
        return 2 ** self.N


@dataclass(frozen=True)
class StateSpace:
    """Descriptor of the space a state lives on: a spin part, a field part, or both."""

    spin: Optional[str] = None  # "dicke" | "full" | None
    N: Optional[int] = None
    n_max: Optional[int] = None

    def __post_init__(self):
        if self.spin not in (None, "dicke", "full"):
            raise ValueError(f"unknown spin space {self.spin!r}")
        if self.spin is None and self.n_max is None:
            raise ValueError("state space needs a spin or a field factor")
        if self.spin is not None and self.N is None:
            raise ValueError("spin space requires N")

    @property
    def type(self) -> str:
        if self.spin is None:
            return "fock"
        return self.spin if self.n_max is None else f"{self.spin}_fock"

    @property
    def spin_dim(self) -> int:
        if self.spin is None:
            return 1
        return self.N + 1 if self.spin == "dicke" else 2 ** self.N

    @property
    def field_dim(self) -> int:
        return 1 if self.n_max is None else self.n_max + 1

    @property
    def dim(self) -> int:
        return self.spin_dim * self.field_dim

    @classmethod
    def from_type(cls, type_: str, N=None, n_max=None) -> "StateSpace":
        table = {
            "dicke": ("dicke", False),
            "dicke_fock": ("dicke", True),
            "full": ("full", False),
            "full_fock": ("full", True),
            "fock": (None, True),
        }
        if type_ not in table:
            raise ValueError(f"unknown space type {type_!r}")
        spin, has_field = table[type_]
        return cls(spin=spin, N=N if spin else None, n_max=n_max if has_field else None)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

class OperatorMatrix:
    """Square complex matrix kept in sparse CSR storage."""

    __array_priority__ = 100

    def __init__(self, data):
        if isinstance(data, OperatorMatrix):
            mat = data.mat
        else:
            mat = sp.csr_array(data, dtype=complex)
        if mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"operator must be square, got {mat.shape}")
        self.mat = mat

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def _check(self, other: "OperatorMatrix"):
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch {self.dim} vs {other.dim}")

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.mat @ other.mat)
        return self.mat @ other

    def __add__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.mat + other.mat)
        if np.isscalar(other):
            return OperatorMatrix(self.mat + other * sp.eye_array(self.dim, dtype=complex))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __neg__(self):
        return OperatorMatrix(-self.mat)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return OperatorMatrix(self.mat * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return OperatorMatrix(self.mat / scalar)

    def __pow__(self, k: int):
        out = identity(self.dim)
        for _ in range(k):
            out = out @ self
        return out

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.mat.conj().T)

    def toarray(self) -> np.ndarray:
        return self.mat.toarray()

    def max_abs(self) -> float:
        return float(np.abs(self.mat.data).max()) if self.mat.nnz else 0.0

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return (self - self.dag()).max_abs() <= tol

    def __repr__(self):
        return f"OperatorMatrix(dim={self.dim}, nnz={self.mat.nnz})"


def identity(dim: int) -> OperatorMatrix:
    return OperatorMatrix(sp.eye_array(dim, dtype=complex, format="csr"))


def commutator(A: OperatorMatrix, B: OperatorMatrix) -> OperatorMatrix:
    return A @ B - B @ A


def anticommutator(A: OperatorMatrix, B: OperatorMatrix) -> OperatorMatrix:
    return A @ B + B @ A


def build_collective_operators(space: DickeSpace) -> dict[str, OperatorMatrix]:
    """Ladder and Cartesian collective-spin matrices on the Dicke basis.

    ``S_plus |S,m> = sqrt(S(S+1) - m(m+1)) |S,m+1>``.
    """
    S = space.S
    m = space.m_values
    ladder = np.sqrt(np.maximum(S * (S + 1) - m[:-1] * (m[:-1] + 1), 0.0))
    S_plus = OperatorMatrix(sp.diags_array(ladder, offsets=-1, shape=(space.dim, space.dim)))
    return _cartesian(S_plus, OperatorMatrix(sp.diags_array(m.astype(complex))))


def _cartesian(S_plus: OperatorMatrix, S_z: OperatorMatrix) -> dict[str, OperatorMatrix]:
    S_minus = S_plus.dag()
    return {
        "S_plus": S_plus,
        "S_minus": S_minus,
        "S_z": S_z,
        "S_x": (S_plus + S_minus) / 2,
        "S_y": (S_plus - S_minus) / 2j,
    }


def build_fock_operators(space: FockSpace) -> dict[str, OperatorMatrix]:
    if space.n_max < 1:
        raise ValueError("Fock operators need n_max >= 1")
    n = np.arange(space.dim)
    a = OperatorMatrix(sp.diags_array(np.sqrt(n[1:]).astype(complex), offsets=1))
    return {"a": a, "a_dag": a.dag(), "n": OperatorMatrix(sp.diags_array(n.astype(complex)))}


_SIGMA_PLUS = sp.csr_array(np.array([[0, 0], [1, 0]], dtype=complex))  # |e><g| in (g, e) order


def single_site_operator(op2: np.ndarray | sp.sparray, site: int, N: int) -> OperatorMatrix:
    """Embed a 2x2 operator on particle ``site`` of the full 2**N space."""
    left = sp.eye_array(2 ** site, dtype=complex)
    right = sp.eye_array(2 ** (N - site - 1), dtype=complex)
    return OperatorMatrix(sp.kron(sp.kron(left, sp.csr_array(op2)), right, format="csr"))


def build_full_collective_operators(space: FullSpace,
                                    phases: Optional[Sequence[float]] = None) -> dict[str, OperatorMatrix]:
    """Collective operators as sums of single-particle terms on 2**N.

    ``phases`` (radians) attach ``exp(+i phase_j)`` to each ``s_plus`` term;
    ``S_z`` is unaffected.
    """
    N = space.N
    if phases is None:
        phases = np.zeros(N)
    dim = space.dim
    bits = (np.arange(dim)[:, None] >> (N - 1 - np.arange(N))[None, :]) & 1
    S_z = OperatorMatrix(sp.diags_array((bits.sum(axis=1) - N / 2).astype(complex)))
    S_plus = OperatorMatrix(sp.csr_array((dim, dim), dtype=complex))
    for j in range(N):
        S_plus = S_plus + np.exp(1j * phases[j]) * single_site_operator(_SIGMA_PLUS, j, N)
    return _cartesian(S_plus, S_z)


def r_operator(ops: dict[str, OperatorMatrix]) -> OperatorMatrix:
    """The excitation-counting operator S_plus S_minus."""
    return ops["S_plus"] @ ops["S_minus"]


def tensor(A: OperatorMatrix, B: OperatorMatrix) -> OperatorMatrix:
    return OperatorMatrix(sp.kron(A.mat, B.mat, format="csr"))


def embed(A: OperatorMatrix, position: int, dims: Sequence[int]) -> OperatorMatrix:
    """Lift ``A`` acting on factor ``position`` to the full tensor product."""
    if A.dim != dims[position]:
        raise DimensionError(f"operator dim {A.dim} != factor dim {dims[position]}")
    out = sp.eye_array(1, dtype=complex, format="csr")
    for k, d in enumerate(dims):
        factor = A.mat if k == position else sp.eye_array(d, dtype=complex)
        out = sp.kron(out, factor, format="csr")
    return OperatorMatrix(out)


def spin_operators(space: StateSpace, phases=None) -> dict[str, OperatorMatrix]:
    """Collective-spin operators on the spin factor of ``space`` (not embedded)."""
    if space.spin == "dicke":
        if phases is not None:
            raise ValueError("phased operators require the full space")
        return build_collective_operators(DickeSpace(space.N))
    if space.spin == "full":
        return build_full_collective_operators(FullSpace(space.N, allow_large=True), phases)
    raise ValueError("space has no spin factor")


def joint_operators(space: StateSpace, phases=None) -> dict[str, OperatorMatrix]:
    """Spin and field operators embedded in the composite spin (x) field space."""
    dims = [d for d in (space.spin_dim if space.spin else None,
                        space.field_dim if space.n_max is not None else None) if d]
    out: dict[str, OperatorMatrix] = {}
    if space.spin is not None:
        for k, v in spin_operators(space, phases).items():
            out[k] = embed(v, 0, dims)
    if space.n_max is not None:
        pos = len(dims) - 1
        for k, v in build_fock_operators(FockSpace(space.n_max)).items():
            out[k] = embed(v, pos, dims)
    return out


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CollectiveState:
    """A pure vector or density matrix on a :class:`StateSpace`."""

    space: StateSpace
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        object.__setattr__(self, "data", data)
        d = self.space.dim
        if data.ndim == 1:
            if data.shape[0] != d:
                raise DimensionError(f"state vector length {data.shape[0]} != space dim {d}")
            nrm = np.vdot(data, data).real
            if abs(nrm - 1) > STATE_TOL:
                raise StateValidationError(f"pure state norm {nrm} != 1")
        elif data.ndim == 2:
            if data.shape != (d, d):
                raise DimensionError(f"density matrix shape {data.shape} != ({d}, {d})")
            if np.abs(data - data.conj().T).max() > STATE_TOL:
                raise StateValidationError("density matrix is not Hermitian")
            tr = np.trace(data)
            if abs(tr - 1) > STATE_TOL:
                raise StateValidationError(f"density matrix trace {tr} != 1")
            if d <= 4096 and np.linalg.eigvalsh(data).min() < -STATE_TOL:
                raise StateValidationError("density matrix has negative eigenvalues")
        else:
            raise StateValidationError("state data must be 1-D (pure) or 2-D (density matrix)")

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @property
    def kind(self) -> str:
        return "pure" if self.is_pure else "dm"

    @property
    def N(self) -> Optional[int]:
        return self.space.N

    def dm(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    @classmethod
    def dicke(cls, N: int, m: float) -> "CollectiveState":
        space = StateSpace("dicke", N)
        k = int(round(m + N / 2))
        if not 0 <= k <= N or abs(k - (m + N / 2)) > 1e-12:
            raise ValueError(f"m={m} not in the Dicke ladder for N={N}")
        psi = np.zeros(N + 1, dtype=complex)
        psi[k] = 1
        return cls(space, psi)

    @classmethod
    def from_dm(cls, space: StateSpace, rho: np.ndarray) -> "CollectiveState":
        return cls(space, rho)

    # serialization -------------------------------------------------------
    def to_json_dict(self) -> dict:
        sp_desc = {"type": self.space.type}
        if self.space.N is not None:
            sp_desc["N"] = self.space.N
        if self.space.n_max is not None:
            sp_desc["n_max"] = self.space.n_max
        flat = self.data.ravel()
        return {
            "space": sp_desc,
            "kind": self.kind,
            "re": flat.real.tolist(),
            "im": flat.imag.tolist(),
            "ordering": ORDERING,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CollectiveState":
        def need(container, key, where):
            if key not in container:
                raise StateValidationError(f"{where}: missing key {key!r}")
            return container[key]

        desc = need(obj, "space", "$")
        if not isinstance(desc, dict):
            raise StateValidationError("$.space: expected an object")
        type_ = need(desc, "type", "$.space")
        try:
            space = StateSpace.from_type(type_, desc.get("N"), desc.get("n_max"))
        except ValueError as exc:
            raise StateValidationError(f"$.space: {exc}") from exc
        if obj.get("ordering", ORDERING) != ORDERING:
            raise StateValidationError(f"$.ordering: unsupported ordering {obj['ordering']!r}")
        kind = need(obj, "kind", "$")
        re = np.asarray(need(obj, "re", "$"), dtype=float)
        im = np.asarray(need(obj, "im", "$"), dtype=float)
        if re.shape != im.shape:
            raise StateValidationError(f"$.im: length {im.size} != $.re length {re.size}")
        flat = re + 1j * im
        d = space.dim
        if kind == "pure":
            if flat.size != d:
                raise StateValidationError(f"$.re: expected {d} amplitudes, got {flat.size}")
            data = flat
        elif kind == "dm":
            if flat.size != d * d:
                raise StateValidationError(f"$.re: expected {d * d} entries, got {flat.size}")
            data = flat.reshape(d, d)
        else:
            raise StateValidationError(f"$.kind: expected 'pure' or 'dm', got {kind!r}")
        return cls(space, data)

    @classmethod
    def from_json(cls, text: str) -> "CollectiveState":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StateValidationError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        return cls.from_json_dict(obj)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

def _as_op(op) -> sp.sparray | np.ndarray:
    return op.mat if isinstance(op, OperatorMatrix) else op


def expectation(state: CollectiveState, op) -> complex:
    M = _as_op(op)
    if M.shape[0] != state.space.dim:
        raise DimensionError(f"operator dim {M.shape[0]} != state dim {state.space.dim}")
    if state.is_pure:
        psi = state.data
        return complex(np.vdot(psi, M @ psi))
    rho = state.data
    # Tr(rho M) = sum_ij rho_ji M_ij
    if sp.issparse(M):
        return complex((M.multiply(rho.T)).sum())
    return complex(np.einsum("ij,ji->", M, rho))


def _clamp_variance(v: float, what: str) -> float:
    if v >= 0:
        return v
    if v >= -VARIANCE_CLAMP:
        if v < -1e-13:
            log.warning("clamping variance %.3e of %s to 0", v, what)
        return 0.0
    raise ArithmeticError(f"negative variance {v:.3e} for {what}")


def variance(state: CollectiveState, op: OperatorMatrix) -> float:
    op = OperatorMatrix(op)
    if not op.is_hermitian(1e-12 * max(1.0, op.max_abs())):
        raise ValueError("variance requires a Hermitian operator")
    mean = expectation(state, op).real
    if state.is_pure:
        w = op @ state.data
        second = np.vdot(w, w).real
    else:
        second = expectation(state, op @ op).real
    return _clamp_variance(second - mean ** 2, "operator")


def sym_covariance(state: CollectiveState, A: OperatorMatrix, B: OperatorMatrix) -> float:
    """Symmetrized covariance 1/2<AB + BA> - <A><B> of two Hermitian operators."""
    A, B = OperatorMatrix(A), OperatorMatrix(B)
    sym = 0.5 * expectation(state, A @ B + B @ A).real
    return sym - expectation(state, A).real * expectation(state, B).real


@dataclass(frozen=True)
class MomentSet:
    N: int
    expR: float
    expR2: float
    expSz: float
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.expR < -1e-12 * max(1, self.N ** 2):
            raise ValueError(f"<R> = {self.expR} is negative")
        if self.expR2 < self.expR ** 2 - 1e-9 * max(1.0, self.expR ** 2):
            raise ValueError("<R^2> < <R>^2")
        if abs(self.expSz) > self.N / 2 + 1e-12 * max(1, self.N):
            raise ValueError(f"|<S_z>| = {abs(self.expSz)} exceeds N/2")

    @property
    def varR(self) -> float:
        return max(self.expR2 - self.expR ** 2, 0.0)

    def to_dict(self) -> dict:
        out = {"N": self.N, "expR": self.expR, "expR2": self.expR2, "expSz": self.expSz}
        out.update(self.extra)
        return out


def spin_reduced(state: CollectiveState) -> CollectiveState:
    """Partial trace over the field factor (identity if there is none)."""
    sp_ = state.space
    if sp_.spin is None:
        raise ValueError("state has no spin factor")
    if sp_.n_max is None:
        return state
    ds, df = sp_.spin_dim, sp_.field_dim
    if state.is_pure:
        psi = state.data.reshape(ds, df)
        rho = psi @ psi.conj().T
    else:
        rho = np.einsum("afbf->ab", state.data.reshape(ds, df, ds, df))
    return CollectiveState(StateSpace(sp_.spin, sp_.N), _hermitize(rho))


def field_reduced(state: CollectiveState) -> CollectiveState:
    sp_ = state.space
    if sp_.n_max is None:
        raise ValueError("state has no field factor")
    if sp_.spin is None:
        return state
    ds, df = sp_.spin_dim, sp_.field_dim
    if state.is_pure:
        psi = state.data.reshape(ds, df)
        rho = psi.T @ psi.conj()
    else:
        rho = np.einsum("afag->fg", state.data.reshape(ds, df, ds, df))
    return CollectiveState(StateSpace(None, None, sp_.n_max), _hermitize(rho))


def _hermitize(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def collective_moments(state: CollectiveState, phases=None) -> MomentSet:
    """<R>, <R^2>, <S_z> of the spin factor, R = S_plus S_minus."""
    spin = spin_reduced(state)
    ops = spin_operators(spin.space, phases)
    R = r_operator(ops)
    expR = expectation(spin, R).real
    if spin.is_pure:
        w = R @ spin.data
        expR2 = np.vdot(w, w).real
    else:
        expR2 = expectation(spin, R @ R).real
    return MomentSet(spin.space.N, expR, expR2, expectation(spin, ops["S_z"]).real)


def field_tail(state: CollectiveState) -> float:
    """Population of the highest retained Fock level."""
    rho_f = field_reduced(state).dm()
    return float(rho_f[-1, -1].real)


# ---------------------------------------------------------------------------
# single-particle quantities
# ---------------------------------------------------------------------------

def reduced_bloch_vector(state: CollectiveState) -> np.ndarray:
    """Mean single-particle Bloch vector ``2<(S_x, S_y, S_z)>/N``.

    For a full-space state this is the average over particles of the
    individual reduced Bloch vectors.
    """
    spin = spin_reduced(state)
    ops = spin_operators(spin.space)
    return np.array([2 * expectation(spin, ops[k]).real / spin.space.N for k in ("S_x", "S_y", "S_z")])


def single_particle_purities(state: CollectiveState) -> np.ndarray:
    """Tr rho_i^2 for every particle.

    Symmetric states share one reduced state, so the Dicke path returns
    ``N`` equal values ``(1 + |v|^2)/2``; the full-space path takes explicit
    partial traces.
    """
    spin = spin_reduced(state)
    N = spin.space.N
    if spin.space.spin == "dicke":
        v = reduced_bloch_vector(spin)
        return np.full(N, 0.5 * (1 + v @ v))
    if N > FULL_SPACE_HARD_MAX:
        raise DimensionError("partial-trace path limited to N <= 16")
    out = np.empty(N)
    if spin.is_pure:
        psi = spin.data.reshape((2,) * N)
        for i in range(N):
            m = np.moveaxis(psi, i, 0).reshape(2, -1)
            r = m @ m.conj().T
            out[i] = np.vdot(r, r).real
    else:
        rho = spin.data.reshape((2,) * (2 * N))
        for i in range(N):
            keep = [i, N + i]
            r = np.moveaxis(rho, keep, [0, 1])
            r = r.reshape(2, 2, 2 ** (N - 1), 2 ** (N - 1))
            r = np.einsum("abkk->ab", r)
            out[i] = np.vdot(r, r).real
    return out


def purity_single_particle(state: CollectiveState) -> float:
    """Mean single-particle purity."""
    return float(single_particle_purities(state).mean())


# ---------------------------------------------------------------------------
# symmetric <-> full embedding and random states
# ---------------------------------------------------------------------------

def dicke_to_full_isometry(N: int) -> sp.csr_array:
    """Columns are the Dicke states written in the 2**N product basis."""
    dim = 2 ** N
    pop = np.array([bin(x).count("1") for x in range(dim)])
    rows = np.arange(dim)
    vals = 1.0 / np.sqrt(np.array([math.comb(N, k) for k in pop], dtype=float))
    return sp.csr_array((vals.astype(complex), (rows, pop)), shape=(dim, N + 1))


def symmetric_to_full(state: CollectiveState) -> CollectiveState:
    if state.space.spin != "dicke" or state.space.n_max is not None:
        raise ValueError("expects a pure Dicke-space state")
    N = state.space.N
    FullSpace(N, allow_large=True)
    V = dicke_to_full_isometry(N)
    space = StateSpace("full", N)
    if state.is_pure:
        return CollectiveState(space, V @ state.data)
    return CollectiveState(space, (V @ (V @ state.data).conj().T).conj().T)


def random_state(kind: str, N: int, seed, allow_large: bool = False) -> CollectiveState:
    """Haar-random pure state on the symmetric or the full space."""
    rng = np.random.default_rng(seed)
    if kind == "symmetric":
        space = StateSpace("dicke", N)
    elif kind == "full":
        FullSpace(N, allow_large=allow_large)
        space = StateSpace("full", N)
    else:
        raise ValueError(f"kind must be 'symmetric' or 'full', got {kind!r}")
    z = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    return CollectiveState(space, z / np.linalg.norm(z))


def product_state_vector(thetas, phis) -> np.ndarray:
    """Full-space vector of a product of qubits ``cos(t/2)|e> + e^{i p} sin(t/2)|g>``."""
    psi = np.ones(1, dtype=complex)
    for t, p in zip(thetas, phis):
        local = np.array([np.exp(1j * p) * np.sin(t / 2), np.cos(t / 2)])  # (g, e)
        psi = np.kron(psi, local)
    return psi


def coherent_spin_state(N: int, theta: float, phi: float) -> CollectiveState:
    """Atomic coherent state (all particles identically oriented), Dicke basis."""
    k = np.arange(N + 1)
    logc = np.array([0.5 * (math.lgamma(N + 1) - math.lgamma(j + 1) - math.lgamma(N - j + 1)) for j in k])
    c, s = math.cos(theta / 2), math.sin(theta / 2)

    def xlog(count, base):
        # count * log(base) with 0 * log(0) = 0 at the poles
        if base > 0:
            return count * math.log(base)
        return np.where(count > 0, -np.inf, 0.0)

    mag = logc + xlog(k, abs(c)) + xlog(N - k, abs(s))
    amp = np.exp(mag) * np.exp(1j * phi * (N - k)) * np.sign(c) ** k * np.sign(s) ** (N - k)
    return CollectiveState(StateSpace("dicke", N), amp / np.linalg.norm(amp))


def coherent_field(n_max: int, alpha: complex) -> np.ndarray:
    """Truncated coherent state, renormalised on the retained levels."""
    amp = np.zeros(n_max + 1, dtype=complex)
    if alpha == 0:
        amp[0] = 1
        return amp
    n = np.arange(n_max + 1)
    logf = np.array([math.lgamma(k + 1) for k in n])
    mag = -abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * logf
    amp = np.exp(mag) * np.exp(1j * np.angle(alpha) * n)
    return amp / np.linalg.norm(amp)


def thermal_field(n_max: int, nbar: float) -> np.ndarray:
    n = np.arange(n_max + 1)
    p = (nbar / (1 + nbar)) ** n / (1 + nbar) if nbar > 0 else (n == 0).astype(float)
    return np.diag(p / p.sum()).astype(complex)


def fock_cutoff(alpha_max: float, nbar: float = 0.0, tol: float = 1e-12) -> int:
    """A Fock truncation leaving less than ``tol`` population above it."""
    mean = alpha_max ** 2 + nbar
    n = int(mean + 12 * math.sqrt(mean + 1) + 20 + 30 * nbar)
    return n


def holstein_primakoff_image(state: CollectiveState) -> CollectiveState:
    """Map a symmetric spin state onto a single bosonic mode, ``|S, -S + k> -> |k>``.

    For weak excitation ``S_plus ~ sqrt(N) b^dag``, so the excitation-number
    statistics of the spin state become photon-number statistics of the image
    on a Fock space truncated at ``n_max = N``.
    """
    spin = spin_reduced(state) if state.space.n_max is not None else state
    if spin.space.spin != "dicke":
        raise ValueError("Holstein-Primakoff image needs a state on the Dicke ladder")
    return CollectiveState(StateSpace(None, None, spin.N), spin.data)
