"""Moment closure: entropic-drift solve, cubic baseline, linear baseline.

The entropic (default) model matches the stress and heat-flux relaxation
rates with a polynomial drift potential while an extra quartic basis member
plus one scalar constraint pins the entropy dissipation.  The basis used
here contains eleven matched polynomials

    {v1, v2, v3,
     v1^2 - |v|^2/3, v2^2 - |v|^2/3, v1 v2, v1 v3, v2 v3,
     v1 |v|^2, v2 |v|^2, v3 |v|^2}

and the quartic ``|v|^4``.  The three linear members carry zero production
(momentum conservation) and determine the constant drift term; they must
sit inside the solve because the constant term feeds back into the
heat-flux balance whenever odd moments are present.  The redundant third
diagonal trace-free entry is omitted so the set stays linearly independent
and the Gram matrix strictly positive definite.

Everything is assembled generically from the defining quadratic forms via
exact polynomial calculus; the linear maps from central moments to matrix
entries are compiled once at import, so the per-cell work is a handful of
gathers plus small batched linear solves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kinetics import DegenerateCellError, GasModel, transport_scales
from .moments import MomentSet
from .polynomials import Polynomial, Term, grad_dot, norm_power

DEFAULT_EPS0 = 1.0e-3
DEFAULT_MIN_PARTICLES = 30
DEFAULT_MAX_CONDITION = 1.0e12

#: Entropy-constraint weight: <sum_a c_a lap H_a, f> = ENTROPY_FACTOR * c_d * <|v'|^4, f>.
ENTROPY_FACTOR = 30.0

_V = [Polynomial.variable(i) for i in range(3)]
_NORM2 = norm_power(2)
_NORM4 = norm_power(4)


def _stress_poly(i: int, j: int) -> Polynomial:
    p = _V[i] * _V[j]
    if i == j:
        p = p - (1.0 / 3.0) * _NORM2
    return p


MOMENTUM_POLYS = (_V[0], _V[1], _V[2])
STRESS_POLYS = (
    _stress_poly(0, 0),
    _stress_poly(1, 1),
    _stress_poly(0, 1),
    _stress_poly(0, 2),
    _stress_poly(1, 2),
)
HEAT_POLYS = tuple(_V[i] * _NORM2 for i in range(3))
ENTROPY_POLY = _NORM4

#: (row index into the production 9-vector) for each stress row above.
_STRESS_PRODUCTION_SLOTS = (0, 3, 1, 2, 4)
#: (i, j) pairs of the trace-free rows, in basis order.
STRESS_ROW_PAIRS = ((0, 0), (1, 1), (0, 1), (0, 2), (1, 2))

N_MOMENTUM = 3
N_MATCHED = N_MOMENTUM + len(STRESS_POLYS) + len(HEAT_POLYS)  # 11
N_BASIS = N_MATCHED + 1                                       # 12
_STRESS_OFFSET = N_MOMENTUM
_HEAT_OFFSET = N_MOMENTUM + len(STRESS_POLYS)


@dataclass(frozen=True)
class BasisSet:
    """Matched polynomials, the quartic entropy member, and the mass member."""

    matched: tuple[Polynomial, ...]
    entropy_poly: Polynomial
    conserved: tuple[Polynomial, ...]

    def __post_init__(self):
        rank = _span_rank(self.matched + (self.entropy_poly,) + self.conserved)
        expected = len(self.matched) + 1 + len(self.conserved)
        if rank != expected:
            raise ValueError(
                f"basis polynomials are linearly dependent (rank {rank} != {expected})"
            )

    @classmethod
    def default(cls) -> "BasisSet":
        return cls(matched=MOMENTUM_POLYS + STRESS_POLYS + HEAT_POLYS,
                   entropy_poly=ENTROPY_POLY,
                   conserved=(Polynomial.constant(1.0),))

    @property
    def all_polys(self) -> tuple[Polynomial, ...]:
        return self.matched + (self.entropy_poly,)


def _span_rank(polys) -> int:
    terms = sorted({t for p in polys for t in p.terms})
    mat = np.array([[p.terms.get(t, 0.0) for t in terms] for p in polys])
    return int(np.linalg.matrix_rank(mat))


# ---------------------------------------------------------------------------
# Compiled moment-index machinery
# ---------------------------------------------------------------------------

_INDEX: dict[Term, int] = {}


def _compile(poly: Polynomial):
    cols = []
    coeffs = []
    for term, coeff in sorted(poly.terms.items()):
        if term not in _INDEX:
            _INDEX[term] = len(_INDEX)
        cols.append(_INDEX[term])
        coeffs.append(coeff)
    return np.asarray(cols, dtype=np.intp), np.asarray(coeffs, dtype=float)


def _expect(table: np.ndarray, compiled) -> np.ndarray:
    cols, coeffs = compiled
    if cols.size == 0:
        return np.zeros(table.shape[0])
    return table[:, cols] @ coeffs


_BASIS = list(MOMENTUM_POLYS + STRESS_POLYS + HEAT_POLYS) + [ENTROPY_POLY]
_STAB_FIELD = tuple(_V[i] * _NORM4 for i in range(3))   # v'_i |v'|^4

_GD = [[_compile(grad_dot(_BASIS[a], _BASIS[b])) for b in range(N_BASIS)]
       for a in range(N_BASIS)]
_LAP = [_compile(p.laplacian()) for p in _BASIS]
_VDG = [_compile(sum((_V[i] * p.diff(i) for i in range(3)), Polynomial()))
        for p in _BASIS[:N_MATCHED]]
_STAB = [_compile(sum((_STAB_FIELD[i] * p.diff(i) for i in range(3)), Polynomial()))
         for p in _BASIS[:N_MATCHED]]
_DIH = [[_compile(p.diff(i)) for p in _BASIS] for i in range(3)]
_M4_0 = _compile(_NORM4)
_M4_I = [_compile(_V[i] * _NORM4) for i in range(3)]
_PI = [[_compile(_V[i] * _V[j]) for j in range(3)] for i in range(3)]
_Q_I = [_compile(0.5 * _V[i] * _NORM2) for i in range(3)]

# Cubic baseline: rows are the plain second moments (their trace carries the
# energy balance) plus the heat-flux triplet; unknowns are a symmetric linear
# drift tensor and a quadratic isotropic correction.
_CUBIC_ROWS = [_V[0] * _V[0], _V[0] * _V[1], _V[0] * _V[2],
               _V[1] * _V[1], _V[1] * _V[2], _V[2] * _V[2]] + list(HEAT_POLYS)
_CUBIC_ROW_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
_CUBIC_PROD_SLOTS = (0, 1, 2, 3, 4, 5)


def _linear_field(k: int, l: int):
    """Drift field of the symmetric-tensor unknown c_{kl}."""
    f = [Polynomial(), Polynomial(), Polynomial()]
    f[k] = f[k] + _V[l]
    if k != l:
        f[l] = f[l] + _V[k]
    return tuple(f)


def _field_dot_grad(fieldpolys, row: Polynomial) -> Polynomial:
    return sum((fieldpolys[i] * row.diff(i) for i in range(3)), Polynomial())


_CUBIC_FIELDS = [_linear_field(k, l) for (k, l) in _CUBIC_ROW_PAIRS]
_CGD = [[_compile(_field_dot_grad(f, row)) for f in _CUBIC_FIELDS]
        for row in _CUBIC_ROWS]
# gamma field k: e_k * (|v|^2 - 3 theta); the theta part uses <d_k H>.
_CGAMMA = [[_compile(_NORM2 * row.diff(k)) for k in range(3)] for row in _CUBIC_ROWS]
_CDIH = [[_compile(row.diff(k)) for k in range(3)] for row in _CUBIC_ROWS]
_CLAP = [_compile(row.laplacian()) for row in _CUBIC_ROWS]
_CVDG = [_compile(sum((_V[i] * row.diff(i) for i in range(3)), Polynomial()))
         for row in _CUBIC_ROWS]
_CLAM = [_compile(sum((_V[i] * _NORM2 * row.diff(i) for i in range(3)), Polynomial()))
         for row in _CUBIC_ROWS]

#: Frozen list of every central-moment multi-index the solver reads.
MOMENT_INDICES: tuple[Term, ...] = tuple(sorted(_INDEX, key=_INDEX.get))
N_MOMENTS = len(MOMENT_INDICES)

#: Highest per-axis exponent, used by the particle moment kernel.
_MAX_AXIS_EXP = tuple(max(t[axis] for t in MOMENT_INDICES) for axis in range(3))


def moment_table(ms: MomentSet) -> np.ndarray:
    """Single-row moment table (shape ``(1, N_MOMENTS)``) from a moment set."""
    return np.array([[ms.moments[t] for t in MOMENT_INDICES]])


_MAXWELL_ROW: np.ndarray | None = None


def _maxwell_row() -> np.ndarray:
    """Moment table row of the unit Maxwellian (rho = theta = 1)."""
    global _MAXWELL_ROW
    if _MAXWELL_ROW is None:
        from .moments import gaussian_central_moments
        _MAXWELL_ROW = moment_table(gaussian_central_moments(np.eye(3)))[0]
    return _MAXWELL_ROW


def particle_moment_tables(dv: np.ndarray, cell_ids: np.ndarray, n_cells: int,
                           rho: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Per-cell central moment tables from centered velocities.

    ``dv`` must already be centered on the per-cell mean; ``rho`` is the
    per-cell mass density used to scale the moments.
    """
    powers = []
    for axis in range(3):
        p = np.empty((_MAX_AXIS_EXP[axis] + 1, dv.shape[0]))
        p[0] = 1.0
        for e in range(1, _MAX_AXIS_EXP[axis] + 1):
            np.multiply(p[e - 1], dv[:, axis], out=p[e])
        powers.append(p)
    table = np.zeros((n_cells, N_MOMENTS))
    safe = np.maximum(counts, 1)
    mono = np.empty(dv.shape[0])
    for col, term in enumerate(MOMENT_INDICES):
        np.multiply(powers[0][term[0]], powers[1][term[1]], out=mono)
        mono *= powers[2][term[2]]
        table[:, col] = np.bincount(cell_ids, weights=mono, minlength=n_cells)
    table *= (rho / safe)[:, None]
    return table


# ---------------------------------------------------------------------------
# Stabilizer and production terms
# ---------------------------------------------------------------------------

def stabilization_arrays(m4_0, rho, theta, eps0: float = DEFAULT_EPS0):
    """Quartic-excess stabilizer magnitude (array form of the scalar rule)."""
    m4_0 = np.asarray(m4_0, dtype=float)
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    iso = 15.0 * rho * theta ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        excess = np.where(iso > 0.0, (m4_0 - iso) ** 2 / iso ** 2, 0.0)
    return eps0 * np.sqrt((2.0 * theta) ** 4) * excess


def stabilization_coefficient(ms: MomentSet, eps0: float = DEFAULT_EPS0) -> float:
    """Drift-stabilizer base coefficient from the relative quartic excess.

    The quintic drift term carries ``6 *`` this value (gradient of the
    sixth power of speed), exposed as ``c4`` on the solved coefficients.
    """
    return float(stabilization_arrays(ms.contracted(4), ms.rho, ms.theta, eps0))


def production_terms(ms: MomentSet, model: GasModel) -> np.ndarray:
    """Relaxation productions ``(-p/mu sigma_ij ; -(2/3)(p/mu) q_i)``.

    Ordered as the six stress entries (11, 12, 13, 22, 23, 33) followed by
    the three heat-flux entries.  Maxwell-molecule rates; for hard spheres
    the same structure is evaluated with the hard-sphere viscosity.
    """
    mu, p, _ = transport_scales(ms.theta, ms.rho, model)
    rate = p / mu
    sigma = ms.stress
    q = ms.heat_flux
    out = np.empty(9)
    out[:6] = -rate * np.array([sigma[0, 0], sigma[0, 1], sigma[0, 2],
                                sigma[1, 1], sigma[1, 2], sigma[2, 2]])
    out[6:] = -(2.0 / 3.0) * rate * q
    return out


# ---------------------------------------------------------------------------
# Drift coefficient containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DriftCoefficients:
    """Solved drift ``A(v') = -v'/tau + A_nl(v')`` of the entropic model.

    ``A_nl`` collects the constant, linear (trace-free symmetric), cubic,
    and stabilizing quintic terms:

        A_nl = c0 + c1_sym v' + sum_i c2_i (e_i |v'|^2 + 2 v'_i v')
             + 4 c3 v' |v'|^2 - c4 v' |v'|^4
    """

    c0: np.ndarray
    c1_sym: np.ndarray
    c2: np.ndarray
    c3: float
    c4: float
    tau: float
    diffusion: float
    basis_coefficients: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def evaluate_nonlinear(self, vprime) -> np.ndarray:
        v = np.atleast_2d(np.asarray(vprime, dtype=float))
        n2 = np.einsum("ni,ni->n", v, v)
        out = np.broadcast_to(self.c0, v.shape).copy()
        out += v @ self.c1_sym.T
        out += self.c2 * n2[:, None] + 2.0 * (v @ self.c2)[:, None] * v
        out += (4.0 * self.c3 * n2 - self.c4 * n2 ** 2)[:, None] * v
        return out if np.asarray(vprime).ndim > 1 else out[0]

    def evaluate(self, vprime) -> np.ndarray:
        return self.evaluate_nonlinear(vprime) - np.asarray(vprime) / self.tau

    @property
    def is_equilibrium_trivial(self) -> bool:
        return (np.allclose(self.c0, 0) and np.allclose(self.c1_sym, 0)
                and np.allclose(self.c2, 0) and self.c3 == 0 and self.c4 == 0)


@dataclass(frozen=True)
class CubicCoefficients:
    """Solved cubic-baseline drift."""

    c_mat: np.ndarray
    gamma: np.ndarray
    lam: float
    theta: float
    heat_flux: np.ndarray
    rho: float
    tau: float
    diffusion: float

    def evaluate_nonlinear(self, vprime) -> np.ndarray:
        v = np.atleast_2d(np.asarray(vprime, dtype=float))
        n2 = np.einsum("ni,ni->n", v, v)
        out = v @ self.c_mat.T
        out += np.outer(n2 - 3.0 * self.theta, self.gamma)
        out += self.lam * (n2[:, None] * v - 2.0 * self.heat_flux / self.rho)
        return out if np.asarray(vprime).ndim > 1 else out[0]

    def evaluate(self, vprime) -> np.ndarray:
        return self.evaluate_nonlinear(vprime) - np.asarray(vprime) / self.tau


@dataclass(frozen=True)
class LinearCoefficients:
    """Pure Ornstein-Uhlenbeck relaxation drift."""

    tau: float
    diffusion: float

    def evaluate_nonlinear(self, vprime) -> np.ndarray:
        return np.zeros_like(np.asarray(vprime, dtype=float))

    def evaluate(self, vprime) -> np.ndarray:
        return -np.asarray(vprime) / self.tau


# ---------------------------------------------------------------------------
# Entropic-model assembly and solve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssembledSystem:
    """Linear system of one cell, kept for inspection and verification.

    ``R`` is the Gram matrix of basis gradients, ``Q`` the Laplacian
    moments, ``G`` the constraint shift, ``b`` the right-hand side with the
    entropy row last, ``c_hat`` the constrained direction, and ``L`` the
    reduced system whose solution recombines into the drift coefficients.
    """

    R: np.ndarray
    Q: np.ndarray
    G: np.ndarray
    b: np.ndarray
    c_hat: np.ndarray
    S: float
    tau: float
    diffusion: float
    c_d: float

    @property
    def L(self) -> np.ndarray:
        n = N_MATCHED
        out = np.empty((n + 1, n + 1))
        out[:n, :n] = self.R[:n, :n]
        out[:n, n] = self.Q[:n]
        out[n, :n] = self.Q[:n]
        out[n, n] = self.S
        return out

    @property
    def schur_value(self) -> float:
        """Schur complement of the matched block inside ``L``."""
        n = N_MATCHED
        rbar_inv = np.linalg.inv(self.R[:n, :n])
        return float(self.S - self.Q[:n] @ rbar_inv @ self.Q[:n])

    def solve_dense(self) -> np.ndarray:
        """Reference dense solve of ``L c' = b`` plus recombination."""
        cprime = np.linalg.solve(self.L, self.b)
        return _recombine(cprime, self.c_hat)

    def solve_schur(self) -> np.ndarray:
        """Solve via the rank-one downdate of the full Gram inverse."""
        rinv = np.linalg.inv(self.R)
        c, _ = _schur_solve(rinv[None], self.Q[None], self.b[None],
                            self.c_hat[None], np.array([self.S]))
        return c[0]


def _recombine(cprime: np.ndarray, c_hat: np.ndarray) -> np.ndarray:
    out = np.empty(N_BASIS)
    out[:N_MATCHED] = cprime[:N_MATCHED] + cprime[N_MATCHED] * c_hat[:N_MATCHED]
    out[N_MATCHED] = cprime[N_MATCHED] * c_hat[N_MATCHED]
    return out


def _schur_solve(rinv, Q, b, c_hat, S):
    """Batched solve of the reduced system through the Schur complement.

    The inverse of the matched block comes from a rank-one downdate of the
    already-factorized full Gram inverse, so no second factorization is
    needed.  Returns the recombined coefficients and the Schur scalar.
    """
    n = N_MATCHED
    block = rinv[:, :n, :n]
    m = rinv[:, :n, n]
    w = rinv[:, n, n]
    rbar_inv = block - m[:, :, None] * m[:, None, :] / w[:, None, None]
    qbar = Q[:, :n]
    bbar = b[:, :n]
    h = b[:, n]
    y = np.einsum("nij,nj->ni", rbar_inv, bbar)
    z = np.einsum("nij,nj->ni", rbar_inv, qbar)
    schur = S - np.einsum("ni,ni->n", qbar, z)
    cphi_prime = (h - np.einsum("ni,ni->n", qbar, y)) / schur
    cbar_prime = y - cphi_prime[:, None] * z
    c = np.empty((rinv.shape[0], N_BASIS))
    c[:, :n] = cbar_prime + cphi_prime[:, None] * c_hat[:, :n]
    c[:, n] = cphi_prime * c_hat[:, n]
    return c, schur


def _assemble_arrays(table, tau, diffusion, c_d, productions):
    """Vectorized assembly over cells.

    ``productions`` is the 9-vector layout of :func:`production_terms`
    stacked per cell.  Returns ``(R, Q, b)`` with the entropy row last in
    ``b``.
    """
    n_cells = table.shape[0]
    R = np.empty((n_cells, N_BASIS, N_BASIS))
    for a in range(N_BASIS):
        for bidx in range(a, N_BASIS):
            val = _expect(table, _GD[a][bidx])
            R[:, a, bidx] = val
            R[:, bidx, a] = val
    Q = np.stack([_expect(table, c) for c in _LAP], axis=1)
    b = np.empty((n_cells, N_BASIS))
    for k in range(N_MATCHED):
        if k < _STRESS_OFFSET:
            prod = 0.0  # momentum rows carry no production
        elif k < _HEAT_OFFSET:
            prod = productions[:, _STRESS_PRODUCTION_SLOTS[k - _STRESS_OFFSET]]
        else:
            # heat-flux rows match <v'_i |v'|^2> = 2 q_i, hence the factor 2
            prod = 2.0 * productions[:, 6 + (k - _HEAT_OFFSET)]
        g = (_expect(table, _VDG[k]) / tau
             - diffusion * Q[:, k]
             + 6.0 * c_d * _expect(table, _STAB[k]))
        b[:, k] = prod + g
    b[:, N_MATCHED] = ENTROPY_FACTOR * c_d * _expect(table, _M4_0)
    return R, Q, b


def assemble_system(ms: MomentSet, model: GasModel,
                    eps0: float = DEFAULT_EPS0) -> AssembledSystem:
    """Assemble the closure system of one cell from its moment set."""
    mu, p, tau = transport_scales(ms.theta, ms.rho, model)
    diffusion = ms.theta / tau
    c_d = stabilization_coefficient(ms, eps0)
    table = moment_table(ms)
    prods = production_terms(ms, model)[None]
    R, Q, b = _assemble_arrays(table, tau, diffusion, c_d, prods)
    G = np.zeros(N_BASIS)
    G[N_MATCHED] = -2.0 * Q[0, N_MATCHED]
    c_hat = np.linalg.solve(R[0], Q[0] + G)
    S = float(c_hat @ Q[0])
    return AssembledSystem(R=R[0], Q=Q[0], G=G, b=b[0], c_hat=c_hat, S=S,
                           tau=tau, diffusion=diffusion, c_d=c_d)


def _c1_sym_from_vector(cvec: np.ndarray) -> np.ndarray:
    """Trace-free symmetric drift tensor from the stress coefficients."""
    a, bcoef, d12, d13, d23 = cvec[_STRESS_OFFSET:_HEAT_OFFSET]
    cmat = np.array([[a, d12 / 2.0, d13 / 2.0],
                     [d12 / 2.0, bcoef, d23 / 2.0],
                     [d13 / 2.0, d23 / 2.0, 0.0]])
    cmat -= np.eye(3) * ((a + bcoef) / 3.0)
    return 2.0 * cmat


def solve_coefficients(system: AssembledSystem,
                       ms: MomentSet | None = None) -> DriftCoefficients:
    """Solve one assembled system and package the drift coefficients."""
    c = system.solve_schur()
    return DriftCoefficients(
        c0=c[:N_MOMENTUM].copy(), c1_sym=_c1_sym_from_vector(c),
        c2=c[_HEAT_OFFSET:N_MATCHED].copy(), c3=float(c[N_MATCHED]),
        c4=6.0 * system.c_d, tau=system.tau, diffusion=system.diffusion,
        basis_coefficients=c)


def fefp_closure(ms: MomentSet, model: GasModel,
                 eps0: float = DEFAULT_EPS0) -> DriftCoefficients:
    """Convenience wrapper: assemble and solve the entropic closure."""
    return solve_coefficients(assemble_system(ms, model, eps0), ms)


def fisher_constraint_residual(coeffs: DriftCoefficients, ms: MomentSet) -> float:
    """Residual of the entropy-dissipation constraint (zero for solved cells)."""
    table = moment_table(ms)
    lap = np.array([_expect(table, c)[0] for c in _LAP])
    c_d = coeffs.c4 / 6.0
    return float(coeffs.basis_coefficients @ lap
                 - ENTROPY_FACTOR * c_d * _expect(table, _M4_0)[0])


# ---------------------------------------------------------------------------
# Cubic baseline
# ---------------------------------------------------------------------------

def _cubic_assemble_arrays(table, theta, rho, q, tau, diffusion, lam, productions):
    n_cells = table.shape[0]
    A = np.empty((n_cells, 9, 9))
    b = np.empty((n_cells, 9))
    for r in range(9):
        for f in range(6):
            A[:, r, f] = _expect(table, _CGD[r][f])
        for k in range(3):
            A[:, r, 6 + k] = (_expect(table, _CGAMMA[r][k])
                              - 3.0 * theta * _expect(table, _CDIH[r][k]))
        if r < 6:
            prod = productions[:, _CUBIC_PROD_SLOTS[r]]
        else:
            prod = 2.0 * productions[:, r]
        lam_term = _expect(table, _CLAM[r])
        for k in range(3):
            lam_term = lam_term - (2.0 * q[:, k] / rho) * _expect(table, _CDIH[r][k])
        b[:, r] = (prod + _expect(table, _CVDG[r]) / tau
                   - diffusion * _expect(table, _CLAP[r])
                   - lam * lam_term)
    return A, b


def cubic_closure(ms: MomentSet, model: GasModel,
                  eps0: float = DEFAULT_EPS0) -> CubicCoefficients:
    """Cubic-drift baseline closure of one cell."""
    mu, p, tau = transport_scales(ms.theta, ms.rho, model)
    diffusion = ms.theta / tau
    lam = -stabilization_coefficient(ms, eps0)
    table = moment_table(ms)
    q = ms.heat_flux[None]
    prods = production_terms(ms, model)[None]
    A, b = _cubic_assemble_arrays(table, ms.theta, ms.rho, q, tau, diffusion,
                                  lam, prods)
    x = np.linalg.solve(A[0], b[0])
    cmat = np.empty((3, 3))
    for val, (k, l) in zip(x[:6], _CUBIC_ROW_PAIRS):
        cmat[k, l] = cmat[l, k] = val
    return CubicCoefficients(c_mat=cmat, gamma=x[6:9].copy(), lam=lam,
                             theta=ms.theta, heat_flux=ms.heat_flux,
                             rho=ms.rho, tau=tau, diffusion=diffusion)


def linear_closure(ms: MomentSet, model: GasModel) -> LinearCoefficients:
    mu, p, tau = transport_scales(ms.theta, ms.rho, model)
    return LinearCoefficients(tau=tau, diffusion=ms.theta / tau)


# ---------------------------------------------------------------------------
# Batched per-cell solve used by the scenario loop
# ---------------------------------------------------------------------------

@dataclass
class CellDrift:
    """Per-cell drift parameters as flat arrays (one entry per cell)."""

    model: str
    tau: np.ndarray
    diffusion: np.ndarray
    theta: np.ndarray
    valid: np.ndarray
    # entropic fields
    c0: np.ndarray | None = None
    c1: np.ndarray | None = None
    c2: np.ndarray | None = None
    c3: np.ndarray | None = None
    c4: np.ndarray | None = None
    # cubic fields
    cmat: np.ndarray | None = None
    gamma: np.ndarray | None = None
    lam: np.ndarray | None = None
    qvec: np.ndarray | None = None
    rho: np.ndarray | None = None
    # solution-quality diagnostics (relative residuals, one per cell)
    res_moment: np.ndarray | None = None
    res_entropy: np.ndarray | None = None


def solve_cells(table: np.ndarray, rho: np.ndarray, counts: np.ndarray,
                model: GasModel, closure_model: str,
                eps0: float = DEFAULT_EPS0,
                min_particles: int = DEFAULT_MIN_PARTICLES,
                max_condition: float = DEFAULT_MAX_CONDITION) -> CellDrift:
    """Solve the selected closure for every cell at once.

    Cells with too few particles, nonpositive temperature, an
    ill-conditioned system, or a nonfinite solution fall back to the
    linear drift (all nonlinear coefficients zero).
    """
    n_cells = table.shape[0]
    idx = {t: i for i, t in enumerate(MOMENT_INDICES)}
    trace_cols = [idx[(2, 0, 0)], idx[(0, 2, 0)], idx[(0, 0, 2)]]
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = table[:, trace_cols].sum(axis=1) / (3.0 * np.where(rho > 0, rho, 1.0))
    ok = (counts >= min_particles) & (theta > 0.0) & (rho > 0.0)
    theta_safe = np.where(ok, theta, 1.0)
    rho_safe = np.where(ok, rho, 1.0)
    mu, p, tau = transport_scales(theta_safe, rho_safe, model)
    diffusion = theta_safe / tau
    out = CellDrift(model=closure_model, tau=tau, diffusion=diffusion,
                    theta=theta_safe, valid=ok.copy())
    if closure_model == "linear" or not np.any(ok):
        out.model = "linear"
        out.valid = np.zeros(n_cells, dtype=bool)
        return out

    rate = p / mu
    sigma_cols = {}
    for (i, j) in ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)):
        e = [0, 0, 0]
        e[i] += 1
        e[j] += 1
        sigma_cols[(i, j)] = idx[tuple(e)]
    pi = {key: table[:, col] for key, col in sigma_cols.items()}
    trace = pi[(0, 0)] + pi[(1, 1)] + pi[(2, 2)]
    prods = np.empty((n_cells, 9))
    for slot, (i, j) in enumerate(((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))):
        sig = pi[(i, j)] - (trace / 3.0 if i == j else 0.0)
        prods[:, slot] = -rate * sig
    q = np.stack([_expect(table, c) for c in _Q_I], axis=1)
    prods[:, 6:] = -(2.0 / 3.0) * rate[:, None] * q

    safe_table = table.copy()
    safe_table[~ok] = _maxwell_row()  # unit Maxwellian keeps matrices regular

    if closure_model == "fefp":
        m4_0 = _expect(safe_table, _M4_0)
        c_d = stabilization_arrays(m4_0, rho_safe, theta_safe, eps0)
        c_d = np.where(ok, c_d, 0.0)
        R, Q, b = _assemble_arrays(safe_table, tau, diffusion, c_d, prods)
        rinv = np.linalg.inv(R)
        cond = (np.abs(R).sum(axis=1).max(axis=1)
                * np.abs(rinv).sum(axis=1).max(axis=1))
        G = np.zeros((n_cells, N_BASIS))
        G[:, N_MATCHED] = -2.0 * Q[:, N_MATCHED]
        c_hat = np.einsum("nij,nj->ni", rinv, Q + G)
        S = np.einsum("ni,ni->n", c_hat, Q)
        c, schur = _schur_solve(rinv, Q, b, c_hat, S)
        ok &= (cond < max_condition) & np.isfinite(c).all(axis=1)
        ok &= np.abs(schur) > 0.0
        c[~ok] = 0.0
        rc = np.einsum("nij,nj->ni", R, c)
        bbar = b[:, :N_MATCHED]
        out.res_moment = (np.linalg.norm(rc[:, :N_MATCHED] - bbar, axis=1)
                          / (1.0 + np.linalg.norm(bbar, axis=1)))
        out.res_entropy = (np.abs(np.einsum("ni,ni->n", c, Q) - b[:, N_MATCHED])
                           / (1.0 + np.abs(b[:, N_MATCHED])))
        c1 = np.zeros((n_cells, 3, 3))
        s0 = _STRESS_OFFSET
        a, bc = c[:, s0], c[:, s0 + 1]
        c1[:, 0, 0] = a
        c1[:, 1, 1] = bc
        c1[:, 0, 1] = c1[:, 1, 0] = c[:, s0 + 2] / 2.0
        c1[:, 0, 2] = c1[:, 2, 0] = c[:, s0 + 3] / 2.0
        c1[:, 1, 2] = c1[:, 2, 1] = c[:, s0 + 4] / 2.0
        c1 -= np.eye(3)[None] * ((a + bc) / 3.0)[:, None, None]
        c1 *= 2.0
        out.c0, out.c1, out.c2 = c[:, :N_MOMENTUM], c1, c[:, _HEAT_OFFSET:N_MATCHED]
        out.c3, out.c4 = c[:, N_MATCHED], np.where(ok, 6.0 * c_d, 0.0)
        out.valid = ok
        return out

    if closure_model == "cubic":
        lam = -np.where(ok, stabilization_arrays(_expect(safe_table, _M4_0),
                                                 rho_safe, theta_safe, eps0), 0.0)
        A, b = _cubic_assemble_arrays(safe_table, theta_safe, rho_safe, q,
                                      tau, diffusion, lam, prods)
        ainv = np.linalg.inv(A)
        cond = (np.abs(A).sum(axis=1).max(axis=1)
                * np.abs(ainv).sum(axis=1).max(axis=1))
        x = np.einsum("nij,nj->ni", ainv, b)
        ok &= (cond < max_condition) & np.isfinite(x).all(axis=1)
        x[~ok] = 0.0
        ax = np.einsum("nij,nj->ni", A, x)
        out.res_moment = (np.linalg.norm(ax - b, axis=1)
                          / (1.0 + np.linalg.norm(b, axis=1)))
        out.res_entropy = np.zeros(n_cells)
        cmat = np.zeros((n_cells, 3, 3))
        for col, (k, l) in enumerate(_CUBIC_ROW_PAIRS):
            cmat[:, k, l] = x[:, col]
            cmat[:, l, k] = x[:, col]
        out.cmat, out.gamma = cmat, x[:, 6:9]
        out.lam = np.where(ok, lam, 0.0)
        out.qvec, out.rho = q, rho_safe
        out.valid = ok
        return out

    raise ValueError(f"unknown closure model {closure_model!r}")
