"""Spin-chain Hamiltonians for the two-impurity and two-channel Kondo models.

Both models are Heisenberg J1-J2 chains written in Pauli operators,

    sigma_k . sigma_k'  =  sx sx + sy sy + sz sz,

whose 4x4 two-site block has diagonal +1 (aligned) / -1 (anti-aligned) and
off-diagonal 2 on the spin-exchange pair.  All couplings are real, so every
operator built here is a real symmetric sparse matrix.  Total Sz is conserved;
operators are assembled inside a single magnetization sector.

Conventions used throughout the package:
  * bit p of a basis configuration is the site at position p of the operator's
    ``site_layout``; bit value 1 means spin up (Sz = +1/2),
  * J1 = 1 sets the unit of energy,
  * chains are open.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .errors import InvalidSectorError, ModelSizeError

logger = logging.getLogger(__name__)

# Critical point of the J1-J2 chain dimerization transition; keeps the bulk
# gapless so the impurity physics is not masked by a bulk gap.
DEFAULT_J2_RATIO = 0.2412


class ModelKind(str, Enum):
    TWO_IMPURITY_KONDO = "2ikm"
    TWO_CHANNEL_KONDO = "2ckm"


@dataclass(frozen=True)
class ModelParams:
    """Full physical description of one chain.

    ``control`` is the RKKY coupling K for the 2IKM and the channel asymmetry
    Gamma for the 2CKM.  ``n_left``/``n_right`` count sites per bulk; for the
    2IKM the impurities sit at site 0 of each chain and count toward these,
    for the 2CKM the single impurity is an extra site (N = n_left + n_right + 1).
    """

    kind: ModelKind
    j_prime: float
    control: float
    n_left: int
    n_right: int
    j2_ratio: float = DEFAULT_J2_RATIO
    j1: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.n_left != self.n_right:
            raise ModelSizeError(
                f"asymmetric bulks not supported: n_left={self.n_left}, n_right={self.n_right}"
            )
        # Spec-type lower bounds are > 0, but the decoupling limits J' = 0,
        # K = 0 and Gamma = 0 are legitimate states of the model; only
        # negative couplings are rejected.
        if self.j_prime < 0:
            raise ValueError(f"j_prime must be >= 0, got {self.j_prime}")
        if self.control < 0:
            raise ValueError(f"control must be >= 0, got {self.control}")
        if self.j1 <= 0:
            raise ValueError(f"j1 must be > 0, got {self.j1}")
        if self.j2_ratio != DEFAULT_J2_RATIO:
            logger.warning(
                "j2_ratio=%g overrides the default %g; the bulk is no longer "
                "tuned to its dimerization critical point",
                self.j2_ratio,
                DEFAULT_J2_RATIO,
            )
        min_bulk = 3 if self.j2_ratio != 0.0 else 2
        if self.n_left < min_bulk:
            raise ModelSizeError(
                f"bulk of {self.n_left} sites too short: need >= {min_bulk} "
                f"(j2_ratio={self.j2_ratio}) so every J2 bond is well-defined"
            )

    @property
    def n_total(self) -> int:
        n = self.n_left + self.n_right
        return n + 1 if self.kind is ModelKind.TWO_CHANNEL_KONDO else n

    def site_layout(self) -> tuple[str, ...]:
        """Global site labels, in bit-position order."""
        if self.kind is ModelKind.TWO_IMPURITY_KONDO:
            left = tuple(f"{k}_L" for k in range(self.n_left))
            right = tuple(f"{k}_R" for k in range(self.n_right))
            return left + right
        left = tuple(f"{k}_L" for k in range(1, self.n_left + 1))
        right = tuple(f"{k}_R" for k in range(1, self.n_right + 1))
        return ("0",) + left + right

    def ground_sector(self) -> int:
        """sz_twice of the sector holding the ground state (+1 by convention for odd N)."""
        return 0 if self.n_total % 2 == 0 else 1

    def label(self) -> str:
        return (
            f"{self.kind.value}(j_prime={self.j_prime!r}, control={self.control!r}, "
            f"n_left={self.n_left}, n_right={self.n_right}, j2_ratio={self.j2_ratio!r}, "
            f"j1={self.j1!r})"
        )


@dataclass(frozen=True)
class SectorBasis:
    """Canonical enumeration of all configurations with fixed magnetization."""

    n_sites: int
    sz_twice: int
    states: np.ndarray  # sorted ascending, dtype int64

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def n_up(self) -> int:
        return (self.n_sites + self.sz_twice) // 2

    def index_of(self, config: int | np.ndarray) -> np.ndarray:
        """Ordinal of one or more configurations (must be members)."""
        idx = np.searchsorted(self.states, config)
        inside = idx < self.dim
        if not np.all(inside) or not np.all(self.states[np.minimum(idx, self.dim - 1)] == config):
            raise KeyError("configuration not in sector")
        return idx


def sector_basis(n_sites: int, sz_twice: int) -> SectorBasis:
    """Enumerate the fixed-Sz sector, states strictly increasing as integers."""
    if n_sites < 1:
        raise InvalidSectorError(f"need at least one site, got {n_sites}")
    if abs(sz_twice) > n_sites or (n_sites + sz_twice) % 2 != 0:
        raise InvalidSectorError(
            f"sector sz_twice={sz_twice} impossible for {n_sites} sites"
        )
    n_up = (n_sites + sz_twice) // 2
    states = np.fromiter(
        (sum(1 << p for p in combo) for combo in combinations(range(n_sites), n_up)),
        dtype=np.int64,
        count=math.comb(n_sites, n_up),
    )
    states.sort()
    states.flags.writeable = False
    return SectorBasis(n_sites=n_sites, sz_twice=sz_twice, states=states)


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitudes over an explicit configuration list.

    Ground states live over a ``SectorBasis`` (all configs share one
    magnetization); test states such as GHZ may span several sectors.
    ``site_layout`` carries the bit-position -> site-label map so block
    partitions can be named by site.
    """

    site_layout: tuple[str, ...]
    configs: np.ndarray
    amps: np.ndarray

    def __post_init__(self):
        if len(self.configs) != len(self.amps):
            raise ValueError("configs and amps must have equal length")

    @property
    def n_sites(self) -> int:
        return len(self.site_layout)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def fixed_sz_twice(self) -> int | None:
        """2*Sz if every configuration shares one magnetization, else None."""
        ups = popcount(self.configs)
        first = int(ups[0])
        if np.all(ups == first):
            return 2 * first - self.n_sites
        return None

    def positions(self, labels) -> tuple[int, ...]:
        return tuple(self.site_layout.index(lbl) for lbl in labels)

    @classmethod
    def from_sector(cls, basis: SectorBasis, layout: tuple[str, ...], amps: np.ndarray) -> "StateVector":
        if len(layout) != basis.n_sites:
            raise ValueError("layout length differs from basis site count")
        return cls(site_layout=layout, configs=basis.states, amps=np.asarray(amps))

    @classmethod
    def from_dense(cls, layout: tuple[str, ...], dense: np.ndarray) -> "StateVector":
        """Build from a full 2^n amplitude vector, dropping exact zeros."""
        dense = np.asarray(dense)
        if dense.shape != (2 ** len(layout),):
            raise ValueError("dense vector has wrong length for layout")
        configs = np.nonzero(dense)[0].astype(np.int64)
        return cls(site_layout=layout, configs=configs, amps=dense[configs])


def popcount(configs: np.ndarray) -> np.ndarray:
    """Vectorized popcount for int64 configuration arrays."""
    v = np.asarray(configs, dtype=np.uint64).copy()
    count = np.zeros(v.shape, dtype=np.int64)
    while np.any(v):
        count += (v & np.uint64(1)).astype(np.int64)
        v >>= np.uint64(1)
    return count


@dataclass(frozen=True)
class SparseOperator:
    """Real symmetric sparse operator in a fixed-Sz sector basis."""

    basis: SectorBasis
    site_layout: tuple[str, ...]
    matrix: sp.csr_matrix = field(repr=False)
    label: str = ""
    params: ModelParams | None = None

    @property
    def dim(self) -> int:
        return self.basis.dim

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v


def heisenberg_operator(
    bonds: list[tuple[int, int, float]],
    basis: SectorBasis,
    site_layout: tuple[str, ...],
    label: str = "",
    params: ModelParams | None = None,
) -> SparseOperator:
    """Assemble sum_b c_b sigma_a.sigma_b over a bond list inside one sector.

    Each bond contributes c on equal-spin configurations, -c on opposite
    spins, and 2c on the exchange-flipped partner.  Zero-coefficient bonds
    are skipped so the sparsity pattern stays minimal.
    """
    states = basis.states
    dim = basis.dim
    n_up = basis.n_up
    diag = np.zeros(dim)
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for a, b, coeff in bonds:
        if coeff == 0.0:
            continue
        if a == b:
            raise ValueError(f"bond connects site {a} to itself")
        bit_a = (states >> a) & 1
        bit_b = (states >> b) & 1
        same = bit_a == bit_b
        diag += np.where(same, coeff, -coeff)
        src = np.nonzero(~same)[0]
        flipped = states[src] ^ ((1 << a) | (1 << b))
        # Exchange conserves magnetization by construction; check it anyway
        # so a bad bond index fails loudly instead of corrupting the sector.
        if src.size and not np.all(popcount(flipped) == n_up):
            raise AssertionError("exchange left the magnetization sector")
        dst = np.searchsorted(states, flipped)
        rows.append(src)
        cols.append(dst)
        vals.append(np.full(src.shape, 2.0 * coeff))
    rows.append(np.arange(dim))
    cols.append(np.arange(dim))
    vals.append(diag)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    ).tocsr()
    mat.sum_duplicates()
    return SparseOperator(
        basis=basis, site_layout=site_layout, matrix=mat, label=label, params=params
    )


def _chain_bonds(
    pos: dict[str, int], side: str, n_bulk_from: int, n_bulk_to: int, j1: float, j2: float
) -> list[tuple[int, int, float]]:
    """Nearest and next-nearest bulk bonds over sites from..to of one chain."""
    bonds = []
    for k in range(n_bulk_from, n_bulk_to):
        bonds.append((pos[f"{k}_{side}"], pos[f"{k + 1}_{side}"], j1))
    for k in range(n_bulk_from, n_bulk_to - 1):
        bonds.append((pos[f"{k}_{side}"], pos[f"{k + 2}_{side}"], j2))
    return bonds


def model_bonds(params: ModelParams) -> list[tuple[int, int, float]]:
    """The full bond list (site positions and coefficients) of a model."""
    layout = params.site_layout()
    pos = {lbl: p for p, lbl in enumerate(layout)}
    j1 = params.j1
    j2 = params.j1 * params.j2_ratio
    bonds: list[tuple[int, int, float]] = []
    if params.kind is ModelKind.TWO_IMPURITY_KONDO:
        for side in ("L", "R"):
            n = params.n_left
            bonds.append((pos[f"0_{side}"], pos[f"1_{side}"], params.j_prime * j1))
            if n >= 3:
                bonds.append((pos[f"0_{side}"], pos[f"2_{side}"], params.j_prime * j2))
            bonds += _chain_bonds(pos, side, 1, n - 1, j1, j2)
        bonds.append((pos["0_L"], pos["0_R"], j1 * params.control))
    else:
        gamma = params.control
        for side, weight in (("L", params.j_prime), ("R", params.j_prime * gamma)):
            n = params.n_left
            bonds.append((pos["0"], pos[f"1_{side}"], weight * j1))
            bonds.append((pos["0"], pos[f"2_{side}"], weight * j2))
            bonds += _chain_bonds(pos, side, 1, n, j1, j2)
    return bonds


def build_2ikm(params: ModelParams, basis: SectorBasis) -> SparseOperator:
    """Two-impurity Kondo chain: impurities at site 0 of each bulk, RKKY-coupled."""
    if params.kind is not ModelKind.TWO_IMPURITY_KONDO:
        raise ValueError(f"params are for {params.kind.value}, not 2ikm")
    if basis.n_sites != params.n_total:
        raise ModelSizeError(
            f"basis has {basis.n_sites} sites, model needs {params.n_total}"
        )
    return heisenberg_operator(
        model_bonds(params), basis, params.site_layout(), label=params.label(), params=params
    )


def build_2ckm(params: ModelParams, basis: SectorBasis) -> SparseOperator:
    """Two-channel Kondo chain: one impurity coupled to both bulks, right weighted by Gamma."""
    if params.kind is not ModelKind.TWO_CHANNEL_KONDO:
        raise ValueError(f"params are for {params.kind.value}, not 2ckm")
    if basis.n_sites != params.n_total:
        raise ModelSizeError(
            f"basis has {basis.n_sites} sites, model needs {params.n_total}"
        )
    return heisenberg_operator(
        model_bonds(params), basis, params.site_layout(), label=params.label(), params=params
    )


def build_model(params: ModelParams, basis: SectorBasis) -> SparseOperator:
    if params.kind is ModelKind.TWO_IMPURITY_KONDO:
        return build_2ikm(params, basis)
    return build_2ckm(params, basis)
