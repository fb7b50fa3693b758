"""Bipartite negativities and the tripartite measures E1 and E2.

Negativity convention: N = sum_k |lambda_k| - 1 over eigenvalues of the
partially transposed density matrix (trace norm minus one).  This is TWICE
the (||.||_1 - 1)/2 convention used by most libraries; every value in this
package and its output files follows the unhalved convention.

For a pure state the one-vs-rest negativity reduces to the Schmidt form
N = (sum_i sqrt(p_i))^2 - 1, which is how the one-vs-rest terms are computed.
Pairwise (mixed-state) negativities go through an explicit reduced density
matrix and a partial-transpose eigensolve.  Fixed-magnetization states make
both objects block-diagonal:

  * the reduced density matrix is block-diagonal in the kept up-count,
  * the partial transpose over block X is block-diagonal in the grading
    q = (up-count outside X) - (up-count inside X),

so all eigensolves run block-by-block and N <= 14 chains stay cheap.
Test states that straddle magnetization sectors (GHZ) fall back to small
dense eigensolves.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionCapError, NegativityDomainError, PartitionError
from .models import ModelKind, ModelParams, StateVector, popcount

logger = logging.getLogger(__name__)

CLAMP_TOL = 1e-10       # negativities in [-CLAMP_TOL, 0) report as 0
MONOGAMY_TOL = 1e-8     # pi terms below -MONOGAMY_TOL are logged as findings
DEFAULT_KEPT_CAP = 2 ** 14   # kept-space dimension cap for reduced density matrices
DENSE_PT_CAP = 2 ** 12       # dense partial-transpose fallback cap


@dataclass(frozen=True)
class TripartitePartition:
    """Disjoint, exhaustive split of the sites into blocks A, B, C."""

    block_a: tuple[str, ...]
    block_b: tuple[str, ...]
    block_c: tuple[str, ...]

    def validate(self, site_layout: tuple[str, ...]) -> None:
        blocks = (self.block_a, self.block_b, self.block_c)
        if any(len(b) == 0 for b in blocks):
            raise PartitionError("every block must be nonempty")
        seen: set[str] = set()
        for b in blocks:
            for lbl in b:
                if lbl in seen:
                    raise PartitionError(f"site {lbl!r} appears in two blocks")
                if lbl not in site_layout:
                    raise PartitionError(f"site {lbl!r} not in layout")
                seen.add(lbl)
        if seen != set(site_layout):
            raise PartitionError("blocks do not cover all sites")

    def blocks(self) -> dict[str, tuple[str, ...]]:
        return {"a": self.block_a, "b": self.block_b, "c": self.block_c}


def default_partition(params: ModelParams) -> TripartitePartition:
    """The standard split: impurity block plus the two bulks."""
    if params.kind is ModelKind.TWO_IMPURITY_KONDO:
        return TripartitePartition(
            block_a=("0_L", "0_R"),
            block_b=tuple(f"{k}_L" for k in range(1, params.n_left)),
            block_c=tuple(f"{k}_R" for k in range(1, params.n_right)),
        )
    return TripartitePartition(
        block_a=("0",),
        block_b=tuple(f"{k}_L" for k in range(1, params.n_left + 1)),
        block_c=tuple(f"{k}_R" for k in range(1, params.n_right + 1)),
    )


@dataclass(frozen=True)
class NegativitySet:
    """One-vs-rest and pairwise negativities of one tripartite state."""

    n_a_bc: float
    n_b_ac: float
    n_c_ab: float
    n_ab: float
    n_ac: float
    n_bc: float

    def map(self, fn) -> "NegativitySet":
        return NegativitySet(
            n_a_bc=fn(self.n_a_bc),
            n_b_ac=fn(self.n_b_ac),
            n_c_ab=fn(self.n_c_ab),
            n_ab=fn(self.n_ab),
            n_ac=fn(self.n_ac),
            n_bc=fn(self.n_bc),
        )


@dataclass(frozen=True)
class TripartiteMeasures:
    e1: float
    e2: float
    pi_a: float
    pi_b: float
    pi_c: float
    negativities: NegativitySet
    log_negativities: NegativitySet


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace matrix stored block-diagonally.

    ``graded`` means the blocks are pure up-count classes and entries between
    classes vanish (true for reductions of fixed-Sz states); this is what the
    block partial-transpose eigensolve relies on.
    """

    sites: tuple[str, ...]
    blocks: tuple[tuple[np.ndarray, np.ndarray], ...]  # (configs, matrix)
    graded: bool

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def trace(self) -> float:
        return float(sum(np.trace(m).real for _, m in self.blocks))

    def eigenvalues(self) -> np.ndarray:
        """Spectrum over the full kept space (absent configs contribute zeros)."""
        support = sum(len(c) for c, _ in self.blocks)
        eigs = [np.linalg.eigvalsh(m) for _, m in self.blocks]
        eigs.append(np.zeros(2 ** self.n_sites - support))
        return np.sort(np.concatenate(eigs))

    def to_dense(self) -> np.ndarray:
        dim = 2 ** self.n_sites
        if dim > DENSE_PT_CAP:
            raise DimensionCapError(
                f"dense form of a {self.n_sites}-site density matrix exceeds cap {DENSE_PT_CAP}"
            )
        dtype = np.result_type(*(m.dtype for _, m in self.blocks))
        out = np.zeros((dim, dim), dtype=dtype)
        for cfgs, m in self.blocks:
            out[np.ix_(cfgs, cfgs)] = m
        return out

    @classmethod
    def from_pure(cls, state: StateVector) -> "DensityMatrix":
        """Projector |psi><psi| over the state's own configuration support."""
        amps = np.asarray(state.amps)
        rho = np.outer(amps, amps.conj())
        graded = state.fixed_sz_twice() is not None
        return cls(
            sites=state.site_layout,
            blocks=((np.asarray(state.configs, dtype=np.int64), rho),),
            graded=graded,
        )


def _subindex(configs: np.ndarray, positions: tuple[int, ...]) -> np.ndarray:
    """Pack the bits at ``positions`` into a compact little-endian index."""
    out = np.zeros(len(configs), dtype=np.int64)
    for j, p in enumerate(positions):
        out |= ((configs >> p) & 1) << j
    return out


def _resolve_block(state: StateVector, block) -> tuple[int, ...]:
    labels = tuple(block)
    if len(labels) == 0:
        raise PartitionError("block is empty")
    if len(set(labels)) != len(labels):
        raise PartitionError("block repeats a site")
    missing = [l for l in labels if l not in state.site_layout]
    if missing:
        raise PartitionError(f"sites {missing} not in layout")
    if len(labels) >= state.n_sites:
        raise PartitionError("block must be a proper subset of the sites")
    return state.positions(labels)


def schmidt_negativity(state: StateVector, block) -> float:
    """One-vs-rest negativity of a pure state across block | rest.

    Computed from the Schmidt spectrum: N = (sum_i s_i)^2 - 1 with s_i the
    singular values of the amplitude matrix (so sum_i s_i^2 = 1).
    """
    pos_block = _resolve_block(state, block)
    pos_rest = tuple(p for p in range(state.n_sites) if p not in pos_block)
    if state.n_sites > 24:
        raise DimensionCapError(f"{state.n_sites}-site amplitude matrix too large")
    rows = _subindex(np.asarray(state.configs), pos_block)
    cols = _subindex(np.asarray(state.configs), pos_rest)
    amps = np.asarray(state.amps)
    m = np.zeros((2 ** len(pos_block), 2 ** len(pos_rest)), dtype=amps.dtype)
    m[rows, cols] = amps
    s = np.linalg.svd(m, compute_uv=False)
    return _clamp(float(np.sum(s) ** 2 - 1.0), "schmidt negativity")


def reduced_density_matrix(
    state: StateVector, keep, cap: int = DEFAULT_KEPT_CAP
) -> DensityMatrix:
    """Trace out everything except ``keep`` (ordered site labels).

    The result is Hermitian, unit trace, positive semidefinite, and graded by
    the kept up-count whenever the state has fixed magnetization.
    """
    pos_keep = _resolve_block(state, keep)
    pos_rest = tuple(p for p in range(state.n_sites) if p not in pos_keep)
    kept_dim = 2 ** len(pos_keep)
    if kept_dim > cap:
        raise DimensionCapError(
            f"kept space of {len(pos_keep)} sites (dim {kept_dim}) exceeds cap {cap}"
        )
    configs = np.asarray(state.configs)
    amps = np.asarray(state.amps)
    kept_idx = _subindex(configs, pos_keep)
    # Compact the traced index to the values that actually occur.
    traced_vals, traced_idx = np.unique(_subindex(configs, pos_rest), return_inverse=True)

    graded = state.fixed_sz_twice() is not None
    blocks: list[tuple[np.ndarray, np.ndarray]] = []
    if graded:
        ups = popcount(kept_idx)
        for m_up in np.unique(ups):
            sel = ups == m_up
            k_vals, k_rows = np.unique(kept_idx[sel], return_inverse=True)
            mat = np.zeros((len(k_vals), len(traced_vals)), dtype=amps.dtype)
            mat[k_rows, traced_idx[sel]] = amps[sel]
            blocks.append((k_vals, mat @ mat.conj().T))
    else:
        mat = np.zeros((kept_dim, len(traced_vals)), dtype=amps.dtype)
        mat[kept_idx, traced_idx] = amps
        blocks.append((np.arange(kept_dim, dtype=np.int64), mat @ mat.conj().T))
    return DensityMatrix(
        sites=tuple(keep), blocks=tuple(blocks), graded=graded
    )


def _ppt_eigs_graded(rho: DensityMatrix, pos_x: tuple[int, ...]) -> np.ndarray:
    """Eigenvalues of the partial transpose, block by block in the q-grading.

    For rho block-diagonal in the kept up-count, the transpose over X only
    couples kept configs with equal q = up(Y) - up(X); the entry at
    (row=(x,y), col=(x',y')) of rho^T_X is rho[(x',y),(x,y')], gathered here
    with vectorized index arithmetic.  The transpose relocates weight onto
    recombined configs x|y' outside rho's own support, so the blocks are
    enumerated over all X-part x Y-part combinations of that support.
    """
    k = rho.n_sites
    if k > 20:
        raise DimensionCapError(f"graded partial transpose over {k} sites exceeds cap")
    dim = 2 ** k
    mask_x = np.int64(sum(1 << p for p in pos_x))
    mask_y = np.int64(2 ** k - 1) & ~mask_x

    block_of = np.full(dim, -1, dtype=np.int64)
    pos_in = np.zeros(dim, dtype=np.int64)
    class_of_block: dict[int, int] = {}
    for bi, (cfgs, _) in enumerate(rho.blocks):
        block_of[cfgs] = bi
        pos_in[cfgs] = np.arange(len(cfgs))
        class_of_block[int(popcount(cfgs[:1])[0])] = bi

    support = np.concatenate([cfgs for cfgs, _ in rho.blocks])
    x_parts = np.unique(support & mask_x)
    y_parts = np.unique(support & mask_y)
    members_all = np.unique(x_parts[:, None] | y_parts[None, :])
    ux = popcount(members_all & mask_x)
    uy = popcount(members_all & mask_y)
    dtype = np.result_type(*(m.dtype for _, m in rho.blocks))
    single_class = next(iter(class_of_block)) if len(class_of_block) == 1 else None

    def _gather(rows_cfg: np.ndarray, cols_cfg: np.ndarray, s_class: int) -> np.ndarray:
        bid = class_of_block.get(s_class)
        if bid is None:
            return np.zeros((len(rows_cfg), len(cols_cfg)), dtype=dtype)
        k1 = (cols_cfg & mask_x)[None, :] | (rows_cfg & mask_y)[:, None]
        k2 = (rows_cfg & mask_x)[:, None] | (cols_cfg & mask_y)[None, :]
        valid = (block_of[k1] == bid) & (block_of[k2] == bid)
        sub = rho.blocks[bid][1][pos_in[k1], pos_in[k2]]
        return np.where(valid, sub, 0)

    eig_chunks: list[np.ndarray] = []
    for qv in np.unique(uy - ux):
        sel = (uy - ux) == qv
        members = members_all[sel]
        m_uy = uy[sel]
        groups = {int(a): members[m_uy == a] for a in np.unique(m_uy)}
        if single_class is not None:
            # Pure up-count class s: only sub-blocks with uy_row + uy_col = s + q
            # survive, so the q-block splits into (a, s+q-a) pairs whose spectrum
            # is +-(singular values) plus an ordinary eigensolve on the diagonal pair.
            for a, rows_cfg in groups.items():
                a_partner = single_class + int(qv) - a
                if a_partner < a or a_partner not in groups:
                    continue
                if a_partner == a:
                    eig_chunks.append(np.linalg.eigvalsh(_gather(rows_cfg, rows_cfg, single_class)))
                else:
                    sv = np.linalg.svd(
                        _gather(rows_cfg, groups[a_partner], single_class), compute_uv=False
                    )
                    eig_chunks.append(sv)
                    eig_chunks.append(-sv)
        else:
            n = len(members)
            offsets = {}
            start = 0
            for a, cfgs in groups.items():
                offsets[a] = start
                start += len(cfgs)
            t = np.zeros((n, n), dtype=dtype)
            for a_row, rows_cfg in groups.items():
                for a_col, cols_cfg in groups.items():
                    s_class = a_row + a_col - int(qv)
                    if s_class not in class_of_block:
                        continue
                    r0, c0 = offsets[a_row], offsets[a_col]
                    t[r0:r0 + len(rows_cfg), c0:c0 + len(cols_cfg)] = _gather(
                        rows_cfg, cols_cfg, s_class
                    )
            eig_chunks.append(np.linalg.eigvalsh(t))
    return np.concatenate(eig_chunks)


def _ppt_eigs_dense(rho: DensityMatrix, pos_x: tuple[int, ...]) -> np.ndarray:
    """Brute-force partial transpose for states without a magnetization grading."""
    dense = rho.to_dense()
    k = rho.n_sites
    tensor = dense.reshape((2,) * (2 * k))
    for p in pos_x:
        tensor = np.swapaxes(tensor, k - 1 - p, 2 * k - 1 - p)
    dim = 2 ** k
    return np.linalg.eigvalsh(tensor.reshape(dim, dim))


def ppt_negativity(rho: DensityMatrix, transpose_block) -> float:
    """Negativity sum|lambda| - 1 of rho partially transposed over a block."""
    labels = tuple(transpose_block)
    if len(labels) == 0 or len(labels) >= rho.n_sites:
        raise PartitionError("transpose block must be a nonempty proper subset")
    try:
        pos_x = tuple(rho.sites.index(lbl) for lbl in labels)
    except ValueError as exc:
        raise PartitionError(f"transpose block {labels} not within {rho.sites}") from exc
    if rho.graded:
        eigs = _ppt_eigs_graded(rho, pos_x)
    else:
        eigs = _ppt_eigs_dense(rho, pos_x)
    return _clamp(float(np.abs(eigs).sum() - 1.0), "ppt negativity")


def log_negativity(n: float) -> float:
    """Logarithmic negativity log(2N + 1), natural log."""
    if n < -CLAMP_TOL:
        raise NegativityDomainError(f"negativity {n} below clamp tolerance")
    return float(np.log1p(2.0 * max(n, 0.0)))


def _clamp(value: float, what: str) -> float:
    # Symmetric window: |N| at the noise floor reports as exactly 0, so a
    # disentangled block zeroes E1 exactly instead of leaving cube-root
    # amplified float dust (0 +- 1e-16 would give E1 ~ 1e-5 otherwise).
    if value < -CLAMP_TOL:
        raise NegativityDomainError(f"{what} = {value} below -{CLAMP_TOL}")
    return 0.0 if value <= CLAMP_TOL else value


def tripartite_measures(
    state: StateVector,
    partition: TripartitePartition,
    include_pairwise: bool = True,
    cap: int = DEFAULT_KEPT_CAP,
) -> TripartiteMeasures:
    """All negativities of the three-block split plus E1, E2 and the pi terms.

    One-vs-rest terms use the Schmidt route; pairwise terms trace out the
    third block and eigensolve the partial transpose.  With
    ``include_pairwise=False`` only E1 and the one-vs-rest terms are
    computed (cheaper, and usable at sizes where the pairwise reductions
    are out of reach); the remaining fields are NaN.
    """
    partition.validate(state.site_layout)
    a, b, c = partition.block_a, partition.block_b, partition.block_c
    n_a = schmidt_negativity(state, a)
    n_b = schmidt_negativity(state, b)
    n_c = schmidt_negativity(state, c)
    e1 = float((n_a * n_b * n_c) ** (1.0 / 3.0))

    if include_pairwise:
        pair = {}
        for name, keep, transpose in (
            ("ab", a + b, a),
            ("ac", a + c, a),
            ("bc", b + c, b),
        ):
            try:
                rho = reduced_density_matrix(state, keep, cap=cap)
            except DimensionCapError as exc:
                raise DimensionCapError(f"pairwise block {name}: {exc}") from exc
            pair[name] = ppt_negativity(rho, transpose)
        pi_a = n_a ** 2 - pair["ab"] ** 2 - pair["ac"] ** 2
        pi_b = n_b ** 2 - pair["ab"] ** 2 - pair["bc"] ** 2
        pi_c = n_c ** 2 - pair["ac"] ** 2 - pair["bc"] ** 2
        for name, val in (("pi_a", pi_a), ("pi_b", pi_b), ("pi_c", pi_c)):
            if val < -MONOGAMY_TOL:
                logger.warning("monogamy violation finding: %s = %g", name, val)
        # The pi terms are averaged raw (no clamping); see output metadata.
        e2 = (pi_a + pi_b + pi_c) / 3.0
        negs = NegativitySet(
            n_a_bc=n_a, n_b_ac=n_b, n_c_ab=n_c,
            n_ab=pair["ab"], n_ac=pair["ac"], n_bc=pair["bc"],
        )
    else:
        nan = float("nan")
        pi_a = pi_b = pi_c = e2 = nan
        negs = NegativitySet(
            n_a_bc=n_a, n_b_ac=n_b, n_c_ab=n_c, n_ab=nan, n_ac=nan, n_bc=nan
        )

    def _log(x: float) -> float:
        return log_negativity(x) if np.isfinite(x) else float("nan")

    return TripartiteMeasures(
        e1=e1, e2=e2, pi_a=pi_a, pi_b=pi_b, pi_c=pi_c,
        negativities=negs, log_negativities=negs.map(_log),
    )
