"""Cross-route verification battery: dense-vs-Lanczos and Schmidt-vs-PPT.

Randomized model configurations are solved both ways; any disagreement is a
named check failure.  A deliberate fault-injection hook (an asymmetric bump
on one matrix element) exists so the battery itself can be tested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entanglement import DensityMatrix, default_partition, ppt_negativity, schmidt_negativity
from .models import ModelKind, ModelParams, SparseOperator, build_model, sector_basis
from .solver import dense_spectrum_oracle, ground_state

ENERGY_TOL = 1e-9
OVERLAP_TOL = 1e-9
ROUTE_TOL = 1e-9

_SIZE_POOL = {
    ModelKind.TWO_IMPURITY_KONDO: (8, 10, 12),
    ModelKind.TWO_CHANNEL_KONDO: (9, 11, 13),
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_params(rng: np.random.Generator) -> ModelParams:
    kind = ModelKind.TWO_IMPURITY_KONDO if rng.random() < 0.5 else ModelKind.TWO_CHANNEL_KONDO
    n_total = int(rng.choice(_SIZE_POOL[kind]))
    j_prime = float(rng.uniform(0.2, 1.0))
    if kind is ModelKind.TWO_IMPURITY_KONDO:
        control = float(np.exp(rng.uniform(np.log(0.05), np.log(2.0))))
        half = n_total // 2
    else:
        control = float(rng.uniform(0.5, 2.0))
        half = (n_total - 1) // 2
    return ModelParams(kind=kind, j_prime=j_prime, control=control, n_left=half, n_right=half)


def _corrupt(op: SparseOperator) -> SparseOperator:
    """Test hook: bump one off-diagonal element without its mirror."""
    mat = op.matrix.tolil(copy=True)
    mat[0, op.dim - 1] += 1e-3
    return SparseOperator(
        basis=op.basis, site_layout=op.site_layout, matrix=mat.tocsr(),
        label=op.label + "|corrupted", params=op.params,
    )


def run_oracle_checks(
    n_configs: int = 20,
    seed: int = 0,
    dense_cap: int = 4096,
    corrupt_matrix_element: bool = False,
) -> list[CheckResult]:
    """The full battery over ``n_configs`` random configurations."""
    if n_configs < 1:
        raise ValueError("n_configs must be >= 1")
    rng = np.random.default_rng(seed)
    results: list[CheckResult] = []
    for i in range(n_configs):
        params = _random_params(rng)
        basis = sector_basis(params.n_total, params.ground_sector())
        if basis.dim > dense_cap:
            results.append(CheckResult(
                name=f"config[{i}] within dense cap", passed=False,
                detail=f"sector dim {basis.dim} > cap {dense_cap}",
            ))
            continue
        op = build_model(params, basis)
        if corrupt_matrix_element and i == 0:
            op = _corrupt(op)
        tag = f"config[{i}] {params.label()}"

        asym = float(np.abs(op.matrix - op.matrix.T).max())
        results.append(CheckResult(
            name=f"{tag}: hermiticity", passed=asym <= 1e-12,
            detail=f"max |H - H^T| = {asym:.3e}",
        ))

        gs = ground_state(op, seed=seed + i)
        evals, dense_vec = dense_spectrum_oracle(op, cap=dense_cap)
        de = abs(gs.energy - float(evals[0]))
        results.append(CheckResult(
            name=f"{tag}: lanczos vs dense energy", passed=de <= ENERGY_TOL,
            detail=f"|dE| = {de:.3e}",
        ))
        overlap = abs(float(np.dot(gs.vector.amps, dense_vec.amps)))
        results.append(CheckResult(
            name=f"{tag}: eigenvector overlap", passed=overlap >= 1 - OVERLAP_TOL,
            detail=f"|<lanczos|dense>| = {overlap:.12f}",
        ))

        partition = default_partition(params)
        projector = DensityMatrix.from_pure(gs.vector)
        for blk_name, block in partition.blocks().items():
            n_s = schmidt_negativity(gs.vector, block)
            n_p = ppt_negativity(projector, block)
            diff = abs(n_s - n_p)
            results.append(CheckResult(
                name=f"{tag}: schmidt vs ppt ({blk_name})", passed=diff <= ROUTE_TOL,
                detail=f"|dN| = {diff:.3e}",
            ))
    return results
