import numpy as np
import pytest

from kondotri.models import ModelParams, StateVector, build_model, sector_basis
from kondotri.solver import ground_state


def make_state(n_sites: int, pairs) -> StateVector:
    """StateVector from (config, amplitude) pairs over generic qubit labels."""
    configs = np.array([c for c, _ in pairs], dtype=np.int64)
    amps = np.array([a for _, a in pairs])
    amps = amps / np.linalg.norm(amps)
    layout = tuple(f"q{i}" for i in range(n_sites))
    return StateVector(site_layout=layout, configs=configs, amps=amps)


def bell_state() -> StateVector:
    return make_state(2, [(0b01, 1.0), (0b10, -1.0)])


def ghz_state(n: int = 3) -> StateVector:
    return make_state(n, [(0, 1.0), (2 ** n - 1, 1.0)])


def w_state(n: int = 3) -> StateVector:
    return make_state(n, [(1 << k, 1.0) for k in range(n)])


def product_state(bits: str) -> StateVector:
    config = int(bits, 2)
    return make_state(len(bits), [(config, 1.0)])


def solve_model(params: ModelParams, seed: int = 0, sector: int | None = None):
    basis = sector_basis(params.n_total, params.ground_sector() if sector is None else sector)
    op = build_model(params, basis)
    return op, ground_state(op, seed=seed)


@pytest.fixture(scope="session")
def ikm_n10_state():
    """Shared mid-size 2IKM ground state for entanglement route tests."""
    params = ModelParams(kind="2ikm", j_prime=0.4, control=0.4, n_left=5, n_right=5)
    op, gs = solve_model(params, seed=7)
    return params, gs
