import numpy as np
import pytest

import smx
from smx.spectrum import ScanConfig, solve_spectrum

# Lennard-Jones reference values (double-precision column, depth
# eps = 1e4 hbar^2 / 2^{4/3} m sigma^2, l = 0, h1 = 0.22, h2 = 200):
# energies over eps, radial mean over sigma, radial std dev over sigma.
LJ_ENERGIES = np.array([
    -0.941046032004322, -0.830002082985871, -0.727645697519941,
    -0.633692951881524, -0.547852043328306, -0.469822910169227,
    -0.399296840303147, -0.335956071146719, -0.279473385016170,
    -0.229511705458584, -0.185723701795511, -0.147751411297187,
    -0.115225890997835, -0.087766914228358, -0.064982730496227,
    -0.046469911357580, -0.031813309315001, -0.020586161355897,
    -0.012350373215634,
])
LJ_R_MEAN = np.array([
    1.13250763, 1.15362644, 1.17638781, 1.20099976, 1.22770757,
    1.25680268, 1.2886344, 1.32362541, 1.36229270, 1.40527636,
    1.45337996, 1.50762849, 1.56935372, 1.64032393, 1.72294802,
    1.82061078, 1.93825223, 2.08343401, 2.26846612,
])
LJ_R_STD = np.array([
    0.03332738, 0.05845972, 0.07714456, 0.09349374, 0.10872536,
    0.12341928, 0.13792451, 0.15248893, 0.16731436, 0.18258579,
    0.19849100, 0.21523776, 0.23307297, 0.25230831, 0.27335898,
    0.29680714, 0.32351356, 0.35482959, 0.39303815,
])


@pytest.fixture(scope="session")
def ho_model():
    return smx.make_builtin("harmonic")


@pytest.fixture(scope="session")
def ho_config():
    # reference oscillator configuration: uniform slices, low orders
    return ScanConfig(e_min=0.05, e_max=9.95, n_grid=200,
                      order_m=2, lambda_order=10, delta=0.1, v0=0.0)


@pytest.fixture(scope="session")
def ho_roots(ho_model, ho_config):
    return solve_spectrum(ho_model, ho_config)


@pytest.fixture(scope="session")
def ho_config_hi():
    # two extra series orders push slice truncation to the 1e-15 floor;
    # used where reconstruction quality itself is under test
    return ScanConfig(e_min=0.05, e_max=9.95, n_grid=200,
                      order_m=2, lambda_order=12, delta=0.1, v0=0.0)


@pytest.fixture(scope="session")
def ho_roots_hi(ho_model, ho_config_hi):
    return solve_spectrum(ho_model, ho_config_hi)


@pytest.fixture(scope="session")
def lj_model():
    return smx.make_builtin("lennard_jones")


@pytest.fixture(scope="session")
def lj_config(lj_model):
    eps = lj_model.unit_scale
    return ScanConfig(e_min=-0.95 * eps, e_max=-0.01 * eps, n_grid=720,
                      order_m=50, lambda_order=52, ratio=500.0)


@pytest.fixture(scope="session")
def lj_solution(lj_model, lj_config):
    import time

    t0 = time.perf_counter()
    roots = solve_spectrum(lj_model, lj_config)
    return roots, time.perf_counter() - t0


@pytest.fixture(scope="session")
def lj_roots(lj_solution):
    return lj_solution[0]


@pytest.fixture(scope="session")
def lj_wavefunctions(lj_model, lj_config, lj_roots):
    from smx.wavefunction import build_wavefunction

    return [build_wavefunction(lj_model, lj_config, r) for r in lj_roots]


@pytest.fixture(scope="session")
def hyd_model():
    return smx.make_builtin("hydrogen_effective", l=1, h1=9.7844e-11, h2=20200.0)


@pytest.fixture(scope="session")
def hyd_config():
    return ScanConfig(e_min=-0.13, e_max=-0.0045, n_grid=600,
                      order_m=50, lambda_order=52, ratio=100.0, x0=2.0, v0=-0.6)


@pytest.fixture(scope="session")
def hyd_solution(hyd_model, hyd_config):
    import time

    t0 = time.perf_counter()
    roots = solve_spectrum(hyd_model, hyd_config)
    return roots, time.perf_counter() - t0


@pytest.fixture(scope="session")
def hyd_roots(hyd_solution):
    return hyd_solution[0]
