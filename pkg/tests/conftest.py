import pytest

from spreadgreeks import MarketParams, RunSpec, SeedSpec, SvParams

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def margrabe_params():
    return MarketParams(x1=100.0, x2=110.0, sigma1=0.2, sigma2=0.3, rho=0.5, r=0.05, strike=0.0, maturity=1.0)


@pytest.fixture(scope="session")
def atm_params(margrabe_params):
    return margrabe_params.replace(strike=10.0)


@pytest.fixture(scope="session")
def sv_params(atm_params):
    return SvParams(base=atm_params, kappa=1.0, nu=0.5, v0=1.0, n_steps=252)


@pytest.fixture(scope="session")
def gbm_margrabe_run(margrabe_params):
    spec = RunSpec(margrabe_params, n_paths=1_000_000, seed=SeedSpec(20240101))
    return spec, spec.simulate()


@pytest.fixture(scope="session")
def gbm_atm_run(atm_params):
    spec = RunSpec(atm_params, n_paths=1_000_000, seed=SeedSpec(20240102))
    return spec, spec.simulate()


@pytest.fixture(scope="session")
def sv_atm_run(sv_params):
    spec = RunSpec(sv_params, n_paths=1_000_000, seed=SeedSpec(20240103))
    return spec, spec.simulate()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
