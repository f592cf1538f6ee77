import numpy as np
import pytest

from poropinn import net, pde


@pytest.fixture
def spec():
    return net.LayerSpec()


@pytest.fixture
def params(spec):
    return net.init_params(spec, 42)


@pytest.fixture
def sp():
    return pde.SolutionParams()


def zero_net(spec, out_bias=(0.0, 0.0, 0.0)):
    ws = [np.zeros(s) for s in spec.layer_shapes]
    bs = [np.zeros(s[0]) for s in spec.layer_shapes]
    bs[-1] = np.array(out_bias, dtype=float)
    return net.MlpParams(spec, ws, bs)


# acceptance criteria report one line each; echoed again in the terminal summary
ACCEPTANCE_LINES = []


def record(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
