from pathlib import Path

import pytest

from jetfactor.kernels import available_backends
from jetfactor.ode_model import make_ode, read_ode_file, split_equation
from jetfactor.symcore import parse_expr

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture
def corpus():
    return CORPUS


@pytest.fixture
def example2():
    return split_equation(parse_expr("y^3*y3 + y^3*y2 - 2*t*y1 + y"), 3)


@pytest.fixture
def example2_scaled():
    return split_equation(parse_expr("y3 + y2 - 2*t*y^(-3)*y1 + y^(-2)"), 3)


@pytest.fixture
def linear_instance():
    return make_ode(2, [parse_expr("t*y - t"), parse_expr("t^2"), parse_expr("t")])


@pytest.fixture
def sine():
    return read_ode_file(CORPUS / "sine.ode")[0]


@pytest.fixture(params=sorted(available_backends()))
def backend(request):
    return available_backends()[request.param]
