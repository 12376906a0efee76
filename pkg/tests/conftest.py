import numpy as np
import pytest

from ermakovqubit.families import (
    CircularFamily,
    DecayingFamily,
    FamilyParams,
    OscillatingFamily,
)

SQRT5 = np.sqrt(5.0)
SQRT160 = np.sqrt(160.0)


def circular(g=SQRT5, delta=4.0, Delta=0.0):
    return CircularFamily(FamilyParams(g, delta, Delta))


def decaying(g=0.5, delta=1.0, Delta=0.0):
    return DecayingFamily(FamilyParams(g, delta, Delta))


def oscillating(g=SQRT5, delta=4.0, kappa=0.6, Delta=0.0):
    return OscillatingFamily(FamilyParams.from_kappa(g, delta, kappa, Delta))


ACCEPTANCE_FAMILIES = {
    "circular-g5-d4": lambda: circular(),
    "decaying-d0.01": lambda: decaying(delta=0.01),
    "decaying-d1": lambda: decaying(delta=1.0),
    "decaying-d2": lambda: decaying(delta=2.0),
    "oscillating-g5-k0.6": lambda: oscillating(kappa=0.6),
    "oscillating-g5-k3.1": lambda: oscillating(kappa=3.1),
    "oscillating-g160-k0.8": lambda: oscillating(SQRT160, 6.0, 0.8),
    "oscillating-g160-k2.5": lambda: oscillating(SQRT160, 6.0, 2.5),
}


@pytest.fixture(params=sorted(ACCEPTANCE_FAMILIES))
def family(request):
    return ACCEPTANCE_FAMILIES[request.param]()


def period_grid(fam, periods=5.0, n=1000):
    return np.linspace(0.0, periods * fam.characteristic_period, n)
