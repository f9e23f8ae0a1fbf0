import sys
import time
from decimal import Decimal
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import numpy as np  # noqa: E402

import oracles  # noqa: E402
from mlphillips import dataio, fitting  # noqa: E402

ORACLE_SEED = 20240601

# Averaged data as printed (3 decimals): level_low -> (mean unemployment, mean inflation)
AVERAGES_PRINTED = {
    "france": {
        6: (6.349, 13.060),
        7: (7.623, 8.245),
        8: (8.576, 4.616),
        9: (9.483, 2.624),
        10: (10.312, 2.984),
        11: (11.357, 1.597),
    },
    "germany": {
        3: (3.359, 5.447),
        4: (4.831, 6.324),
        5: (5.727, 2.978),
        6: (6.564, 3.942),
        7: (7.691, 1.489),
        8: (8.405, 1.907),
        9: (9.636, 1.055),
        10: (10.355, 1.787),
        11: (11.210, 1.920),
    },
}


def decimal_gap(value: float, printed: float) -> Decimal:
    """|value - printed| in exact decimal arithmetic on the shortest reprs.

    Binary subtraction would report 5.7265 vs 5.727 as 5.000000000006e-4.
    """
    return abs(Decimal(repr(float(value))) - Decimal(repr(float(printed))))


HALF_UNIT = Decimal("0.0005")


@pytest.fixture(scope="session")
def datasets():
    return dataio.embedded_datasets()


@pytest.fixture(scope="session")
def fitted(datasets):
    """Fresh fits of every (country, model) cell plus the total wall time."""
    t0 = time.perf_counter()
    reports = {
        (c, k): fitting.fit_model(k, datasets[c]) for c in fitting.COUNTRIES for k in fitting.MODEL_ORDER
    }
    return reports, time.perf_counter() - t0


@pytest.fixture(scope="session")
def demos():
    out = {}
    for target in fitting.DEMO_TARGETS:
        report, x, y = fitting.synthetic_demo(target)
        out[target] = (report, x, y)
    return out


@pytest.fixture(scope="session")
def ml_oracle_cases():
    """100 uniform draws of (alpha, beta, z) in [0.3, 3]^2 x [-15, 15] with MPFR references."""
    rng = np.random.default_rng(ORACLE_SEED)
    pts = np.column_stack([rng.uniform(0.3, 3, 100), rng.uniform(0.3, 3, 100), rng.uniform(-15, 15, 100)])
    return [(float(a), float(b), float(z), oracles.ml_series(a, b, z)) for a, b, z in pts]
