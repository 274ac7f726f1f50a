import math
import pathlib
import random
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, str(pathlib.Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

from conelab import TraceCoord, dehn_twist, transform_trace, zero_twist_point
from conelab.curvesys import mapping_class_ball
from conelab.conemodel import ConeComplexSpec, ConePoint


def moderate_trace_coord(rng: random.Random) -> TraceCoord:
    """Random marked structure with systole bounded away from 0 and traces
    small enough that every oracle stays in comfortable float range."""
    t = zero_twist_point(rng.uniform(0.7, 2.4))
    t = dehn_twist(t, rng.randint(-3, 3))
    ball = mapping_class_ball(2)
    return transform_trace(ball[rng.randrange(len(ball))], t)


def random_cone_complex(rng: random.Random, dim=None, max_simplices=5) -> ConeComplexSpec:
    d = dim if dim is not None else rng.choice([1, 2, 3])
    nv = d + rng.randint(1, 3)
    verts = [f"v{i}" for i in range(nv)]
    simps = set()
    guard = 0
    want = rng.randint(2, max_simplices)
    while len(simps) < want and guard < 200:
        guard += 1
        simps.add(tuple(sorted(rng.sample(verts, d))))
    simps = sorted(simps)
    used = {v for s in simps for v in s}
    return ConeComplexSpec(tuple(v for v in verts if v in used), tuple(simps), d)


def random_cone_point(rng: random.Random, cc: ConeComplexSpec) -> ConePoint:
    sid = rng.randrange(len(cc.simplices))
    coords = tuple(
        round(rng.uniform(0.0, 1.0), 3) if rng.random() > 0.2 else 0.0
        for _ in range(cc.dimension)
    )
    return ConePoint(sid, coords)


@pytest.fixture
def rng():
    return random.Random(20240817)
