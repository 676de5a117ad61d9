import sys
from pathlib import Path

import pytest
from hypothesis import settings

# factorization time varies a lot with the draw; deadlines only add flakiness
settings.register_profile("repo", deadline=None)
settings.load_profile("repo")

sys.path.insert(0, str(Path(__file__).parent))

from cmtorsion.classnum import shared_cache  # noqa: E402


@pytest.fixture(scope="session")
def hcache():
    return shared_cache(10**5)


@pytest.fixture(scope="session")
def strata_1000(hcache):
    """Certified intervals at z = 1000 for every class met among odd d <= 99."""
    from cmtorsion import density, odt
    reps = sorted({odt.class_representative(d, hcache) for d in range(1, 100, 2)})
    return {r: density.stratum_density(r, 1000, cache=hcache) for r in reps}
