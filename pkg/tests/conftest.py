import math

import pytest

import lbvt
from lbvt import chain
from lbvt.model import MechanismConfig

THETA_88 = math.radians(-88.0)


def _with_bearing(target_bearing_deg: float, **kw) -> MechanismConfig:
    """Build a config, choosing beta so the closed tip bearing hits the target."""
    probe = MechanismConfig(beta=0.0, **kw)
    bearing0 = chain.tip_bearing(probe, (0.0,) * probe.n_joints)
    return MechanismConfig(beta=math.radians(target_bearing_deg) - bearing0, **kw)


_FOURBAR = dict(
    l1=0.25,
    l2=0.101,
    l3=0.265,
    actuator_base=(0.05, -0.05),
    actuator_attach_ratio=0.75,
    l_offset=0.045,
    k_spring=1.17,
    springs_per_joint=4,
    spring_arm_length=0.02,
    theta_min=math.radians(-141.0),
    theta_max=math.radians(-39.5),
    branch_sign=1,
)


def reduced_chain(n: int, alpha_preload: float = 0.10) -> MechanismConfig:
    """Reduced 1-, 2- or 3-joint chain on the shipped four-bar, oracle-friendly."""
    shapes = {
        1: ((0.05,), (-20.0,), (0.05,)),
        2: ((0.03, 0.03), (-5.0, -30.0), (0.05, 0.04)),
        3: ((0.022, 0.022, 0.022), (0.0, -25.0, -25.0), (0.04, 0.03, 0.02)),
    }
    segments, phi_deg, limits = shapes[n]
    return _with_bearing(
        -5.0,
        segments=segments,
        phi=tuple(math.radians(p) for p in phi_deg),
        joint_open_limit=limits,
        alpha_preload=alpha_preload,
        **_FOURBAR,
    )


def convex_chain() -> MechanismConfig:
    """Gently curved six-joint chain whose pivots recede monotonically from the tip."""
    return _with_bearing(
        -5.0,
        segments=(0.016,) * 6,
        phi=tuple(math.radians(p) for p in (6.0, -7.0, -7.0, -7.0, -7.0, -7.0)),
        joint_open_limit=(math.radians(6.0),) * 6,
        alpha_preload=0.10,
        **_FOURBAR,
    )


def straight_chain(l_offset: float = 0.1, seg: float = 0.05, beta: float = 0.0,
                   n: int = 6) -> MechanismConfig:
    """Fully collinear chain: anchor plus n segments all along the beta ray."""
    return MechanismConfig(
        beta=beta,
        segments=(seg,) * n,
        phi=(0.0,) * n,
        joint_open_limit=(math.radians(10.0),) * n,
        alpha_preload=0.05,
        **{**_FOURBAR, "l_offset": l_offset},
    )


@pytest.fixture(scope="session")
def default_config() -> MechanismConfig:
    return lbvt.load_default_config()


@pytest.fixture(scope="session")
def base_config() -> MechanismConfig:
    return lbvt.load_config(lbvt.base_config_path())
