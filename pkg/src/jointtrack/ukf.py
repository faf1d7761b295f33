"""Unscented Kalman filter over the ground-plane state [x, y, vx, vy].

Prediction uses a constant-velocity model. Because it is linear, the
closed-form Kalman propagation is exact and is used directly (sigma points
would reproduce it to round-off). The measurement model is nonlinear: the
predicted ground position is lifted to the camera frame, each visible
joint placed at its prior height and projected to pixels, so the update
runs the standard unscented transform.

The measurement vector stacks joint pixels in the fixed order neck, hip,
knee, ankle filtered to the visible subset; the measurement noise is block
diagonal with an isotropic per-joint pixel variance. Upper-body joints get
smaller default sigmas than lower-body ones, encoding their higher
detection stability.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .errors import (
    BehindCameraError,
    NonPositiveDtError,
    ObservationDimensionError,
    SigmaPointFailureError,
)
from .geometry import JOINT_ORDER, CameraModel, GroundPlane, JointKind
from .prior import PriorModel

STATE_DIM = 4
GROUND_DIM = 2

DEFAULT_JOINT_PIXEL_SIGMA = {
    JointKind.NECK: 4.0,
    JointKind.HIP: 6.0,
    JointKind.KNEE: 8.0,
    JointKind.ANKLE: 10.0,
}

COVARIANCE_SYMMETRY_TOL = 1e-9
CHOLESKY_JITTER = 1e-9


@dataclass(frozen=True, eq=False)
class TrackState:
    """Gaussian ground-plane state: mean [x, y, vx, vy] and covariance."""

    s: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float).reshape(STATE_DIM).copy()
        P = np.asarray(self.P, dtype=float).reshape(STATE_DIM, STATE_DIM).copy()
        if np.max(np.abs(P - P.T)) > COVARIANCE_SYMMETRY_TOL:
            raise ValueError("covariance must be symmetric")
        s.flags.writeable = False
        P.flags.writeable = False
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "P", P)

    @property
    def position(self) -> np.ndarray:
        return self.s[:GROUND_DIM]

    @property
    def velocity(self) -> np.ndarray:
        return self.s[GROUND_DIM:]


@dataclass(frozen=True)
class UkfParams:
    """Sigma-point spread and noise configuration.

    alpha in (0, 1] and kappa control the sigma-point radius; beta folds in
    distribution knowledge (2 is optimal for Gaussians). process_accel_sigma
    is the white-noise acceleration density in m/s^2; joint_pixel_sigma maps
    each joint to its measurement noise in pixels.
    """

    alpha: float = 0.5
    beta: float = 2.0
    kappa: float = 0.0
    process_accel_sigma: float = 2.0
    joint_pixel_sigma: Mapping[JointKind, float] = field(
        default_factory=lambda: dict(DEFAULT_JOINT_PIXEL_SIGMA)
    )

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        if 2 * GROUND_DIM + self.kappa <= 0:
            raise ValueError(f"kappa must exceed -{2 * GROUND_DIM}")
        if self.process_accel_sigma <= 0:
            raise ValueError("process_accel_sigma must be positive")
        sigmas = {JointKind(k): float(v) for k, v in self.joint_pixel_sigma.items()}
        for kind in JOINT_ORDER:
            if sigmas.get(kind, 0.0) <= 0:
                raise ValueError(f"pixel sigma for {kind.label} must be positive")
        object.__setattr__(self, "joint_pixel_sigma", sigmas)

    @property
    def lam(self) -> float:
        return self.alpha**2 * (STATE_DIM + self.kappa) - STATE_DIM


def transition_matrix(dt: float) -> np.ndarray:
    f = np.eye(STATE_DIM)
    f[0, 2] = dt
    f[1, 3] = dt
    return f


def process_noise(dt: float, accel_sigma: float) -> np.ndarray:
    """Discrete white-noise-acceleration covariance for both ground axes."""
    q11 = dt**4 / 4.0
    q12 = dt**3 / 2.0
    q22 = dt**2
    q = np.zeros((STATE_DIM, STATE_DIM))
    for axis in range(GROUND_DIM):
        q[axis, axis] = q11
        q[axis, axis + 2] = q12
        q[axis + 2, axis] = q12
        q[axis + 2, axis + 2] = q22
    return accel_sigma**2 * q


def predict(state: TrackState, dt: float, params: UkfParams) -> TrackState:
    """Constant-velocity prediction: s <- s + dt * [vx, vy, 0, 0].

    The covariance propagates as F P F^T + Q(dt).
    """
    if dt <= 0:
        raise NonPositiveDtError(f"dt must be positive, got {dt}")
    f = transition_matrix(dt)
    s = f @ state.s
    p = f @ state.P @ f.T + process_noise(dt, params.process_accel_sigma)
    return TrackState(s=s, P=0.5 * (p + p.T))


def visible_in_order(visible: Iterable[JointKind]) -> List[JointKind]:
    """Canonical measurement ordering: neck, hip, knee, ankle."""
    present = set(visible)
    return [k for k in JOINT_ORDER if k in present]


def observe(
    state_mean: np.ndarray,
    camera: CameraModel,
    ground: GroundPlane,
    prior: PriorModel,
    visible: Sequence[JointKind],
) -> np.ndarray:
    """Predicted pixel measurement for the visible joints.

    The ground position (x, y) is lifted to the camera-frame ankle point;
    each visible joint is offset up the normal by its prior height and
    projected. Joints are stacked in canonical order.

    Raises:
        BehindCameraError: the predicted person is behind the camera.
    """
    kinds = visible_in_order(visible)
    if not kinds:
        raise ValueError("at least one visible joint is required")
    s = np.asarray(state_mean, dtype=float).ravel()
    ankle = ground.to_camera(s[0], s[1])
    if ankle[2] <= 0:
        raise BehindCameraError("predicted position is behind the camera")
    heights = np.array([prior.height_of(k) for k in kinds])
    joints = ankle[None, :] + heights[:, None] * ground.normal[None, :]
    z = joints[:, 2]
    if np.any(z <= 1e-9):
        raise BehindCameraError("a predicted joint is behind the camera")
    out = np.empty((len(kinds), 2))
    out[:, 0] = camera.fx * joints[:, 0] / z + camera.cx
    out[:, 1] = camera.fy * joints[:, 1] / z + camera.cy
    return out.ravel()


def measurement_from_joints(
    joints: Mapping[JointKind, np.ndarray],
) -> Tuple[np.ndarray, List[JointKind]]:
    """Stack observed joint pixels into a measurement vector.

    Returns (z, visible) with joints in canonical order, ready for update().
    """
    kinds = visible_in_order(joints.keys())
    if not kinds:
        return np.empty(0), []
    z = np.concatenate([np.asarray(joints[k], dtype=float).reshape(2) for k in kinds])
    return z, kinds


def _sigma_points(state: TrackState, params: UkfParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    lam = params.lam
    scaled = (STATE_DIM + lam) * state.P
    try:
        root = np.linalg.cholesky(scaled)
    except np.linalg.LinAlgError:
        try:
            root = np.linalg.cholesky(scaled + CHOLESKY_JITTER * np.eye(STATE_DIM))
        except np.linalg.LinAlgError as exc:
            raise SigmaPointFailureError("covariance square root failed") from exc
    points = np.empty((2 * STATE_DIM + 1, STATE_DIM))
    points[0] = state.s
    for i in range(STATE_DIM):
        points[1 + i] = state.s + root[:, i]
        points[1 + STATE_DIM + i] = state.s - root[:, i]
    wm = np.full(2 * STATE_DIM + 1, 1.0 / (2.0 * (STATE_DIM + lam)))
    wc = wm.copy()
    wm[0] = lam / (STATE_DIM + lam)
    wc[0] = wm[0] + (1.0 - params.alpha**2 + params.beta)
    return points, wm, wc


def measurement_noise(visible: Sequence[JointKind], params: UkfParams) -> np.ndarray:
    """Block-diagonal R with isotropic per-joint pixel variance."""
    kinds = visible_in_order(visible)
    variances = np.repeat([params.joint_pixel_sigma[k] ** 2 for k in kinds], 2)
    return np.diag(variances)


def update(
    state: TrackState,
    z: np.ndarray,
    visible: Sequence[JointKind],
    camera: CameraModel,
    ground: GroundPlane,
    prior: PriorModel,
    params: UkfParams,
) -> TrackState:
    """Unscented measurement update with the visible-joint pixel vector.

    Sigma points drawn from (s, P) are pushed through observe(); the
    posterior follows the standard unscented update with the re-symmetrized
    covariance.

    Raises:
        ObservationDimensionError: len(z) != 2 * len(visible).
        SigmaPointFailureError: covariance square root failed after jitter.
        BehindCameraError: a sigma point left the camera's front halfspace.
    """
    kinds = visible_in_order(visible)
    z = np.asarray(z, dtype=float).ravel()
    if z.size != 2 * len(kinds) or not kinds:
        raise ObservationDimensionError(
            f"got {z.size} measurement values for {len(kinds)} visible joints"
        )
    points, wm, wc = _sigma_points(state, params)
    z_sigma = np.stack([observe(p, camera, ground, prior, kinds) for p in points])
    z_spread_mean = wm @ z_sigma

    dz = z_sigma - z_spread_mean
    ds = points - state.s
    innovation_cov = (wc[:, None] * dz).T @ dz + measurement_noise(kinds, params)
    cross_cov = (wc[:, None] * ds).T @ dz

    # The innovation is centered on the mean's own projection (sigma point
    # 0), so a measurement generated exactly at the mean leaves it fixed;
    # the unscented spread still shapes the gain and covariances.
    gain = np.linalg.solve(innovation_cov.T, cross_cov.T).T
    s_new = state.s + gain @ (z - z_sigma[0])
    p_new = state.P - gain @ innovation_cov @ gain.T
    return TrackState(s=s_new, P=0.5 * (p_new + p_new.T))
