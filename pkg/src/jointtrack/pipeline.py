"""Per-frame tracking pipeline: ingest, predict, associate, update.

A TrackingSession owns the track table and processes frames strictly in
timestamp order. Each frame:

1. predicts every live track forward by the frame interval,
2. computes expected boxes and matches tracks to detections globally,
3. updates matched tracks with their detection's visible joints,
4. ages unmatched tracks (tentative ones die quickly, confirmed ones go
   Lost after a miss budget),
5. spawns tentative tracks from unmatched detections,
6. re-initializes a Lost target from the stream's re-identification hint
   using the fitted prior (any single visible joint suffices),
7. reports the target location in the robot frame.

The target track is created from the first usable frame: a full-body
detection is fitted into a prior model, or, when a prior is preloaded in
the config, any detection with one usable joint bootstraps the track.
A frame's result counts as recognized ("Tracking") while the target track
is alive, including short coasting stretches without a matched detection.

Sessions are single-writer state machines: process_frame calls must be
serialized per session, while distinct sessions are independent. Returned
FrameResult values are immutable snapshots.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .association import BoundingBox, expected_box, match_gnn
from .config import RunConfig
from .errors import (
    BehindCameraError,
    NonMonotonicTimestampError,
    NonPositiveDepthError,
    NoUsableJointError,
    SigmaPointFailureError,
    UninitializedSessionError,
)
from .geometry import (
    JOINT_ORDER,
    CameraModel,
    GroundPlane,
    JointKind,
    RobotExtrinsics,
    camera_to_robot,
    joint_position,
    project,
)
from .prior import FullBodyObservation, PriorModel, construct_prior, init_from_best_joint
from .ukf import TrackState, measurement_from_joints, predict, update


class TrackStatus(Enum):
    TENTATIVE = "Tentative"
    CONFIRMED = "Confirmed"
    LOST = "Lost"


class SessionStatus(Enum):
    TRACKING = "Tracking"
    LOST = "Lost"
    UNINITIALIZED = "Uninitialized"


@dataclass(frozen=True)
class JointDetection:
    """One merged joint observation: pixel plus detector confidence."""

    pixel: np.ndarray
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must be in [0, 1]")
        object.__setattr__(self, "pixel", np.asarray(self.pixel, dtype=float).reshape(2))


@dataclass(frozen=True)
class Detection:
    """Bounding box plus merged joints; joints may be empty (box only)."""

    box: BoundingBox
    joints: Mapping[JointKind, JointDetection] = field(default_factory=dict)

    def joint_pixels(self) -> Dict[JointKind, np.ndarray]:
        return {kind: obs.pixel for kind, obs in self.joints.items()}


@dataclass(frozen=True)
class Frame:
    """One input frame: timestamp, detections, optional target hint."""

    timestamp: float
    detections: Sequence[Detection] = ()
    reid_target_hint: Optional[int] = None


@dataclass(frozen=True)
class TrackRecord:
    """Immutable snapshot of one track."""

    id: int
    state: TrackState
    status: TrackStatus
    is_target: bool
    misses: int


@dataclass(frozen=True)
class FrameResult:
    """Outcome of one processed frame.

    target_location is present exactly when status is Tracking; the
    detection-index bookkeeping fields partition the frame's detections
    into matched / spawned / unmatched.
    """

    timestamp: float
    status: SessionStatus
    target_location: Optional[np.ndarray]
    target_box: Optional[BoundingBox]
    tracks: Tuple[TrackRecord, ...]
    matches: Tuple[Tuple[int, int], ...]
    spawned: Tuple[Tuple[int, int], ...]
    unmatched_detections: Tuple[int, ...]


# Raw 17-keypoint skeleton names that feed each merged joint.
_SHOULDER_NAMES = ("left_shoulder", "right_shoulder")
_PAIR_NAMES = {
    JointKind.HIP: ("left_hip", "right_hip"),
    JointKind.KNEE: ("left_knee", "right_knee"),
    JointKind.ANKLE: ("left_ankle", "right_ankle"),
}


def merge_joint_pairs(
    raw_joints: Mapping[str, Tuple[Sequence[float], float]],
    box: BoundingBox,
    min_confidence: float,
) -> Dict[JointKind, JointDetection]:
    """Collapse raw keypoints into the four tracked joints.

    Left/right hip, knee and ankle pairs become one point each: the
    horizontal coordinate is the box center, the vertical one the mean of
    the pair (or the single visible joint's). The neck is taken directly
    when present, otherwise from the shoulder midpoint. Keypoints below
    min_confidence are dropped first; pre-merged 4-joint streams pass
    through unchanged.
    """
    usable = {
        name: (np.asarray(pixel, dtype=float).reshape(2), float(conf))
        for name, (pixel, conf) in raw_joints.items()
        if float(conf) >= min_confidence
    }
    merged: Dict[JointKind, JointDetection] = {}

    if "neck" in usable:
        pixel, conf = usable["neck"]
        merged[JointKind.NECK] = JointDetection(pixel=pixel, confidence=conf)
    else:
        shoulders = [usable[n] for n in _SHOULDER_NAMES if n in usable]
        if len(shoulders) == 2:
            pixel = 0.5 * (shoulders[0][0] + shoulders[1][0])
            conf = 0.5 * (shoulders[0][1] + shoulders[1][1])
            merged[JointKind.NECK] = JointDetection(pixel=pixel, confidence=conf)
        elif len(shoulders) == 1:
            merged[JointKind.NECK] = JointDetection(
                pixel=shoulders[0][0], confidence=shoulders[0][1]
            )

    for kind, pair_names in _PAIR_NAMES.items():
        if kind.label in usable:
            pixel, conf = usable[kind.label]
            merged[kind] = JointDetection(pixel=pixel, confidence=conf)
            continue
        members = [usable[n] for n in pair_names if n in usable]
        if not members:
            continue
        v = float(np.mean([m[0][1] for m in members]))
        conf = float(np.mean([m[1] for m in members]))
        merged[kind] = JointDetection(pixel=np.array([box.u, v]), confidence=conf)
    return merged


@dataclass
class _Track:
    id: int
    state: TrackState
    status: TrackStatus
    is_target: bool
    prior: PriorModel
    misses: int = 0
    consecutive_hits: int = 0

    def snapshot(self) -> TrackRecord:
        return TrackRecord(
            id=self.id,
            state=self.state,
            status=self.status,
            is_target=self.is_target,
            misses=self.misses,
        )


class TrackingSession:
    """Single-target tracking over a detection stream.

    Args:
        camera, ground: calibrated camera and its ground plane.
        config: run tunables; config.prior preloads a fitted prior model
            so the first frame need not show the full body.
        extrinsics: camera mounting in the robot frame (defaults to a
            camera at the robot origin with the ground plane's tilt).
    """

    def __init__(
        self,
        camera: CameraModel,
        ground: GroundPlane,
        config: RunConfig,
        extrinsics: Optional[RobotExtrinsics] = None,
    ):
        if camera is None or ground is None or config is None:
            raise UninitializedSessionError("camera, ground and config are required")
        self.camera = camera
        self.ground = ground
        self.config = config
        self.extrinsics = extrinsics or RobotExtrinsics(tilt=_tilt_of(ground))
        self._tracks: List[_Track] = []
        self._next_id = 1
        self._last_t: Optional[float] = None
        self._target_prior: Optional[PriorModel] = config.prior

    # -- helpers -----------------------------------------------------------

    @property
    def target(self) -> Optional[_Track]:
        for track in self._tracks:
            if track.is_target:
                return track
        return None

    def _initial_state(self, ankle_camera: np.ndarray) -> TrackState:
        gx, gy = self.ground.to_ground(ankle_camera)
        p0 = np.diag(
            [
                self.config.initial_position_sigma**2,
                self.config.initial_position_sigma**2,
                self.config.initial_velocity_sigma**2,
                self.config.initial_velocity_sigma**2,
            ]
        )
        return TrackState(s=np.array([gx, gy, 0.0, 0.0]), P=p0)

    def _new_track(self, ankle_camera: np.ndarray, is_target: bool, prior: PriorModel) -> _Track:
        track = _Track(
            id=self._next_id,
            state=self._initial_state(ankle_camera),
            status=TrackStatus.CONFIRMED if is_target else TrackStatus.TENTATIVE,
            is_target=is_target,
            prior=prior,
            consecutive_hits=1,
        )
        self._next_id += 1
        self._tracks.append(track)
        return track

    def _usable_joints(self, detection: Detection) -> Dict[JointKind, np.ndarray]:
        allowed = set(self.config.use_joints)
        return {
            kind: obs.pixel
            for kind, obs in detection.joints.items()
            if kind in allowed and obs.confidence >= self.config.min_confidence
        }

    def _robot_location(self, track: _Track) -> np.ndarray:
        ankle = self.ground.to_camera(track.state.s[0], track.state.s[1])
        return camera_to_robot(ankle, self.extrinsics)

    def _coast_box(self, track: _Track) -> Optional[BoundingBox]:
        """Synthesize the target box from the state when nothing matched."""
        try:
            u_bar, w_bar = expected_box(track.state.s, self.camera, self.ground, track.prior)
            ankle = self.ground.to_camera(track.state.s[0], track.state.s[1])
            vs = []
            for kind in JOINT_ORDER:
                joint = joint_position(ankle, self.ground, track.prior.height_of(kind))
                vs.append(project(self.camera, joint)[1])
        except (BehindCameraError, NonPositiveDepthError):
            return None
        v_lo, v_hi = min(vs), max(vs)
        return BoundingBox(
            u=u_bar, v=0.5 * (v_lo + v_hi), w=w_bar, h=max(v_hi - v_lo, 1.0)
        )

    # -- frame processing --------------------------------------------------

    def process_frame(self, frame: Frame) -> FrameResult:
        """Advance the session by one frame; see the module docstring."""
        if self._last_t is not None and frame.timestamp <= self._last_t:
            raise NonMonotonicTimestampError(
                f"timestamp {frame.timestamp} does not advance past {self._last_t}"
            )
        dt = None if self._last_t is None else frame.timestamp - self._last_t
        self._last_t = frame.timestamp

        if self.target is None:
            return self._initialize_target(frame)
        return self._track_frame(frame, dt)

    def _initialize_target(self, frame: Frame) -> FrameResult:
        detections = list(frame.detections)
        candidate = self._pick_target_candidate(frame, detections)
        if candidate is None:
            return FrameResult(
                timestamp=frame.timestamp,
                status=SessionStatus.UNINITIALIZED,
                target_location=None,
                target_box=None,
                tracks=(),
                matches=(),
                spawned=(),
                unmatched_detections=tuple(range(len(detections))),
            )

        idx = candidate
        detection = detections[idx]
        if self._target_prior is None:
            obs = FullBodyObservation(joints=detection.joint_pixels())
            ankle, fitted, _ = construct_prior(self.camera, self.ground, obs)
            self._target_prior = fitted
        else:
            ankle, _ = init_from_best_joint(
                self.camera, self.ground, self._target_prior, self._usable_joints(detection)
            )
        target = self._new_track(ankle, is_target=True, prior=self._target_prior)

        spawned = [(target.id, idx)]
        unmatched = []
        for j, det in enumerate(detections):
            if j == idx:
                continue
            track = self._spawn_from_detection(det)
            if track is None:
                unmatched.append(j)
            else:
                spawned.append((track.id, j))

        return FrameResult(
            timestamp=frame.timestamp,
            status=SessionStatus.TRACKING,
            target_location=self._robot_location(target),
            target_box=detection.box,
            tracks=tuple(t.snapshot() for t in self._tracks),
            matches=(),
            spawned=tuple(spawned),
            unmatched_detections=tuple(unmatched),
        )

    def _pick_target_candidate(
        self, frame: Frame, detections: List[Detection]
    ) -> Optional[int]:
        hint = frame.reid_target_hint
        if hint is not None and 0 <= hint < len(detections):
            if self._candidate_usable(detections[hint]):
                return hint
            return None
        for idx, det in enumerate(detections):
            if self._candidate_usable(det):
                return idx
        return None

    def _candidate_usable(self, detection: Detection) -> bool:
        if self._target_prior is None:
            return all(kind in detection.joints for kind in JOINT_ORDER)
        return bool(self._usable_joints(detection))

    def _spawn_from_detection(self, detection: Detection) -> Optional[_Track]:
        joints = self._usable_joints(detection)
        if not joints:
            return None
        default_prior = PriorModel()
        try:
            ankle, _ = init_from_best_joint(self.camera, self.ground, default_prior, joints)
        except NoUsableJointError:
            return None
        return self._new_track(ankle, is_target=False, prior=default_prior)

    def _track_frame(self, frame: Frame, dt: Optional[float]) -> FrameResult:
        detections = list(frame.detections)
        target = self.target

        active = [t for t in self._tracks if t.status is not TrackStatus.LOST]
        if dt is not None and dt > 0:
            for track in active:
                track.state = predict(track.state, dt, self.config.ukf)

        expected: List[Tuple[int, Tuple[float, float]]] = []
        missing_expectation: List[int] = []
        for track in active:
            try:
                expected.append(
                    (track.id, expected_box(track.state.s, self.camera, self.ground, track.prior))
                )
            except BehindCameraError:
                missing_expectation.append(track.id)

        reserved = None
        if (
            target.status is TrackStatus.LOST
            and frame.reid_target_hint is not None
            and 0 <= frame.reid_target_hint < len(detections)
        ):
            reserved = frame.reid_target_hint

        assoc = match_gnn(
            expected,
            [d.box for d in detections],
            gate=self.config.gate_px,
            forbidden_detections=None if reserved is None else [reserved],
        )

        by_id = {t.id: t for t in self._tracks}
        matches: List[Tuple[int, int]] = []
        matched_target_box: Optional[BoundingBox] = None
        missed_ids = set(assoc.unmatched_tracks) | set(missing_expectation)

        for tid, j, _dist in assoc.matches:
            track = by_id[tid]
            detection = detections[j]
            joints = self._usable_joints(detection)
            updated = False
            if joints:
                z, kinds = measurement_from_joints(joints)
                try:
                    track.state = update(
                        track.state, z, kinds, self.camera, self.ground,
                        track.prior, self.config.ukf,
                    )
                    updated = True
                except (BehindCameraError, SigmaPointFailureError):
                    updated = False
            matches.append((tid, j))
            if track.is_target:
                matched_target_box = detection.box
            if updated:
                track.misses = 0
                track.consecutive_hits += 1
                if (
                    track.status is TrackStatus.TENTATIVE
                    and track.consecutive_hits >= self.config.confirm_hits
                ):
                    track.status = TrackStatus.CONFIRMED
            else:
                # A match without a usable measurement cannot refresh the
                # track; treat it as a miss so stale tracks still expire.
                missed_ids.add(tid)

        dead: List[_Track] = []
        for tid in missed_ids:
            track = by_id[tid]
            track.misses += 1
            track.consecutive_hits = 0
            if track.status is TrackStatus.TENTATIVE:
                if track.misses >= self.config.tentative_max_misses:
                    track.status = TrackStatus.LOST
                    dead.append(track)
            elif track.status is TrackStatus.CONFIRMED:
                if track.misses > self.config.max_misses:
                    track.status = TrackStatus.LOST
                    if not track.is_target:
                        dead.append(track)

        spawned: List[Tuple[int, int]] = []
        unmatched: List[int] = []
        for j in assoc.unmatched_detections:
            track = self._spawn_from_detection(detections[j])
            if track is None:
                unmatched.append(j)
            else:
                spawned.append((track.id, j))

        if reserved is not None:
            joints = self._usable_joints(detections[reserved])
            reinitialized = False
            if joints:
                try:
                    ankle, _ = init_from_best_joint(
                        self.camera, self.ground, target.prior, joints
                    )
                    target.state = self._initial_state(ankle)
                    target.status = TrackStatus.CONFIRMED
                    target.misses = 0
                    target.consecutive_hits = 1
                    matches.append((target.id, reserved))
                    matched_target_box = detections[reserved].box
                    reinitialized = True
                except NoUsableJointError:
                    pass
            if not reinitialized:
                unmatched.append(reserved)

        tracking = target.status is not TrackStatus.LOST
        target_box = None
        if tracking:
            target_box = matched_target_box or self._coast_box(target)

        result = FrameResult(
            timestamp=frame.timestamp,
            status=SessionStatus.TRACKING if tracking else SessionStatus.LOST,
            target_location=self._robot_location(target) if tracking else None,
            target_box=target_box,
            tracks=tuple(t.snapshot() for t in self._tracks),
            matches=tuple(matches),
            spawned=tuple(spawned),
            unmatched_detections=tuple(sorted(unmatched)),
        )
        for track in dead:
            self._tracks.remove(track)
        return result


def _tilt_of(ground: GroundPlane) -> float:
    """Recover the pitch angle implied by a tilt-constructed ground normal."""
    n = ground.normal
    return float(np.arctan2(-n[2], -n[1]))
