"""Newline-delimited JSON stream formats.

Detection stream, one record per frame (field names are the wire contract):

    {"t": 0.033,
     "detections": [
        {"box": [u, v, w, h],
         "joints": {"neck": [u, v, conf], "left_ankle": [u, v, conf], ...}}
     ],
     "reid_hint": 0}                       # optional detection index

Joint names may be the pre-merged four (neck/hip/knee/ankle) or raw
17-keypoint skeleton names (left_shoulder, right_hip, ...); ingestion
merges pairs either way. Records may carry extra keys (the simulator adds
"person" for bookkeeping); readers ignore them.

Track log, one record per processed frame:

    {"t": 0.033, "status": "Tracking",
     "target_xy": [x, y],                  # robot frame, only when Tracking
     "target_box": [u, v, w, h],           # optional
     "tracks": [{"id": 1, "status": "Confirmed", "is_target": true,
                 "x": ..., "y": ..., "vx": ..., "vy": ..., "misses": 0}]}

Ground-truth stream (simulator output):

    {"t": 0.033, "target_index": 0,
     "persons": [{"xy": [x, y], "box": [u, v, w, h] | null}]}
"""

import json
from typing import Any, Dict, Iterable, List, Mapping

from .association import BoundingBox
from .pipeline import Detection, Frame, FrameResult, merge_joint_pairs


def detection_frame_from_record(record: Mapping[str, Any], min_confidence: float) -> Frame:
    """Build a Frame from one detection-stream record, merging joint pairs."""
    detections = []
    for det in record.get("detections", []):
        box = BoundingBox.from_list(det["box"])
        raw = {
            name: ((vals[0], vals[1]), vals[2])
            for name, vals in det.get("joints", {}).items()
        }
        joints = merge_joint_pairs(raw, box, min_confidence)
        detections.append(Detection(box=box, joints=joints))
    hint = record.get("reid_hint")
    return Frame(
        timestamp=float(record["t"]),
        detections=detections,
        reid_target_hint=None if hint is None else int(hint),
    )


def result_to_record(result: FrameResult) -> Dict[str, Any]:
    """Serialize a FrameResult to one track-log record."""
    record: Dict[str, Any] = {"t": result.timestamp, "status": result.status.value}
    if result.target_location is not None:
        record["target_xy"] = [float(result.target_location[0]), float(result.target_location[1])]
    if result.target_box is not None:
        record["target_box"] = result.target_box.to_list()
    record["tracks"] = [
        {
            "id": tr.id,
            "status": tr.status.value,
            "is_target": tr.is_target,
            "x": float(tr.state.s[0]),
            "y": float(tr.state.s[1]),
            "vx": float(tr.state.s[2]),
            "vy": float(tr.state.s[3]),
            "misses": tr.misses,
        }
        for tr in result.tracks
    ]
    return record


def write_jsonl(path, records: Iterable[Mapping[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")


def read_jsonl(path) -> List[Dict[str, Any]]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
