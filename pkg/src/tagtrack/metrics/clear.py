"""CLEAR-style correspondence and the track-quality counts."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from ..association.hungarian import hungarian_assign
from ..geometry import iou
from .trajectories import TrajectorySet


@dataclass
class FrameMatch:
    pairs: dict[int, int]      # gt id -> hyp id
    fp: list[int]
    fn: list[int]
    switches: list[int]        # gt ids whose hypothesis changed


def frame_correspondence(gt_boxes, hyp_boxes, iou_threshold=0.5, previous=None,
                         last_match=None) -> FrameMatch:
    """Match one frame of ``{id: box}`` dicts.

    ``previous`` is the gt->hyp pairing of the last frame; pairs that are still
    above the threshold are kept before the rest is solved optimally on
    ``1 - IoU``. ``last_match`` maps gt ids to the hypothesis each was last
    matched with (at any earlier frame) and drives the switch count.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError("iou_threshold must lie in (0, 1)")
    previous = previous or {}
    last_match = last_match if last_match is not None else previous
    pairs: dict[int, int] = {}
    for g, h in previous.items():
        if g in gt_boxes and h in hyp_boxes and iou(gt_boxes[g], hyp_boxes[h]) >= iou_threshold:
            pairs[g] = h
    used = set(pairs.values())
    gs = [g for g in sorted(gt_boxes) if g not in pairs]
    hs = [h for h in sorted(hyp_boxes) if h not in used]
    if gs and hs:
        big = 1e6
        cost = np.full((len(gs), len(hs)), big)
        for a, g in enumerate(gs):
            for b, h in enumerate(hs):
                v = iou(gt_boxes[g], hyp_boxes[h])
                if v >= iou_threshold:
                    cost[a, b] = 1.0 - v
        for a, b in hungarian_assign(cost, big).pairs:
            pairs[gs[a]] = hs[b]
    matched_h = set(pairs.values())
    switches = [g for g, h in pairs.items() if g in last_match and last_match[g] != h]
    return FrameMatch(
        pairs=pairs,
        fp=[h for h in sorted(hyp_boxes) if h not in matched_h],
        fn=[g for g in sorted(gt_boxes) if g not in pairs],
        switches=sorted(switches),
    )


@dataclass
class MetricsReport:
    recall: float
    precision: float
    faf: float
    mt: int
    pt: int
    ml: int
    ids: int
    fra: int
    mota: float
    tp: int = 0
    fp: int = 0
    fn: int = 0
    gt_count: int = 0
    num_frames: int = 0

    COLUMNS = ("Recall (%)", "Precision (%)", "FAF", "MT", "PT", "ML", "IDs", "FRA", "MOTA (%)")

    def table_row(self, label: str = "") -> str:
        cells = [f"{100 * self.recall:.2f}", f"{100 * self.precision:.2f}", f"{self.faf:.2f}",
                 str(self.mt), str(self.pt), str(self.ml), str(self.ids), str(self.fra),
                 f"{100 * self.mota:.2f}"]
        return "\t".join(([label] if label else []) + cells)

    def table(self, label: str = "Sequence") -> str:
        return "\t".join(["Sequence", *self.COLUMNS]) + "\n" + self.table_row(label)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_keyvalue(self) -> str:
        return "".join(f"{k}={v!r}\n" for k, v in self.to_dict().items())


def _evaluate(gt: TrajectorySet, hyp: TrajectorySet, iou_threshold, num_frames):
    if len(gt) == 0:
        raise ValueError("ground truth is empty; metrics are undefined")
    gframes, hframes = gt.by_frame(), hyp.by_frame()
    lo, hi = gt.frame_range()
    hr = hyp.frame_range()
    if hr is not None:
        lo, hi = min(lo, hr[0]), max(hi, hr[1])
    if num_frames is None:
        num_frames = hi - lo + 1
    prev: dict[int, int] = {}
    last: dict[int, int] = {}
    tracked_before: dict[int, bool] = {}
    covered = {g: 0 for g in gt.ids}
    totals = dict(tp=0, fp=0, fn=0, ids=0, fra=0)
    for t in range(lo, hi + 1):
        g_boxes, h_boxes = gframes.get(t, {}), hframes.get(t, {})
        m = frame_correspondence(g_boxes, h_boxes, iou_threshold, prev, last)
        totals["tp"] += len(m.pairs)
        totals["fp"] += len(m.fp)
        totals["fn"] += len(m.fn)
        totals["ids"] += len(m.switches)
        for g in g_boxes:
            now = g in m.pairs
            if tracked_before.get(g, False) and not now:
                totals["fra"] += 1
            tracked_before[g] = now
            covered[g] += now
        last.update(m.pairs)
        prev = m.pairs
    lengths = {g: len(gt.tracks[g]) for g in gt.ids}
    return totals, covered, lengths, num_frames


def _counts(covered, lengths, mostly, lost):
    if not 0.0 < lost < mostly < 1.0:
        raise ValueError("need 0 < lost < mostly < 1")
    mt = pt = ml = 0
    for g, n in lengths.items():
        # integer comparison keeps the boundaries exact
        if covered[g] * 10**9 >= round(mostly * 10**9) * n:
            mt += 1
        elif covered[g] * 10**9 <= round(lost * 10**9) * n:
            ml += 1
        else:
            pt += 1
    return mt, pt, ml


def track_level_metrics(gt: TrajectorySet, hyp: TrajectorySet, mostly=0.8, lost=0.2,
                        iou_threshold=0.5) -> tuple[int, int, int]:
    _, covered, lengths, _ = _evaluate(gt, hyp, iou_threshold, None)
    return _counts(covered, lengths, mostly, lost)


def clear_metrics(gt: TrajectorySet, hyp: TrajectorySet, iou_threshold=0.5, mostly=0.8,
                  lost=0.2, num_frames=None) -> MetricsReport:
    """Full report. Precision is 0 when there are no hypotheses at all."""
    totals, covered, lengths, num_frames = _evaluate(gt, hyp, iou_threshold, num_frames)
    mt, pt, ml = _counts(covered, lengths, mostly, lost)
    gt_count = len(gt)
    tp, fp, fn = totals["tp"], totals["fp"], totals["fn"]
    return MetricsReport(
        recall=tp / gt_count,
        precision=tp / (tp + fp) if tp + fp else 0.0,
        faf=fp / num_frames if num_frames else 0.0,
        mt=mt, pt=pt, ml=ml, ids=totals["ids"], fra=totals["fra"],
        mota=1.0 - (fn + fp + totals["ids"]) / gt_count,
        tp=tp, fp=fp, fn=fn, gt_count=gt_count, num_frames=num_frames,
    )
