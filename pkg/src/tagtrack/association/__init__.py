"""Detection-to-track association and the track lifecycle."""
from .associate import FrameResult, associate_frame
from .cost import AssociationConfig, build_cost_matrix, gated_cost, is_feasible, pair_cost
from .hungarian import INFEASIBLE, Matching, hungarian_assign
from .tracks import Status, Track, default_box_for, reinitialize_tagbox

__all__ = [
    "INFEASIBLE", "AssociationConfig", "FrameResult", "Matching", "Status", "Track",
    "associate_frame", "build_cost_matrix", "default_box_for", "gated_cost",
    "hungarian_assign", "is_feasible", "pair_cost", "reinitialize_tagbox",
]
