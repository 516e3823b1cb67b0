"""Segment-level time-series retrieval from natural-language captions."""

from ._core import (
    RuntimeFailure,
    Tv2Method,
    Tv2Solution,
    detect_change_points,
    embed_text,
    encode_frames,
    infonce_loss,
    make_fixture,
    mean_ap,
    rank_scores,
    recall_at_k,
    render_plot,
    run_all,
    second_diff,
    segment,
    solve_tv2,
    synthesize_caption,
    tv2_objective,
)

__all__ = [
    "RuntimeFailure",
    "Tv2Method",
    "Tv2Solution",
    "detect_change_points",
    "embed_text",
    "encode_frames",
    "infonce_loss",
    "make_fixture",
    "mean_ap",
    "rank_scores",
    "recall_at_k",
    "render_plot",
    "run_all",
    "second_diff",
    "segment",
    "solve_tv2",
    "synthesize_caption",
    "tv2_objective",
]
