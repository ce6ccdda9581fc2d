from ._core import (
    Dataset,
    EpochLog,
    HiermetricError,
    HierLabel,
    Polarity,
    TrainConfig,
    TrainedModel,
    adacos_init_scale,
    adacos_loss,
    adacos_scale_from_stats,
    classical_mds,
    cosine_sim,
    evaluate,
    generate_synthetic,
    load_checkpoint,
    load_jsonl,
    normalize_rows,
    pair_target,
    pairwise_cosine_loss,
    pairwise_distances,
    predict,
    render_svg,
    save_checkpoint,
    save_jsonl,
    softmax_ce_loss,
    tfidf_dedup,
    train,
    triplet_loss,
    unit_normalize,
)

__version__ = "0.1.0"
