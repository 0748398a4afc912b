"""Heterogeneous oblique and double random forests.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its surface.
"""

from hetforest._core import (
    DataError,
    Dataset,
    ForestModel,
    average_ranks,
    bootstrap,
    evaluate,
    friedman_chi2,
    friedman_f,
    load_csv,
    load_model,
    make_dataset,
    model_from_json,
    nemenyi_cd,
    nemenyi_q_alpha05,
    render_report,
    save_model,
    sign_test_threshold,
    significance_table,
    stratified_kfold,
    train_forest,
    variants,
    win_tie_loss,
    __version__,
)

__all__ = [
    "DataError",
    "Dataset",
    "ForestModel",
    "average_ranks",
    "bootstrap",
    "evaluate",
    "friedman_chi2",
    "friedman_f",
    "load_csv",
    "load_model",
    "make_dataset",
    "model_from_json",
    "nemenyi_cd",
    "nemenyi_q_alpha05",
    "render_report",
    "save_model",
    "sign_test_threshold",
    "significance_table",
    "stratified_kfold",
    "train_forest",
    "variants",
    "win_tie_loss",
    "__version__",
]
