"""Numerical reasoning program DSL, execution metrics, and retriever/generator
fusion for FinQA-style datasets. Thin python surface over the C++ core."""

from finprog._core import (  # noqa: F401
    Error,
    LRModel,
    Program,
    __version__,
    adversarial_audit,
    aggregate_window_scores,
    answers_match,
    auc,
    canonicalize_program,
    execute,
    extract_facts,
    fill_prompt,
    linearize_table_row,
    lr_predict,
    lr_train,
    make_windows,
    overlap_report,
    parse_cell_number,
    parse_program,
    precision_at_k,
    program_equivalent,
    rank_and_select,
    recall_at_k,
    resplit,
    serialize_program,
    stack_rank,
    stack_train,
    tokenize_program,
    weighted_vote,
)
