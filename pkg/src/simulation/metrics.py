"""Scoring a selection against the truth and an independent test set."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Optional

from src.glm.dataset import Dataset
from src.glm.families import default_metric, prediction_loss
from src.selection.selectors import SelectionReport


@dataclass
class Metrics:
    fn_count: Optional[int]
    fp_count: Optional[int]
    loss: float               # pe or ce of the refit (penalized coefficients if the refit failed)
    loss_penalized: float     # pe or ce of the whole-data penalized coefficients
    loss_name: str
    model_size: int
    selected_lambda: Optional[float]
    exact_recovery: Optional[int]
    refit_used: bool
    runtime: float = 0.0

    def as_row(self) -> dict:
        return asdict(self)


def evaluate(
    selected: SelectionReport,
    truth: Optional[Iterable[int]],
    test: Dataset,
    runtime: float = 0.0,
) -> Metrics:
    """FN/FP against the true support (None when unknown) and test-set PE or CE."""
    chosen = set(selected.selected_active)
    if truth is None:
        fn = fp = exact = None
    else:
        support = set(int(j) for j in truth)
        fn = len(support - chosen)
        fp = len(chosen - support)
        exact = int(chosen == support)

    family = test.family
    metric = default_metric(family)
    return Metrics(
        fn_count=fn,
        fp_count=fp,
        loss=prediction_loss(family, selected.coef, test, metric, selected.intercept),
        loss_penalized=prediction_loss(family, selected.penalized_coef, test, metric, selected.penalized_intercept),
        loss_name=metric.value,
        model_size=len(chosen),
        selected_lambda=selected.selected_lambda,
        exact_recovery=exact,
        refit_used=selected.uses_refit,
        runtime=runtime,
    )
