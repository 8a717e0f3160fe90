from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import replace
from typing import Any, TypeVar, cast

from .const import DEFAULT_ATTEMPTS
from .exc import NonConvergenceError
from .models import QuadratureConfig

_LOGGER = logging.getLogger(__name__)

WrapFuncType = TypeVar("WrapFuncType", bound=Callable[..., Any])


def calculate_escalation(cfg: QuadratureConfig) -> QuadratureConfig:
    """Return a config with twice the nodes and panels and one more doubling."""
    return replace(
        cfg,
        hermite_nodes=2 * cfg.hermite_nodes,
        max_subdivisions=2 * cfg.max_subdivisions,
        max_doublings=cfg.max_doublings + 1,
    )


def retry_on_nonconvergence(
    attempts: int = DEFAULT_ATTEMPTS,
) -> Callable[[WrapFuncType], WrapFuncType]:
    """Define a wrapper to retry with a stronger quadrature on non-convergence.

    The wrapped function must take its QuadratureConfig as the ``cfg``
    keyword argument.
    """

    def _decorator_retry_on_nonconvergence(func: WrapFuncType) -> WrapFuncType:
        def _wrap_nonconvergence_retry(*args: Any, **kwargs: Any) -> Any:
            for attempt in range(attempts):
                try:
                    return func(*args, **kwargs)
                except NonConvergenceError:
                    if attempt == attempts - 1:
                        raise
                    kwargs["cfg"] = calculate_escalation(kwargs["cfg"])
                    _LOGGER.debug(
                        "Quadrature did not converge calling %s, retrying with %s",
                        func,
                        kwargs["cfg"],
                        exc_info=True,
                    )

        return cast(WrapFuncType, _wrap_nonconvergence_retry)

    return _decorator_retry_on_nonconvergence
