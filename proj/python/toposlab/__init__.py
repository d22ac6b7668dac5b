"""Finite presheaf models over posets, with forcing semantics.

Thin wrapper over the compiled extension: the JSON-returning entry points are
re-exposed here as dict-returning functions.
"""

import json

from ._core import (
    InputError,
    Model,
    ResourceError,
    builtin_model,
    builtin_model_names,
    macro_names,
)
from . import _core

__all__ = [
    "InputError",
    "Model",
    "ResourceError",
    "builtin_model",
    "builtin_model_names",
    "eval_sentence",
    "macro_names",
    "run_scenario",
    "search_countermodels",
]


def eval_sentence(model, sentence, *, strict_kfin=False, budget=-1, power_cap=-1):
    """Evaluate a closed sentence over a model.

    Returns a dict with keys ``sentence``, ``truth_value`` (``stages`` list and
    ``top`` flag) and ``stats``.
    """
    return json.loads(
        _core.eval_sentence_json(
            model, sentence, strict_kfin=strict_kfin, budget=budget, power_cap=power_cap
        )
    )


def run_scenario(scenario, model, *, base="B", downset=(), strict_kfin=False,
                 budget=-1, power_cap=-1):
    """Run one named scenario and return its report as a dict.

    ``downset`` lists stage names (closed downward); empty means the first
    minimal stage.
    """
    return json.loads(
        _core.run_scenario_json(
            scenario,
            model,
            base=base,
            downset=list(downset),
            strict_kfin=strict_kfin,
            budget=budget,
            power_cap=power_cap,
        )
    )


def search_countermodels(sentence, *, max_poset=2, max_fiber=2, first=False, jobs=1,
                         budget=-1, power_cap=-1):
    """Enumerate small models refuting a sentence.

    Returns a dict with ``hits`` (one report per countermodel),
    ``models_scanned`` and ``countermodels``.
    """
    return json.loads(
        _core.search_json(
            sentence,
            max_poset=max_poset,
            max_fiber=max_fiber,
            first=first,
            jobs=jobs,
            budget=budget,
            power_cap=power_cap,
        )
    )
