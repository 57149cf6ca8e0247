"""Knock-sound object recognition with stacked denoising autoencoders.

Configs and reports are plain dicts mirroring the JSON files used by the
``knock`` command-line tool.
"""

import json

from . import _core
from ._core import (
    KnockError,
    Model,
    default_sweep_values,
    grad_check_random,
    load_wav,
    mfcc_feature,
    save_wav,
    sweep_parameters,
    synth_corpus,
    window,
)

__all__ = [
    "KnockError",
    "Model",
    "default_config",
    "default_sweep_values",
    "evaluate",
    "fast_config",
    "grad_check_random",
    "load_dataset",
    "load_wav",
    "mfcc_feature",
    "run_experiment",
    "save_wav",
    "sweep",
    "sweep_parameters",
    "synth_corpus",
    "train",
    "window",
]


def _dump(config):
    return json.dumps(config if config is not None else {})


def default_config():
    return json.loads(_core.default_config_json())


def fast_config(config=None):
    """Shrinks a config to the 3-class, 20-trial CI profile."""
    return json.loads(_core.fast_config_json(_dump(config)))


def load_dataset(config=None):
    """Returns (windows, labels): an (n, window_length) array and a label list."""
    return _core.load_dataset(_dump(config))


def train(config=None):
    """Trains the configured method on the training split."""
    return _core.train(_dump(config))


def evaluate(config, model):
    """Evaluates ``model`` on the test split of ``config``'s corpus."""
    return json.loads(_core.evaluate(_dump(config), model))


def run_experiment(config=None):
    return json.loads(_core.run_experiment(_dump(config)))


def sweep(config, param, values=None, repetitions=5, jobs=1):
    if values is None:
        values = default_sweep_values(param)
    return _core.sweep(_dump(config), param, [str(v) for v in values], repetitions, jobs)
