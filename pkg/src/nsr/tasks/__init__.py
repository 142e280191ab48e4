"""Benchmark dataset generators and exact-match evaluation."""

from .common import (
    SPLITS,
    TASKS,
    ConfigError,
    Sample,
    SplitSpec,
    canonical_split,
    canonical_task,
    evaluate_exact,
    read_samples,
    write_samples,
)
from .hint import HintConfig, generate_hint_sym
from .pcfg import PcfgConfig, generate_pcfg_lite
from .scan import generate_scan


def generate(spec: SplitSpec):
    """Dispatch a SplitSpec to its task generator.

    Returns (train, test) where test is a sample list, except for
    hint_sym where it is the subset dict.  Size caps in the spec trim
    or parameterize the generated sets.
    """
    if spec.task == "scan":
        train, test = generate_scan(spec.split, seed=spec.seed)
        if spec.n_train is not None:
            train = train[: spec.n_train]
        if spec.n_test is not None:
            test = test[: spec.n_test]
        return train, test
    if spec.task == "pcfg_lite":
        config = PcfgConfig(
            seed=spec.seed,
            n_train=spec.n_train or PcfgConfig.n_train,
            n_test=spec.n_test or PcfgConfig.n_test,
        )
        return generate_pcfg_lite(spec.split, config)
    config = HintConfig(
        seed=spec.seed,
        n_train=spec.n_train or HintConfig.n_train,
        n_test=spec.n_test or HintConfig.n_test,
    )
    return generate_hint_sym(config)


__all__ = [
    "ConfigError",
    "HintConfig",
    "PcfgConfig",
    "Sample",
    "SplitSpec",
    "SPLITS",
    "TASKS",
    "canonical_split",
    "canonical_task",
    "evaluate_exact",
    "generate",
    "generate_hint_sym",
    "generate_pcfg_lite",
    "generate_scan",
    "read_samples",
    "write_samples",
]
