"""Case-study builders and their bundled parameter files."""
from importlib import resources

from .cstr import CstrParams, build_cstr
from .params import parse_params_text, read_params
from .small_batch import BatchParams, build_small_batch, literature_params, synthetic_params

MODELS = ("cstr", "smallbatch")


def data_text(name):
    """Contents of a bundled parameter file, e.g. ``"cstr.params"``."""
    return resources.files(__package__).joinpath("data", name).read_text(encoding="utf-8")


def load_model(name, params_path=None, size=None):
    """Build a bundled case study, optionally from a parameter file.

    ``size`` overrides the reactor count of the CSTR model and is rejected
    for the batch model. Returns ``(model, specs)``.
    """
    if name == "cstr":
        text = read_params(params_path) if params_path else parse_params_text(data_text("cstr.params"))
        return build_cstr(CstrParams.from_mapping(text, R=size))
    if name == "smallbatch":
        if size is not None:
            raise ValueError("--size applies to the cstr model only")
        if params_path:
            return build_small_batch(BatchParams.from_mapping(read_params(params_path)))
        return build_small_batch(literature_params())
    raise ValueError(f"unknown model {name!r}; expected one of {', '.join(MODELS)}")


__all__ = [
    "BatchParams", "CstrParams", "MODELS", "build_cstr", "build_small_batch", "data_text",
    "literature_params", "load_model", "synthetic_params",
]
