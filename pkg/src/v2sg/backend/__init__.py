from .base import FeatureMapStack, GeneratorBackend, GeneratorSpec, SynthesisResult
from .checkpoint import load_pretrained, read_generator, register_adapter, save_generator, write_generator
from .toy import ToyGenerator, ToyWeights, toy_generator

__all__ = [
    "FeatureMapStack",
    "GeneratorBackend",
    "GeneratorSpec",
    "SynthesisResult",
    "ToyGenerator",
    "ToyWeights",
    "toy_generator",
    "load_pretrained",
    "read_generator",
    "register_adapter",
    "save_generator",
    "write_generator",
]
