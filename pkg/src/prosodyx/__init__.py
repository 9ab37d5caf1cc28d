"""Prosody toolkit: analyze speech, measure human/TTS prosodic
discrepancies, learn a pitch/duration/energy correction and resynthesize."""
from ._kernels import BACKEND
from .audio_io import AudioBuffer, load_canonical, read_wav, resample, to_mono, write_wav
from .compare import ComparisonReport, align_length, compare_features, normalize_for_loss
from .corpus import (CorpusManifest, FixtureSpec, PairEntry, StressAnnotation,
                     generate_fixture_corpus, load_annotations, load_manifest, validate_manifest)
from .errors import ProsodyError
from .features import (AnalysisConfig, ProsodicFeatures, extract_features,
                       extract_features_for_comparison, load_features, save_features)
from .learner import (GridSpec, LossWeights, TrainingConfig, brute_force_optimum, corpus_loss,
                      loss_gradient, pair_loss, train_model, train_step)
from .manipulate import (ManipulationParams, manipulate_features, modify_duration, scale_energy,
                         shift_pitch)
from .synth import SynthConfig, resynthesize, synthesize

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AudioBuffer", "load_canonical", "read_wav", "resample", "to_mono", "write_wav",
    "ComparisonReport", "align_length", "compare_features", "normalize_for_loss",
    "CorpusManifest", "FixtureSpec", "PairEntry", "StressAnnotation", "generate_fixture_corpus",
    "load_annotations", "load_manifest", "validate_manifest", "ProsodyError",
    "AnalysisConfig", "ProsodicFeatures", "extract_features", "extract_features_for_comparison",
    "load_features", "save_features", "GridSpec", "LossWeights", "TrainingConfig",
    "brute_force_optimum", "corpus_loss", "loss_gradient", "pair_loss", "train_model",
    "train_step", "ManipulationParams", "manipulate_features", "modify_duration", "scale_energy",
    "shift_pitch", "SynthConfig", "resynthesize", "synthesize",
]
