"""Random substitution encoding defense against word-level synonym attacks."""
from .lexicon import SynonymTable, load_lexicon, save_lexicon, symmetric_closure, synonyms_of
from .corpus import (LabeledExample, EncodedExample, Vocabulary, build_vocab, encode, decode,
                     load_dataset, tokenize)
from .encoder import RseConfig, SubstitutionPlan, apply_plan, plan_substitution, rse_encode, sample_rate
from .models import TextClassifier, TrainConfig, build_classifier, evaluate_accuracy, train
from .attacks import AttackResult, pwws_attack, random_attack, textfool_attack, word_saliency
from .defenses import (DefendedModel, DefenseSpec, SemEncoding, build_sem_encoding, train_at,
                       train_nt, train_rse, train_sem)
from .metrics import MetricsRecord, attack_success_rate, substitution_rate
from .harness import evaluate_cell, run_grid

__version__ = "0.1.0"
