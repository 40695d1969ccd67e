"""Small hand-built victims for attack tests."""
import numpy as np


class Constant:
    def __init__(self, probs):
        self.probs = np.asarray(probs, dtype=float)

    def predict_proba_tokens(self, token_lists):
        return np.tile(self.probs, (len(token_lists), 1))


class Linear:
    """Bag-of-words logits: sum of per-word weight vectors."""

    def __init__(self, weights: dict, num_classes: int):
        self.weights = {w: np.asarray(v, dtype=float) for w, v in weights.items()}
        self.num_classes = num_classes

    def predict_proba_tokens(self, token_lists):
        out = np.zeros((len(token_lists), self.num_classes))
        for i, toks in enumerate(token_lists):
            z = np.zeros(self.num_classes)
            for t in toks:
                z = z + self.weights.get(t, 0.0)
            e = np.exp(z - z.max())
            out[i] = e / e.sum()
        return out


class Counting:
    def __init__(self, victim):
        self.victim = victim
        self.calls = 0

    def predict_proba_tokens(self, token_lists):
        self.calls += len(token_lists)
        return self.victim.predict_proba_tokens(token_lists)


def random_linear(words, num_classes, rng, scale=1.0):
    return Linear({w: rng.normal(0, scale, num_classes) for w in words}, num_classes)
