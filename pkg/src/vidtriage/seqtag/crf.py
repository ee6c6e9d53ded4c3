"""Linear-chain CRF tagger with hand-built feature templates.

Inference is exact: the partition function comes from a log-space forward
pass and decoding from a max-product recursion. Scores live in three
weight blocks: per-feature emission weights, a label transition matrix,
and a start vector. Training minimizes the mean per-sentence negative
log-likelihood plus an L2 penalty by mini-batch gradient descent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from ..medterm import LABELS, TaggedSentence
from ._trainutil import (
    TrainingDivergedError,
    clip_gradients,
    minibatches,
    split_train_dev,
)
from .config import TrainConfig
from .metrics import repair_bio

N_LABELS = len(LABELS)
_LABEL_TO_ID = {lab: i for i, lab in enumerate(LABELS)}

_BOS = "<s>"
_EOS = "</s>"


def word_shape(word: str) -> str:
    """Collapse a word to character-class runs: Xx, d, x-d and so on."""
    shape: list[str] = []
    for ch in word:
        if ch.isupper():
            cls = "X"
        elif ch.islower():
            cls = "x"
        elif ch.isdigit():
            cls = "d"
        else:
            cls = ch
        if not shape or shape[-1] != cls:
            shape.append(cls)
    return "".join(shape)


def token_features(tokens: Sequence[str], i: int) -> list[str]:
    """Feature strings for one token: identity, shape, context, affixes."""
    word = tokens[i]
    low = word.lower()
    prev = tokens[i - 1].lower() if i > 0 else _BOS
    nxt = tokens[i + 1].lower() if i + 1 < len(tokens) else _EOS
    feats = [
        "bias",
        f"w={low}",
        f"shape={word_shape(word)}",
        f"prev={prev}",
        f"next={nxt}",
    ]
    for k in (1, 2, 3):
        if len(low) >= k:
            feats.append(f"pre{k}={low[:k]}")
            feats.append(f"suf{k}={low[-k:]}")
    return feats


def build_feature_index(sentences: Sequence[Sequence[str]]) -> dict[str, int]:
    """Assign dense ids to every feature seen, in first-seen order."""
    index: dict[str, int] = {}
    for tokens in sentences:
        for i in range(len(tokens)):
            for feat in token_features(tokens, i):
                if feat not in index:
                    index[feat] = len(index)
    return index


def encode_sentence(
    feature_index: dict[str, int], tokens: Sequence[str]
) -> list[np.ndarray]:
    """Per-token arrays of active feature ids; unseen features are dropped."""
    encoded = []
    for i in range(len(tokens)):
        ids = [feature_index[f] for f in token_features(tokens, i)
               if f in feature_index]
        encoded.append(np.asarray(ids, dtype=np.intp))
    return encoded


@dataclass
class CrfParams:
    feature_index: dict[str, int]
    w_emit: np.ndarray
    w_trans: np.ndarray
    w_start: np.ndarray

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.w_emit, self.w_trans, self.w_start)

    def copy(self) -> "CrfParams":
        return CrfParams(
            feature_index=dict(self.feature_index),
            w_emit=self.w_emit.copy(),
            w_trans=self.w_trans.copy(),
            w_start=self.w_start.copy(),
        )

    def emissions(self, tokens: Sequence[str]) -> np.ndarray:
        """Emission score matrix, one row per token."""
        encoded = encode_sentence(self.feature_index, tokens)
        return _emission_matrix(self.w_emit, encoded)


def init_crf(feature_index: dict[str, int]) -> CrfParams:
    """Zero-initialized weights; the objective is convex so zeros suffice."""
    return CrfParams(
        feature_index=dict(feature_index),
        w_emit=np.zeros((len(feature_index), N_LABELS)),
        w_trans=np.zeros((N_LABELS, N_LABELS)),
        w_start=np.zeros(N_LABELS),
    )


def _emission_matrix(
    w_emit: np.ndarray, encoded: Sequence[np.ndarray]
) -> np.ndarray:
    emit = np.zeros((len(encoded), w_emit.shape[1]))
    for t, ids in enumerate(encoded):
        if len(ids):
            emit[t] = w_emit[ids].sum(axis=0)
    return emit


def _check_scores(emit: np.ndarray, trans: np.ndarray, start: np.ndarray):
    emit = np.asarray(emit, dtype=float)
    trans = np.asarray(trans, dtype=float)
    start = np.asarray(start, dtype=float)
    if emit.ndim != 2 or emit.shape[0] == 0:
        raise ValueError("emission matrix must be (T, L) with T >= 1")
    n = emit.shape[1]
    if trans.shape != (n, n) or start.shape != (n,):
        raise ValueError("transition/start shapes do not match emissions")
    return emit, trans, start


def crf_log_partition(
    emit: np.ndarray, trans: np.ndarray, start: np.ndarray
) -> float:
    """Log of the summed exponentiated scores of every label sequence."""
    emit, trans, start = _check_scores(emit, trans, start)
    alpha = start + emit[0]
    for t in range(1, emit.shape[0]):
        alpha = emit[t] + logsumexp(alpha[:, None] + trans, axis=0)
    return float(logsumexp(alpha))


def crf_sequence_score(
    emit: np.ndarray,
    trans: np.ndarray,
    start: np.ndarray,
    labels: Sequence[int],
) -> float:
    """Unnormalized score of one label sequence."""
    emit, trans, start = _check_scores(emit, trans, start)
    if len(labels) != emit.shape[0]:
        raise ValueError(
            f"{len(labels)} labels for {emit.shape[0]} tokens"
        )
    score = float(start[labels[0]] + emit[0, labels[0]])
    for t in range(1, emit.shape[0]):
        score += float(trans[labels[t - 1], labels[t]] + emit[t, labels[t]])
    return score


def crf_viterbi(
    emit: np.ndarray, trans: np.ndarray, start: np.ndarray
) -> list[int]:
    """Highest-scoring label sequence; ties go to the lower label id.

    The recursion runs backward and the path is rebuilt front to back, so
    among equal-scoring optima the returned sequence is the
    lexicographically smallest (argmax keeps the first maximum).
    """
    emit, trans, start = _check_scores(emit, trans, start)
    n_tok = emit.shape[0]
    best_to_end = np.empty_like(emit)
    best_to_end[-1] = emit[-1]
    for t in range(n_tok - 2, -1, -1):
        best_to_end[t] = emit[t] + np.max(
            trans + best_to_end[t + 1][None, :], axis=1
        )
    path = [int(np.argmax(start + best_to_end[0]))]
    for t in range(1, n_tok):
        path.append(int(np.argmax(trans[path[-1]] + best_to_end[t])))
    return path


def _forward_backward(
    emit: np.ndarray, trans: np.ndarray, start: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float]:
    n_tok = emit.shape[0]
    alpha = np.empty_like(emit)
    alpha[0] = start + emit[0]
    for t in range(1, n_tok):
        alpha[t] = emit[t] + logsumexp(alpha[t - 1][:, None] + trans, axis=0)
    beta = np.zeros_like(emit)
    for t in range(n_tok - 2, -1, -1):
        beta[t] = logsumexp(trans + (emit[t + 1] + beta[t + 1])[None, :],
                            axis=1)
    return alpha, beta, float(logsumexp(alpha[-1]))


def encode_labels(labels: Sequence[str]) -> list[int]:
    try:
        return [_LABEL_TO_ID[lab] for lab in labels]
    except KeyError as exc:
        raise ValueError(f"unknown label {exc.args[0]!r}") from None


def _loss_grad_encoded(
    params: CrfParams,
    encoded: Sequence[Sequence[np.ndarray]],
    label_ids: Sequence[Sequence[int]],
    l2: float,
) -> tuple[float, dict[str, np.ndarray]]:
    g_emit = np.zeros_like(params.w_emit)
    g_trans = np.zeros_like(params.w_trans)
    g_start = np.zeros_like(params.w_start)
    total_nll = 0.0
    for feat_ids, y in zip(encoded, label_ids):
        emit = _emission_matrix(params.w_emit, feat_ids)
        alpha, beta, log_z = _forward_backward(
            emit, params.w_trans, params.w_start
        )
        total_nll += log_z - crf_sequence_score(
            emit, params.w_trans, params.w_start, y
        )
        delta = np.exp(alpha + beta - log_z)
        delta[np.arange(len(y)), y] -= 1.0
        for t, ids in enumerate(feat_ids):
            if len(ids):
                np.add.at(g_emit, ids, delta[t])
        g_start += delta[0]
        for t in range(1, len(y)):
            pair = np.exp(
                alpha[t - 1][:, None] + params.w_trans
                + (emit[t] + beta[t])[None, :] - log_z
            )
            pair[y[t - 1], y[t]] -= 1.0
            g_trans += pair
    n = len(encoded)
    loss = total_nll / n
    for g in (g_emit, g_trans, g_start):
        g /= n
    if l2:
        for w, g in zip(params.arrays(), (g_emit, g_trans, g_start)):
            loss += l2 * float(np.sum(w * w))
            g += 2.0 * l2 * w
    return loss, {"w_emit": g_emit, "w_trans": g_trans, "w_start": g_start}


def crf_loss_grad(
    params: CrfParams,
    sentences: Sequence[Sequence[str]],
    labels: Sequence[Sequence[str]],
    l2: float = 0.0,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean per-sentence negative log-likelihood plus L2, with gradients.

    Gradients come from forward-backward marginals: expected feature
    counts under the model minus observed counts.
    """
    _check_corpus(sentences, labels)
    encoded = [encode_sentence(params.feature_index, s) for s in sentences]
    label_ids = [encode_labels(l) for l in labels]
    return _loss_grad_encoded(params, encoded, label_ids, l2)


def _mean_nll(
    params: CrfParams,
    encoded: Sequence[Sequence[np.ndarray]],
    label_ids: Sequence[Sequence[int]],
) -> float:
    total = 0.0
    for feat_ids, y in zip(encoded, label_ids):
        emit = _emission_matrix(params.w_emit, feat_ids)
        log_z = crf_log_partition(emit, params.w_trans, params.w_start)
        total += log_z - crf_sequence_score(
            emit, params.w_trans, params.w_start, y
        )
    return total / len(encoded)


def _check_corpus(sentences, labels):
    if len(sentences) == 0:
        raise ValueError("no sentences")
    if len(sentences) != len(labels):
        raise ValueError(
            f"{len(sentences)} sentences vs {len(labels)} label sequences"
        )
    for i, (s, l) in enumerate(zip(sentences, labels)):
        if len(s) == 0:
            raise ValueError(f"sentence {i} is empty")
        if len(s) != len(l):
            raise ValueError(
                f"sentence {i}: {len(s)} tokens vs {len(l)} labels"
            )


def train_crf(
    corpus: Sequence[TaggedSentence],
    config: TrainConfig,
) -> tuple[CrfParams, list[dict]]:
    """Mini-batch gradient descent with early stopping on a held-out slice.

    The dev slice is split off by the seeded shuffle; training stops when
    its mean negative log-likelihood fails to improve for `patience`
    epochs, and the best-scoring parameters are restored.
    """
    sentences = [list(s.tokens) for s in corpus]
    labels = [list(s.labels) for s in corpus]
    _check_corpus(sentences, labels)
    params = init_crf(build_feature_index(sentences))
    encoded = [encode_sentence(params.feature_index, s) for s in sentences]
    label_ids = [encode_labels(l) for l in labels]

    rng = np.random.Generator(np.random.PCG64(config.seed))
    train_idx, dev_idx = split_train_dev(
        len(encoded), config.dev_fraction, rng
    )
    best_dev = np.inf
    best_params = params.copy()
    bad_epochs = 0
    history: list[dict] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(train_idx)
        weighted = 0.0
        for batch in minibatches(order, config.batch_size):
            loss, grads = _loss_grad_encoded(
                params,
                [encoded[i] for i in batch],
                [label_ids[i] for i in batch],
                config.l2,
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"crf training diverged at epoch {epoch}"
                )
            grad_list = [grads["w_emit"], grads["w_trans"], grads["w_start"]]
            clip_gradients(grad_list, config.clip_norm)
            params.w_emit -= config.lr * grads["w_emit"]
            params.w_trans -= config.lr * grads["w_trans"]
            params.w_start -= config.lr * grads["w_start"]
            weighted += loss * len(batch)
        record = {"epoch": epoch, "train_loss": weighted / len(order)}
        if len(dev_idx):
            dev_loss = _mean_nll(
                params,
                [encoded[i] for i in dev_idx],
                [label_ids[i] for i in dev_idx],
            )
            if not np.isfinite(dev_loss):
                raise TrainingDivergedError(
                    f"crf training diverged at epoch {epoch}"
                )
            record["dev_loss"] = dev_loss
            if dev_loss < best_dev:
                best_dev = dev_loss
                best_params = params.copy()
                bad_epochs = 0
            else:
                bad_epochs += 1
        history.append(record)
        if len(dev_idx) and bad_epochs >= config.patience:
            break
    if len(dev_idx):
        params = best_params
    return params, history


def tag_with_crf(
    params: CrfParams, sentences: Sequence[Sequence[str]]
) -> list[list[str]]:
    """Viterbi-decode each sentence to BIO labels.

    Transitions are learned, not constrained, so a decode can start a
    sentence with I-MED; the output is BIO-repaired before being returned.
    """
    tagged = []
    for tokens in sentences:
        if len(tokens) == 0:
            tagged.append([])
            continue
        emit = params.emissions(tokens)
        ids = crf_viterbi(emit, params.w_trans, params.w_start)
        tagged.append(repair_bio([LABELS[i] for i in ids]))
    return tagged
