"""Greedy token-matching text similarity (precision / recall / F1).

Recall averages, over reference tokens, the best cosine against any candidate
token; precision does the same from the candidate side; pairwise cosines are
clamped to [0, 1] first. F1 is the harmonic mean, defined as 0 when P+R == 0.
No baseline rescaling is applied anywhere.
"""

from array import array

from .. import kernels
from ..errors import IntegrityError
from .textproc import tokenize


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def greedy_match_pr(candidate_vectors, reference_vectors):
    """(P, R) over explicit token-vector lists; all vectors share one dim."""
    if not candidate_vectors or not reference_vectors:
        raise IntegrityError("token vector lists must be non-empty")
    dim = len(candidate_vectors[0])
    for vec in list(candidate_vectors) + list(reference_vectors):
        if len(vec) != dim:
            raise IntegrityError("token vectors must share one dimension")
    cand_flat = array("d", (x for vec in candidate_vectors for x in vec))
    ref_flat = array("d", (x for vec in reference_vectors for x in vec))
    try:
        return kernels.bertscore_pr(cand_flat, len(candidate_vectors),
                                    ref_flat, len(reference_vectors), dim)
    except ValueError as exc:
        raise IntegrityError(str(exc)) from None


def bert_score(candidate: str, reference: str, token_embedder):
    """(P, R, F1) between two texts under a per-token embedder.

    token_embedder maps a token list to one vector per token.
    """
    cand_tokens = tokenize(candidate)
    ref_tokens = tokenize(reference)
    if not cand_tokens or not ref_tokens:
        raise IntegrityError("both texts must tokenize to at least one token")
    cand_vectors = token_embedder(cand_tokens)
    ref_vectors = token_embedder(ref_tokens)
    if len(cand_vectors) != len(cand_tokens) or len(ref_vectors) != len(ref_tokens):
        raise IntegrityError("token embedder must return one vector per token")
    precision, recall = greedy_match_pr(cand_vectors, ref_vectors)
    return precision, recall, f1_score(precision, recall)


def provider_token_embedder(provider):
    """Adapts an embedding provider into a per-token embedder."""

    def embed(tokens):
        return [v.values for v in provider.embed_texts(list(tokens))]

    return embed
