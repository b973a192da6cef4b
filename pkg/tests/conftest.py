import numpy as np
import pytest

from aura.dataset import ClipCollection, ClipRecord, MosPair, MosTriple


def triple(sig, bak=None, ovrl=None):
    if bak is None:
        bak = sig
    if ovrl is None:
        ovrl = sig
    return MosTriple(sig, bak, ovrl)


def pair(before, after):
    """Build a MosPair from scalars or (sig, bak, ovrl) tuples."""
    if not isinstance(before, tuple):
        before = (before,) * 3
    if not isinstance(after, tuple):
        after = (after,) * 3
    return MosPair(before=MosTriple(*before), after=MosTriple(*after))


def pair_with_dmos(dmos):
    """MosPair realizing a given per-channel DMOS from a 3.0 baseline."""
    if not isinstance(dmos, tuple):
        dmos = (dmos,) * 3
    return pair(3.0, tuple(3.0 + d for d in dmos))


def make_collection(dmos_by_clip, dim=4, labels=None, embeddings=None):
    """Collection from {clip_id: {model_id: dmos}} with 3.0 before-MOS."""
    clip_ids = list(dmos_by_clip)
    model_ids = []
    for scores in dmos_by_clip.values():
        for m in scores:
            if m not in model_ids:
                model_ids.append(m)
    rng = np.random.default_rng(0)
    if embeddings is None:
        embeddings = rng.normal(size=(len(clip_ids), dim)).astype(np.float32)
    records = []
    for i, cid in enumerate(clip_ids):
        label = labels.get(cid) if labels else None
        scores = {m: pair_with_dmos(d) for m, d in dmos_by_clip[cid].items()}
        records.append(ClipRecord(clip_id=cid, embedding=embeddings[i],
                                  noise_label=label, scores=scores))
    return ClipCollection(dim=embeddings.shape[1], records=records, model_ids=model_ids)


@pytest.fixture
def tiny_collection():
    return make_collection({
        "clip-a": {"m1": 0.5, "m2": 0.1},
        "clip-b": {"m1": -0.3, "m2": 0.4},
        "clip-c": {"m1": 0.2, "m2": -0.1},
    })
