import numpy as np
import pytest

from ciprop import (
    EmbeddingConfig,
    KnownMask,
    NodeEmbeddings,
    build_maxnorm,
    fit_classifier,
    node2vec_embed,
    predict_unknown,
    random_walks,
    train_embeddings,
)
from ciprop.errors import DataError


def _two_blocks(n_per=10, inter=0.05):
    """Two dense blocks with faint cross edges; classic community fixture."""
    d = 2 * n_per
    W = np.full((d, d), inter)
    W[:n_per, :n_per] = 1.0
    W[n_per:, n_per:] = 1.0
    np.fill_diagonal(W, 0.0)
    return W


def _cosine(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def test_config_validation():
    EmbeddingConfig()  # defaults are valid
    with pytest.raises(DataError):
        EmbeddingConfig(dimension=0)
    with pytest.raises(DataError):
        EmbeddingConfig(p=0.0)
    with pytest.raises(DataError):
        EmbeddingConfig(q=-1.0)
    with pytest.raises(DataError):
        EmbeddingConfig(walk_length=0)
    with pytest.raises(DataError):
        EmbeddingConfig(negative_samples=-1)
    with pytest.raises(DataError):
        EmbeddingConfig(learning_rate=0.0)


def test_random_walks_over_transition_matrix():
    rng = np.random.default_rng(0)
    P = np.clip(rng.normal(0, 0.2, (9, 9)), -0.9, 0.9)
    P = (P + P.T) / 2
    np.fill_diagonal(P, 0.0)
    Pm = build_maxnorm(P)
    cfg = EmbeddingConfig(walk_length=8, walks_per_node=3, seed=4)
    walks = random_walks(Pm, cfg)
    assert walks.shape == (27, 8)
    assert np.array_equal(walks, random_walks(Pm, cfg))
    other = random_walks(Pm, EmbeddingConfig(walk_length=8, walks_per_node=3, seed=5))
    assert not np.array_equal(walks, other)


def test_random_walks_rejects_bad_weights():
    with pytest.raises(DataError):
        random_walks(np.ones((2, 3)), EmbeddingConfig())
    with pytest.raises(DataError):
        random_walks(np.array([[0.0, -1.0], [1.0, 0.0]]), EmbeddingConfig())
    with pytest.raises(DataError):
        random_walks(np.array([[0.0, np.inf], [1.0, 0.0]]), EmbeddingConfig())


def test_train_embeddings_empty_corpus():
    with pytest.raises(DataError):
        train_embeddings(np.empty((0, 5), dtype=np.int32), EmbeddingConfig())


def test_train_embeddings_deterministic():
    W = _two_blocks(4)
    cfg = EmbeddingConfig(dimension=8, walk_length=10, walks_per_node=4, seed=2)
    walks = random_walks(W, cfg)
    a = train_embeddings(walks, cfg)
    b = train_embeddings(walks, cfg)
    assert np.array_equal(a.vectors, b.vectors)
    assert a.n_nodes == 8 and a.dimension == 8


def test_train_embeddings_single_dimension():
    W = _two_blocks(3)
    cfg = EmbeddingConfig(dimension=1, walk_length=6, walks_per_node=3, seed=0)
    emb = train_embeddings(random_walks(W, cfg), cfg)
    assert emb.vectors.shape == (6, 1)
    assert np.all(np.isfinite(emb.vectors))


def test_embeddings_separate_communities():
    W = _two_blocks(10)
    for seed in range(5):
        cfg = EmbeddingConfig(
            dimension=16, walk_length=15, walks_per_node=8, seed=seed
        )
        emb = node2vec_embed(W, cfg)
        v = emb.vectors
        intra = _cosine(v[0], v[1])
        inter = _cosine(v[0], v[10])
        assert intra > inter


def test_node_embeddings_validation():
    with pytest.raises(DataError):
        NodeEmbeddings(vectors=np.ones(4))
    with pytest.raises(DataError):
        NodeEmbeddings(vectors=np.array([[1.0, np.nan]]))
    emb = NodeEmbeddings(vectors=np.ones((2, 3)))
    with pytest.raises(ValueError):
        emb.vectors[0, 0] = 5.0


def _mask(d, known):
    known = list(known)
    unknown = [i for i in range(d) if i not in known]
    return KnownMask(known=np.array(known), unknown=np.array(unknown))


def _separable_embeddings(rng, d=20, e=6):
    """Two gaussian clusters far apart; labels follow the cluster."""
    half = d // 2
    v = np.vstack(
        [
            rng.normal(-3.0, 0.3, (half, e)),
            rng.normal(3.0, 0.3, (d - half, e)),
        ]
    )
    labels = np.array([0] * half + [1] * (d - half))
    return NodeEmbeddings(vectors=v), labels


def test_fit_classifier_separable():
    rng = np.random.default_rng(1)
    emb, labels = _separable_embeddings(rng)
    mask = _mask(20, range(12))
    clf, report = fit_classifier(emb, mask, labels, seed=0)
    assert report.final_loss >= 0.0
    assert report.converged
    preds = clf.predict(emb.vectors[mask.known])
    assert np.array_equal(preds, labels[mask.known])


def test_fit_classifier_holdout_generalizes():
    rng = np.random.default_rng(2)
    emb, labels = _separable_embeddings(rng, d=30)
    mask = _mask(30, list(range(10)) + list(range(15, 25)))
    clf, _ = fit_classifier(emb, mask, labels, seed=0)
    proba = predict_unknown(clf, emb, mask)
    assert proba.shape == (10, 2)
    assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-9)
    assert np.array_equal(proba.argmax(axis=1), labels[mask.unknown])


def test_fit_classifier_single_class_degenerate():
    rng = np.random.default_rng(3)
    emb, labels = _separable_embeddings(rng)
    mask = _mask(20, [0, 1, 2])  # all label 0
    with pytest.warns(UserWarning, match="degenerate|no known example"):
        clf, report = fit_classifier(emb, mask, labels, n_categories=2)
    proba = predict_unknown(clf, emb, mask)
    assert np.all(proba[:, 0] == 1.0)
    assert report.epochs_run == 0


def test_fit_classifier_warns_on_absent_category():
    rng = np.random.default_rng(4)
    emb, labels = _separable_embeddings(rng)
    mask = _mask(20, range(12))
    with pytest.warns(UserWarning, match="no known example"):
        clf, _ = fit_classifier(emb, mask, labels, n_categories=3)
    proba = predict_unknown(clf, emb, mask)
    assert proba.shape == (8, 3)
    assert np.all(proba[:, 2] == 0.0)  # unseen category never predicted
    assert np.allclose(proba.sum(axis=1), 1.0)


def test_fit_classifier_mlp_path():
    rng = np.random.default_rng(5)
    emb, labels = _separable_embeddings(rng)
    mask = _mask(20, range(14))
    clf, report = fit_classifier(emb, mask, labels, model="mlp", seed=0)
    assert report.final_loss >= 0.0
    proba = predict_unknown(clf, emb, mask)
    assert proba.shape == (6, 2)
    assert np.all(proba >= 0.0)
    assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-9)


def test_fit_classifier_errors():
    rng = np.random.default_rng(6)
    emb, labels = _separable_embeddings(rng)
    mask = _mask(20, list(range(5)) + list(range(10, 15)))
    with pytest.raises(DataError):
        fit_classifier(emb, mask, labels, model="svm")
    with pytest.raises(DataError):
        fit_classifier(emb, mask, labels[:5])
    with pytest.raises(DataError):
        fit_classifier(emb, mask, labels - 1)
    with pytest.raises(DataError):
        fit_classifier(emb, mask, labels, n_categories=1)  # labels reach 1


def test_predict_unknown_dimension_mismatch():
    rng = np.random.default_rng(7)
    emb, labels = _separable_embeddings(rng)
    mask = _mask(20, list(range(5)) + list(range(10, 15)))
    clf, _ = fit_classifier(emb, mask, labels)
    narrow = NodeEmbeddings(vectors=emb.vectors[:, :3])
    with pytest.raises(DataError):
        predict_unknown(clf, narrow, mask)


def test_predict_unknown_empty():
    rng = np.random.default_rng(8)
    emb, labels = _separable_embeddings(rng)
    mask = _mask(20, list(range(5)) + list(range(10, 15)))
    clf, _ = fit_classifier(emb, mask, labels)
    all_known = KnownMask(known=np.arange(20), unknown=np.array([], dtype=np.int64))
    out = predict_unknown(clf, emb, all_known)
    assert out.shape == (0, 2)


def test_end_to_end_cliques_classified():
    # full pipeline: walks -> embeddings -> classifier -> unknown predictions
    W = _two_blocks(10)
    cfg = EmbeddingConfig(dimension=16, walk_length=15, walks_per_node=8, seed=1)
    emb = node2vec_embed(W, cfg)
    labels = np.array([0] * 10 + [1] * 10)
    mask = _mask(20, list(range(6)) + list(range(10, 16)))
    clf, _ = fit_classifier(emb, mask, labels, seed=0)
    proba = predict_unknown(clf, emb, mask)
    assert np.array_equal(proba.argmax(axis=1), labels[mask.unknown])
