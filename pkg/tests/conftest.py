import numpy as np
import pytest

from shiftlab import DatasetManifest, EmbeddingSet, ManifestEntry, PredictionLog


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion, visible in any run log."""
    rows = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid or getattr(rep, "when", "call") != "call":
                continue
            name = nodeid.split("::")[-1]
            slug = name.removeprefix("test_").replace("_", "-")
            rows.append((slug, label))
    if rows:
        terminalreporter.section("acceptance criteria")
        for slug, label in sorted(rows):
            terminalreporter.write_line(f"ACCEPTANCE {slug}: {label}")


def make_embeddings(vectors, class_ids=None, tag="test", modality="image", prefix="s"):
    vectors = np.asarray(vectors, dtype=np.float32)
    n = vectors.shape[0]
    if class_ids is None:
        class_ids = np.zeros(n, dtype=np.int64)
    return EmbeddingSet(
        dim=vectors.shape[1],
        sample_ids=tuple(f"{prefix}-{i:04d}" for i in range(n)),
        class_ids=np.asarray(class_ids, dtype=np.int64),
        vectors=vectors,
        dataset_tag=tag,
        modality=modality,
    )


def make_log(classifier="clf", tag="src", triples=()):
    return PredictionLog(classifier, tag, tuple(triples))


def make_pool(tag, origin, per_class, n_classes=3):
    entries = []
    for cid in range(n_classes):
        for i in range(per_class):
            sid = f"{tag}-c{cid}-{i:04d}"
            entries.append(ManifestEntry(sid, cid, f"file://{tag}/{sid}"))
    return DatasetManifest(tag, origin, tuple(entries))


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)
