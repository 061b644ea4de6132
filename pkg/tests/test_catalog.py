import pytest

from shiftlab import ClassCatalog, FormatError, ValidationError
from shiftlab.catalog import read_catalog, write_catalog


def test_lookup_both_ways():
    cat = ClassCatalog(("tench", "goldfish"))
    assert cat.name_of(0) == "tench"
    assert cat.id_of("goldfish") == 1
    # membership is over class ids, not names
    assert 0 in cat and 1 in cat
    assert 2 not in cat
    assert len(cat) == 2


def test_duplicate_names_rejected():
    with pytest.raises(ValidationError):
        ClassCatalog(("a", "a"))


def test_empty_name_rejected():
    with pytest.raises(ValidationError):
        ClassCatalog(("a", ""))


def test_unknown_lookups_raise():
    cat = ClassCatalog(("a",))
    with pytest.raises(ValidationError):
        cat.name_of(5)
    with pytest.raises(ValidationError):
        cat.id_of("b")


def test_round_trip(tmp_path):
    cat = ClassCatalog(("tench", "goldfish", "great white shark"))
    p = tmp_path / "catalog.tsv"
    write_catalog(cat, p)
    assert read_catalog(p).names == cat.names
    # exact file shape: headerless, one id<TAB>name row per class
    lines = p.read_text(encoding="utf-8").splitlines()
    assert lines == ["0\ttench", "1\tgoldfish", "2\tgreat white shark"]


def test_read_accepts_any_row_order(tmp_path):
    p = tmp_path / "shuffled.tsv"
    p.write_text("1\tb\n0\ta\n", encoding="utf-8")
    assert read_catalog(p).names == ("a", "b")


def test_read_rejects_sparse_ids(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("0\ta\n2\tb\n", encoding="utf-8")
    with pytest.raises(FormatError, match="dense"):
        read_catalog(p)


def test_read_rejects_noninteger_id(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("zero\ta\n", encoding="utf-8")
    with pytest.raises(FormatError, match="not an integer"):
        read_catalog(p)
