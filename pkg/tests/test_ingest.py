"""Ingestion formats: JSONL profiles, mapped CSV, text triples."""

import json

import pytest

from graphlink.engine import Engine
from graphlink.errors import MappingError
from graphlink.ingest import (
    CsvMapping,
    Ingester,
    mention_id,
    profile_from_obj,
    profile_to_obj,
)
from graphlink.model import ProvPair as PP


@pytest.fixture
def engine():
    eng = Engine()
    yield eng
    eng.close()


@pytest.fixture
def ingester(engine):
    return Ingester(engine)


TABLE2 = "fixtures/table2.jsonl"


class TestJsonlSchema:
    def test_round_trip(self, p1):
        assert profile_from_obj(profile_to_obj(p1)) == p1

    def test_exact_wire_shape(self, p1):
        obj = profile_to_obj(p1)
        assert obj["id"] == "P1"
        assert obj["attributes"][2] == {
            "key": "name",
            "value": "Peter",
            "prov": [{"pkey": "until", "pvalue": "1991"}],
        }
        assert obj["relations"][0] == {
            "key": "lives_at",
            "target": "L1",
            "prov": [{"pkey": "from", "pvalue": "1989"}, {"pkey": "to", "pvalue": "1995"}],
        }
        assert "prov" not in obj["attributes"][0]

    def test_prov_optional_on_parse(self):
        p = profile_from_obj(
            {"id": "X", "attributes": [{"key": "name", "value": "Ann"}]}
        )
        assert p.attributes[0].prov == ()


class TestIngestJsonl:
    def test_worked_fixture(self, ingester, engine, corpus):
        assert ingester.ingest_jsonl(TABLE2) == 4
        assert ingester.last_errors == []
        for pid, expected in corpus.items():
            assert engine.get_profile(pid) == expected

    def test_empty_file(self, ingester, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert ingester.ingest_jsonl(path) == 0

    def test_bad_lines_collected_others_accepted(self, ingester, engine, tmp_path):
        path = tmp_path / "mixed.jsonl"
        path.write_text(
            '{"id":"A1","attributes":[{"key":"name","value":"Ann"}]}\n'
            '{"attributes":[]}\n'
            "not json at all\n"
            '{"id":"B2","attributes":[{"key":"name","value":"Bo"}]}\n'
        )
        assert ingester.ingest_jsonl(path) == 2
        assert [e.line for e in ingester.last_errors] == [2, 3]
        assert engine.get_profile("A1").attributes[0].value == "Ann"

    def test_idempotent_reingest(self, ingester, engine):
        ingester.ingest_jsonl(TABLE2)
        first_counts = engine.indexer.stats.counts()
        first_profiles = list(engine.kb.scan_profiles())
        ingester.ingest_jsonl(TABLE2)
        assert engine.indexer.stats.counts() == first_counts
        assert list(engine.kb.scan_profiles()) == first_profiles

    def test_ingested_profiles_searchable(self, ingester, engine):
        ingester.ingest_jsonl(TABLE2)
        for word in ("john", "peter", "brown", "2000"):
            assert engine.search(word, 10), word

    def test_missing_file(self, ingester):
        with pytest.raises(FileNotFoundError):
            ingester.ingest_jsonl("nowhere/missing.jsonl")


class TestCsvMapping:
    def test_duplicate_column_rejected(self):
        with pytest.raises(MappingError):
            CsvMapping(id_column="id", attribute_columns={"id": "name"})

    def test_orphan_provenance_rejected(self):
        with pytest.raises(MappingError):
            CsvMapping(
                id_column="id",
                provenance_columns={"since": ("name", "since")},
            )

    def test_from_file(self, tmp_path):
        path = tmp_path / "mapping.json"
        path.write_text(
            json.dumps(
                {
                    "id_column": "id",
                    "attribute_columns": {"full_name": "name", "dob": "bdate"},
                    "relation_columns": {"home": "lives_at"},
                    "provenance_columns": {"home_since": ["home", "since"]},
                    "type_value": "person",
                }
            )
        )
        mapping = CsvMapping.from_file(path)
        assert mapping.attribute_columns["dob"] == "bdate"
        assert mapping.provenance_columns["home_since"] == ("home", "since")


class TestIngestCsv:
    @pytest.fixture
    def mapping(self):
        return CsvMapping(
            id_column="id",
            attribute_columns={"full_name": "name", "dob": "bdate"},
            relation_columns={"home": "lives_at"},
            provenance_columns={"home_since": ("home", "since")},
            type_value="person",
        )

    def test_rows_become_profiles(self, ingester, engine, mapping, tmp_path):
        path = tmp_path / "people.csv"
        path.write_text(
            "id,full_name,dob,home,home_since\n"
            "C1,Ann Smith,1980-01-02,L1,1999\n"
            "C2,Bo Jones,,,\n"
        )
        assert ingester.ingest_csv(path, mapping) == 2
        ann = engine.get_profile("C1")
        assert ann.type_label() == "person"
        assert ("Ann Smith", ()) in [(a.value, a.prov) for a in ann.attributes]
        assert ann.relations[0].target == "L1"
        assert ann.relations[0].prov == (PP("since", "1999"),)
        bo = engine.get_profile("C2")
        assert [a.key for a in bo.attributes] == ["type", "name"]
        assert bo.relations == ()

    def test_empty_cell_produces_no_object(self, ingester, engine, mapping, tmp_path):
        path = tmp_path / "people.csv"
        path.write_text("id,full_name,dob,home,home_since\nC3,,1999-09-09,,\n")
        ingester.ingest_csv(path, mapping)
        keys = [a.key for a in engine.get_profile("C3").attributes]
        assert "name" not in keys and "bdate" in keys

    def test_unknown_column_rejected(self, ingester, mapping, tmp_path):
        path = tmp_path / "people.csv"
        path.write_text("id,full_name\nC1,Ann\n")
        with pytest.raises(MappingError):
            ingester.ingest_csv(path, mapping)

    def test_bad_row_collected(self, ingester, mapping, tmp_path):
        path = tmp_path / "people.csv"
        path.write_text(
            "id,full_name,dob,home,home_since\n"
            "C-BAD,Ann,,,\n"
            "C4,Ann,,,\n"
        )
        assert ingester.ingest_csv(path, mapping) == 1
        assert [e.line for e in ingester.last_errors] == [2]


class TestIngestTriples:
    def test_mentions_become_profiles(self, ingester, engine, tmp_path):
        path = tmp_path / "triples.tsv"
        path.write_text("Peter\thas taken away\tthe mobile phone\n")
        assert ingester.ingest_triples(path) == 1
        subject = engine.get_profile(mention_id("Peter"))
        assert subject.attributes[0] == subject.attributes[0].__class__(
            "name", "Peter"
        )
        target = subject.relations[0].target
        assert target == mention_id("the mobile phone")
        assert engine.get_profile(target).attributes[0].value == "the mobile phone"

    def test_empty_file(self, ingester, tmp_path):
        path = tmp_path / "triples.tsv"
        path.write_text("")
        assert ingester.ingest_triples(path) == 0

    def test_duplicate_triples_collapse(self, ingester, engine, tmp_path):
        path = tmp_path / "triples.tsv"
        path.write_text("Peter\tknows\tBob\nPeter\tknows\tBob\n")
        ingester.ingest_triples(path)
        assert len(engine.get_profile(mention_id("Peter")).relations) == 1

    def test_provenance_tail(self, ingester, engine, tmp_path):
        path = tmp_path / "triples.tsv"
        path.write_text("Peter\tworked at\tAcme Corp\tfrom=2001;source=report7\n")
        ingester.ingest_triples(path)
        rel = engine.get_profile(mention_id("Peter")).relations[0]
        assert rel.prov == (PP("from", "2001"), PP("source", "report7"))

    def test_mention_ids_are_stable_and_normalized(self):
        assert mention_id("Peter") == mention_id("  peter ")
        assert mention_id("Peter") != mention_id("Peters")
        assert "-" not in mention_id("who-knows what")

    def test_repeat_ingest_accumulates_without_duplicates(
        self, ingester, engine, tmp_path
    ):
        first = tmp_path / "a.tsv"
        first.write_text("Peter\tknows\tBob\n")
        second = tmp_path / "b.tsv"
        second.write_text("Peter\tknows\tBob\nPeter\towns\ta phone\n")
        ingester.ingest_triples(first)
        ingester.ingest_triples(second)
        peter = engine.get_profile(mention_id("Peter"))
        assert [(r.key, r.target) for r in peter.relations] == [
            ("knows", mention_id("Bob")),
            ("owns", mention_id("a phone")),
        ]

    def test_malformed_lines_collected(self, ingester, tmp_path):
        path = tmp_path / "triples.tsv"
        path.write_text("only two\tfields\nPeter\tknows\tBob\n")
        assert ingester.ingest_triples(path) == 1
        assert [e.line for e in ingester.last_errors] == [1]
