"""Corpus parsing, normalization, splitting and answer-key derivation."""

import io

import pytest
from hypothesis import given, strategies as st

from afg.errors import (
    ConfigError,
    DataError,
    EmptyInputError,
    NotFoundError,
    ParseError,
    RowError,
)
from afg.ingest import (
    Label5,
    RawSample,
    Submission,
    TsvSchema,
    canonical_reference,
    derive_answer_key,
    load_answer_keys,
    load_submissions,
    normalize_scores,
    parse_rct,
    parse_scored_tsv,
    serialize_rct,
    split,
)

SCHEMA = TsvSchema(score_ranges={"1": (0.0, 6.0), "2": (2.0, 12.0)})


def tsv(*rows: str) -> io.BytesIO:
    return io.BytesIO("\n".join(rows).encode("utf-8"))


class TestParseScoredTsv:
    def test_basic_row(self):
        out = parse_scored_tsv(tsv("id\tset\tessay\tscore", "1\t1\tSome text\t4"), SCHEMA)
        assert len(out) == 1
        s = out[0]
        assert (s.raw_score, s.min_score, s.max_score) == (4.0, 0.0, 6.0)
        assert s.text == "Some text"

    def test_out_of_range_score_is_row_error(self):
        with pytest.raises(RowError) as err:
            parse_scored_tsv(tsv("id\tset\tessay\tscore", "1\t1\tText\t7"), SCHEMA)
        assert err.value.line == 2

    def test_order_preserved(self):
        out = parse_scored_tsv(
            tsv("id\tset\tessay\tscore", "a\t1\tx\t1", "b\t1\ty\t2", "c\t1\tz\t3"),
            SCHEMA,
        )
        assert [s.sample_id for s in out] == ["a", "b", "c"]

    def test_missing_column_names_it(self):
        with pytest.raises(ConfigError, match="essay"):
            parse_scored_tsv(tsv("id\tset\tscore", "1\t1\t4"), SCHEMA)

    def test_unparseable_score_has_line_number(self):
        with pytest.raises(RowError) as err:
            parse_scored_tsv(
                tsv("id\tset\tessay\tscore", "1\t1\tok\t3", "2\t1\tbad\txyz"), SCHEMA
            )
        assert err.value.line == 3

    def test_empty_file(self):
        with pytest.raises(EmptyInputError):
            parse_scored_tsv(tsv(), SCHEMA)

    def test_unknown_prompt_is_config_error(self):
        with pytest.raises(ConfigError, match="9"):
            parse_scored_tsv(tsv("id\tset\tessay\tscore", "1\t9\tx\t1"), SCHEMA)


class TestNormalizeScores:
    def test_midpoint(self):
        [n] = normalize_scores([RawSample("1", "1", "t", 3.0, 0.0, 6.0)])
        assert n.score01 == pytest.approx(0.5)

    def test_full_marks_map_to_one(self):
        [n] = normalize_scores([RawSample("1", "1", "t", 6.0, 0.0, 6.0)])
        assert n.score01 == 1.0

    def test_shifted_range(self):
        [n] = normalize_scores([RawSample("1", "2", "t", 7.0, 2.0, 12.0)])
        assert n.score01 == pytest.approx(0.5)

    def test_endpoints_exact(self):
        lo, hi = normalize_scores(
            [RawSample("a", "1", "t", 0.0, 0.0, 6.0), RawSample("b", "1", "t", 6.0, 0.0, 6.0)]
        )
        assert lo.score01 == 0.0 and hi.score01 == 1.0

    def test_affine_order_preserving(self):
        samples = [RawSample(str(i), "1", "t", float(i), 0.0, 6.0) for i in range(7)]
        scores = [n.score01 for n in normalize_scores(samples)]
        assert scores == sorted(scores)
        assert all(b > a for a, b in zip(scores, scores[1:]))


class TestParseRct:
    def test_minimal_abstract(self):
        out = parse_rct(io.BytesIO(b"###42\nBACKGROUND\tA.\nRESULT\tB.\n\n"))
        assert len(out) == 1
        assert out[0].abstract_id == "42"
        assert [lbl for lbl, _ in out[0].sentences] == [Label5.BACKGROUND, Label5.RESULT]

    def test_unknown_label_named(self):
        with pytest.raises(ParseError, match="FOO"):
            parse_rct(io.BytesIO(b"###1\nFOO\tX.\n"))

    def test_two_abstracts(self):
        text = "###1\nMETHOD\tM.\n\n###2\nCONCLUSION\tC.\n"
        out = parse_rct(io.BytesIO(text.encode()))
        assert [a.abstract_id for a in out] == ["1", "2"]

    def test_sentence_before_header(self):
        with pytest.raises(ParseError, match="before"):
            parse_rct(io.BytesIO(b"METHOD\tM.\n"))

    def test_abstract_without_sentences(self):
        with pytest.raises(ParseError):
            parse_rct(io.BytesIO(b"###1\n\n###2\nRESULT\tR.\n"))

    def test_roundtrip_identity(self):
        text = "###10\nBACKGROUND\tOne.\nOBJECTIVE\tTwo.\nMETHOD\tThree.\n\n###11\nRESULT\tFour.\n"
        abstracts = parse_rct(io.BytesIO(text.encode()))
        again = parse_rct(io.BytesIO(serialize_rct(abstracts).encode()))
        assert again == abstracts


class TestSplit:
    def test_cardinality(self):
        ds = split(list(range(10)), 0.8, seed=7)
        assert len(ds.train) == 8 and len(ds.eval) == 2
        assert set(ds.train).isdisjoint(ds.eval)

    def test_determinism(self):
        a = split(list(range(100)), 0.8, seed=3)
        b = split(list(range(100)), 0.8, seed=3)
        assert a == b

    def test_different_seed_differs(self):
        a = split(list(range(100)), 0.8, seed=3)
        b = split(list(range(100)), 0.8, seed=4)
        assert a.train != b.train

    def test_large_ninety_ten(self):
        ds = split(list(range(20000)), 0.9, seed=1)
        assert len(ds.train) == 18000 and len(ds.eval) == 2000

    def test_partition_property(self):
        items = [f"s{i}" for i in range(37)]
        ds = split(items, 0.61, seed=9)
        assert sorted(ds.train + ds.eval) == sorted(items)

    def test_fraction_validation(self):
        with pytest.raises(ValueError):
            split([1, 2, 3], 0.0, seed=1)
        with pytest.raises(ValueError):
            split([1, 2, 3], 1.0, seed=1)

    def test_both_sides_nonempty_in_extremes(self):
        ds = split([1, 2], 0.99, seed=1)
        assert len(ds.train) == 1 and len(ds.eval) == 1


def _sub(i, paper="p1", cited=42, impact=6.005, rsc="A, B, 2018.", acs="B; A; 2018."):
    return Submission(
        submission_id=f"s{i}", paper_id=paper, impact_factor=impact,
        ref_rsc=rsc, ref_acs=acs, times_cited=cited,
        abstract="One sentence abstract.",
    )


class TestDeriveAnswerKey:
    def test_modal_citation_count(self):
        subs = [_sub(0, cited=42), _sub(1, cited=42), _sub(2, cited=10)]
        key, warnings = derive_answer_key(subs, "p1")
        assert key.times_cited == 42
        assert warnings == []

    def test_single_submission(self):
        key, _ = derive_answer_key([_sub(0)], "p1")
        assert key.impact_factor == 6.005
        assert key.ref_rsc == "A, B, 2018."

    def test_tie_breaks_to_smallest_with_warning(self):
        subs = [_sub(0, cited=5), _sub(1, cited=5), _sub(2, cited=9), _sub(3, cited=9)]
        key, warnings = derive_answer_key(subs, "p1")
        assert key.times_cited == 5
        assert any("times_cited" in w for w in warnings)

    def test_references_compared_canonically(self):
        subs = [
            _sub(0, rsc="A,  B, 2018."),
            _sub(1, rsc="A, B, 2018"),
            _sub(2, rsc="Different, 2020."),
        ]
        key, _ = derive_answer_key(subs, "p1")
        # the two whitespace/period variants pool to one modal class;
        # the first raw spelling is kept for display
        assert canonical_reference(key.ref_rsc) == "A, B, 2018"
        assert key.ref_rsc == "A,  B, 2018."

    def test_value_always_from_input(self):
        subs = [_sub(i, cited=i % 3) for i in range(9)]
        key, _ = derive_answer_key(subs, "p1")
        assert key.times_cited in {s.times_cited for s in subs}

    def test_unknown_paper(self):
        with pytest.raises(NotFoundError):
            derive_answer_key([_sub(0)], "nope")


class TestJsonIngest:
    def test_submissions_roundtrip(self, tmp_path):
        path = tmp_path / "subs.json"
        path.write_text(
            """[{"submission_id": "s1", "paper_id": "p1", "impact_factor": 6.005,
                 "ref_rsc": "A", "ref_acs": "B", "times_cited": 10,
                 "abstract": "Text here.",
                 "human_marks": {"q1_impact": 1, "q2_rsc": 1, "q3_acs": 0.5,
                                  "q4_cited": 0, "abstract_mark": 4}}]""",
            encoding="utf-8",
        )
        [sub] = load_submissions(path)
        assert sub.human_marks.abstract_mark == 4
        assert sub.human_marks.total == 6.5

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "subs.json"
        path.write_text('[{"submission_id": "s1"}]', encoding="utf-8")
        with pytest.raises(DataError, match="paper_id"):
            load_submissions(path)

    def test_answer_keys_detect_duplicates(self, tmp_path):
        path = tmp_path / "keys.json"
        entry = (
            '{"paper_id": "p1", "impact_factor": 1.5, "ref_rsc": "r", '
            '"ref_acs": "a", "times_cited": 3}'
        )
        path.write_text(f"[{entry}, {entry}]", encoding="utf-8")
        with pytest.raises(DataError, match="duplicate"):
            load_answer_keys(path)


@given(
    st.lists(st.integers(), min_size=2, max_size=60),
    st.floats(min_value=0.05, max_value=0.95),
    st.integers(min_value=0, max_value=2**63),
)
def test_split_partition_property(items, fraction, seed):
    ds = split(items, fraction, seed)
    assert sorted(ds.train + ds.eval) == sorted(items)
    assert len(ds.train) >= 1 and len(ds.eval) >= 1
