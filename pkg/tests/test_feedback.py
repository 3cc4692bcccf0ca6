"""Comment tables, the structure rule engine and report rendering."""

import json

import pytest

from afg.feedback import (
    COMMENT_TABLE,
    FeedbackRule,
    Question,
    abstract_feedback,
    build_report,
    default_rules,
    fixed_comment,
    load_rules,
    render_report,
    rules_to_json,
)
from afg.ingest import AnswerKey, Submission
from afg.scoring import Verdict, mark_submission, score_numeric, score_reference
from afg.structure import (
    Label3,
    LabeledAbstract,
    LabeledSentence,
    classify_abstract,
    distribution,
    make_fixed_classifier,
)
from afg.textproc import segment_sentences
from conftest import (
    EXAMPLE1_ABSTRACT,
    EXAMPLE1_COMMENTS,
    EXAMPLE1_LABELS,
    EXAMPLE2_ABSTRACT,
    EXAMPLE2_COMMENTS,
    EXAMPLE2_KEY,
    EXAMPLE2_LABELS,
    EXAMPLE2_SUBMISSION,
    oracle_table,
)

B, T, O = Label3.BACKGROUND, Label3.TECHNIQUE, Label3.OBSERVATION


class TestFixedComments:
    def test_correct_impact_factor(self):
        mark = score_numeric(6.005, 6.005)
        assert fixed_comment(Question.IMPACT, mark) == (
            "That is the correct Impact Factor, Well done!"
        )

    def test_incorrect_rsc_reference(self):
        mark = score_reference("alpha beta gamma", "delta epsilon zeta")
        assert fixed_comment(Question.RSC, mark) == (
            "Make sure your Royal Society of Chemistry reference has exactly "
            "the correct format"
        )

    def test_incorrect_citation_appends_values(self):
        mark = score_numeric(10, 42)
        comment = fixed_comment(Question.CITED, mark)
        assert "the correct answer is 42, you gave 10" in comment

    def test_table_total_and_nonempty(self):
        for q in Question:
            for v in Verdict:
                assert COMMENT_TABLE[(q, v)].strip()


def dist_for(labels):
    return distribution(labels)


class TestAbstractFeedback:
    def test_background_heavy_example(self):
        assert abstract_feedback(dist_for(EXAMPLE1_LABELS), EXAMPLE1_LABELS) == (
            EXAMPLE1_COMMENTS
        )

    def test_observation_dominated_example(self):
        assert abstract_feedback(dist_for(EXAMPLE2_LABELS), EXAMPLE2_LABELS) == (
            EXAMPLE2_COMMENTS
        )

    def test_uniform_ordered_gets_two_commendations(self):
        labels = [B, T, O]
        comments = abstract_feedback(dist_for(labels), labels)
        assert len(comments) == 2
        assert "balances" in comments[0]
        assert comments[1] == EXAMPLE2_COMMENTS[2]

    def test_always_at_least_one_comment(self):
        # middling shares that trip none of the default thresholds
        labels = [T, B, O, B, T, O, O, T, B, O]  # shares 0.3/0.3/0.4, not ordered
        comments = abstract_feedback(dist_for(labels), labels)
        assert len(comments) >= 1

    def test_background_rules_mutually_exclusive(self):
        for labels in ([B] * 9 + [T], [T] * 9 + [B], [B, T, O], [O] * 5 + [B, T]):
            comments = abstract_feedback(dist_for(labels), labels)
            praise = any("good amount of detail" in c for c in comments)
            expand = any("expanding the discussion of the background" in c for c in comments)
            assert not (praise and expand)

    def test_technique_variants_mutually_exclusive(self):
        for labels in ([B] * 5 + [T], [B] * 4 + [T], [B, B, B, T]):
            comments = abstract_feedback(dist_for(labels), labels)
            severe = EXAMPLE2_COMMENTS[1] in comments
            mild = EXAMPLE1_COMMENTS[1] in comments
            assert not (severe and mild)

    def test_deterministic(self):
        labels = EXAMPLE2_LABELS
        a = abstract_feedback(dist_for(labels), labels)
        b = abstract_feedback(dist_for(labels), labels)
        assert a == b

    def test_empty_labels_rejected(self):
        with pytest.raises(ValueError):
            abstract_feedback(dist_for([B]), [])


class TestRuleConfig:
    def test_roundtrip_preserves_behavior(self, tmp_path):
        rules = default_rules()
        path = tmp_path / "rules.json"
        path.write_text(rules_to_json(rules), encoding="utf-8")
        loaded = load_rules(path)
        for labels in (EXAMPLE1_LABELS, EXAMPLE2_LABELS, [B, T, O]):
            assert abstract_feedback(dist_for(labels), labels, loaded) == (
                abstract_feedback(dist_for(labels), labels, rules)
            )

    def test_duplicate_ids_rejected(self, tmp_path):
        from afg.errors import ConfigError

        rules = default_rules()[:2]
        doubled = json.loads(rules_to_json(rules + rules))
        path = tmp_path / "rules.json"
        path.write_text(json.dumps(doubled), encoding="utf-8")
        with pytest.raises(ConfigError):
            load_rules(path)

    def test_custom_rule_fires(self):
        rule = FeedbackRule(
            id="obs_praise", cls="observation", comparator="ge", threshold=0.5,
            template="Strong results discussion.", priority=1,
        )
        labels = [O, O, O, B]
        assert abstract_feedback(dist_for(labels), labels, [rule]) == [
            "Strong results discussion."
        ]


def example2_report():
    sub = Submission(**EXAMPLE2_SUBMISSION)
    key = AnswerKey(**EXAMPLE2_KEY)
    sheet = mark_submission(sub, key, lambda text: 0.5)
    sentences = segment_sentences(EXAMPLE2_ABSTRACT)
    oracle = make_fixed_classifier(oracle_table(sentences, EXAMPLE2_LABELS))
    labeled = classify_abstract(EXAMPLE2_ABSTRACT, oracle)
    return build_report(sub.submission_id, sheet, labeled)


class TestRenderReport:
    def test_html_span_counts_for_worked_example(self):
        sentences = segment_sentences(EXAMPLE1_ABSTRACT)
        oracle = make_fixed_classifier(oracle_table(sentences, EXAMPLE1_LABELS))
        labeled = classify_abstract(EXAMPLE1_ABSTRACT, oracle)
        sub = Submission(**EXAMPLE2_SUBMISSION)
        key = AnswerKey(**EXAMPLE2_KEY)
        report = build_report("w1", mark_submission(sub, key, lambda t: 0.5), labeled)
        html = render_report(report, "html")
        # legend adds one span of each color on top of the sentence spans
        assert html.count("background-color:#FFFF00") == 4 + 1
        assert html.count("background-color:#90EE90") == 1 + 1
        assert html.count("background-color:#FFC0CB") == 1 + 1

    def test_terminal_contains_marks_block(self):
        text = render_report(example2_report(), "terminal", color=False)
        assert "Impact Factor: 1 mark" in text
        assert "Reference in RSC format: 1 mark" in text
        assert "Reference in ACS format: 1 mark" in text
        assert (
            "Number of times Cited: 0 marks, the correct answer is 42, you gave 10"
            in text
        )
        assert "Abstract: 3 marks" in text
        assert "Total: 6/10" in text

    def test_terminal_color_uses_ansi(self):
        text = render_report(example2_report(), "terminal", color=True)
        assert "\x1b[43;30m" in text and "\x1b[0m" in text

    def test_no_color_uses_tags(self):
        text = render_report(example2_report(), "terminal", color=False)
        assert "[B] " in text and "[T] " in text and "[O] " in text
        assert "\x1b[" not in text

    def test_one_highlight_per_sentence_in_order(self):
        report = example2_report()
        md = render_report(report, "markdown")
        lines = [l for l in md.splitlines() if l.startswith("- **[")]
        assert len(lines) == len(report.labeled_abstract.sentences)
        tags = [l.split("**")[1] for l in lines]
        expected = {B: "[B]", T: "[T]", O: "[O]"}
        assert tags == [expected[s.label] for s in report.labeled_abstract.sentences]

    def test_markdown_roundtrips_sentence_text(self):
        report = example2_report()
        md = render_report(report, "markdown")
        for s in report.labeled_abstract.sentences:
            assert s.text in md

    def test_comments_in_report(self):
        report = example2_report()
        for fmt in ("terminal", "markdown"):
            out = render_report(report, fmt, color=False)
            for comment in EXAMPLE2_COMMENTS:
                assert comment in out

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            render_report(example2_report(), "pdf")

    def test_render_is_deterministic(self):
        a = render_report(example2_report(), "html")
        b = render_report(example2_report(), "html")
        assert a == b

    def test_report_json_structure(self):
        data = example2_report().to_json_dict()
        assert data["submission_id"] == "ex2"
        assert len(data["question_comments"]) == 4
        assert data["marks"]["abstract_mark"] == 3
        assert [s["label"] for s in data["labeled_abstract"]] == [
            l.name for l in EXAMPLE2_LABELS
        ]
