import pytest
from hypothesis import given, strategies as st

from evidentia.normalize import tokenize
from evidentia.question import (
    Choice,
    QuestionType,
    RelationHint,
    build_question,
    detect_question_type,
    extract_entities,
    infer_relations,
    remove_stopwords,
)


class TestTokenize:
    def test_question_stem(self):
        assert tokenize("Where might he look?") == ["where", "might", "he", "look"]

    def test_empty(self):
        assert tokenize("") == []

    def test_split_on_non_alphanumeric(self):
        assert tokenize("U.S.-based") == ["u", "s", "based"]

    @given(st.text(max_size=60))
    def test_tokens_are_lowercase_alnum(self, text):
        for tok in tokenize(text):
            assert tok == tok.lower()
            assert tok.isalnum()


class TestStopwords:
    def test_filters_question_words(self):
        assert remove_stopwords(["where", "might", "he", "look"]) == ["look"]

    def test_empty(self):
        assert remove_stopwords([]) == []

    def test_content_word_passes(self):
        assert remove_stopwords(["farmland"]) == ["farmland"]

    def test_order_preserving(self):
        assert remove_stopwords(["buy", "the", "farmland", "a", "place"]) == \
            ["buy", "farmland", "place"]


def make_q(stem, concept="farmland"):
    return build_question("q1", stem, concept, [Choice("A", "midwest")])


class TestExtractEntities:
    STEM = "James was looking for a good place to buy farmland. Where might he look?"

    def test_concept_first_then_matches(self):
        q = make_q(self.STEM)
        assert extract_entities(q, {"farmland", "place", "buy_house"}) == ["farmland", "place"]

    def test_empty_vocab_returns_concept(self):
        q = make_q(self.STEM)
        assert extract_entities(q, set()) == ["farmland"]

    def test_longest_match_precedence(self):
        q = make_q("The real estate market.", concept="market")
        assert extract_entities(q, {"real_estate", "estate"}) == ["market", "real_estate"]

    def test_no_overlapping_spans(self):
        q = make_q("buy house now", concept="now")
        # "buy_house" consumes both tokens, so "house" alone cannot also match.
        assert extract_entities(q, {"buy_house", "house", "now"}) == ["now", "buy_house"]

    def test_output_subset_of_vocab_plus_concept(self):
        vocab = {"farmland", "place"}
        q = make_q(self.STEM, concept="unknown_thing")
        out = extract_entities(q, vocab)
        assert set(out) <= vocab | {"unknown_thing"}


class TestQuestionType:
    def test_where(self):
        assert detect_question_type("Where might he look?") is QuestionType.WHERE

    def test_other(self):
        assert detect_question_type("Name a place.") is QuestionType.OTHER

    def test_earliest_trigger_wins(self):
        assert detect_question_type("What happens where people gather?") is QuestionType.WHAT

    def test_total_function(self):
        for stem in ["", "???", "How and why?", "when When WHEN"]:
            assert isinstance(detect_question_type(stem), QuestionType)

    def test_single_trigger_fixture_counts(self):
        fixture = {
            QuestionType.HOW: ["How is it done?", "How far is it?"],
            QuestionType.WHAT: ["What is that?"],
            QuestionType.WHERE: ["Where to go?", "Tell me where it is.", "Somewhere... where?"],
            QuestionType.WHY: ["Why bother?"],
            QuestionType.WHEN: ["When do we leave?"],
            QuestionType.OTHER: ["Name a place.", "Pick one."],
        }
        counts = {t: 0 for t in QuestionType}
        for stems in fixture.values():
            for stem in stems:
                counts[detect_question_type(stem)] += 1
        assert counts == {t: len(stems) for t, stems in fixture.items()}


class TestInferRelations:
    def test_where_defaults(self):
        assert infer_relations(QuestionType.WHERE).relations == ("AtLocation", "LocatedNear")

    def test_what_starts_with_isa(self):
        assert infer_relations(QuestionType.WHAT).relations[0] == "IsA"

    def test_other_means_no_narrowing(self):
        assert infer_relations(QuestionType.OTHER).relations == ()

    def test_custom_mapping(self):
        mapping = {t: RelationHint() for t in QuestionType}
        mapping[QuestionType.WHY] = RelationHint(("Causes",))
        assert infer_relations(QuestionType.WHY, mapping).relations == ("Causes",)

    def test_duplicate_relations_rejected(self):
        with pytest.raises(ValueError):
            RelationHint(("IsA", "IsA"))


class TestBuildQuestion:
    def test_tokens_and_normalized_concept(self):
        q = build_question("q", "Buy Farmland Now", "Farm Land", [Choice("A", "x")])
        assert q.stem_tokens == tokenize(q.stem)
        assert q.question_concept == "farm_land"

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError):
            build_question("q", "s", "c", [Choice("A", "x"), Choice("A", "y")])

    def test_empty_choices_rejected(self):
        with pytest.raises(ValueError):
            build_question("q", "s", "c", [])
