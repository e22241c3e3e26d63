from pointqa.text import normalize, pluralize, singularize, tokenize


def test_normalize_collapses_whitespace():
    assert normalize("  Red   Shirt ") == "red shirt"


def test_tokenize_keeps_question_mark():
    assert tokenize("How many trucks are there?") == [
        "how", "many", "trucks", "are", "there", "?",
    ]


def test_singularize_rules_and_irregulars():
    cases = {
        "trucks": "truck",
        "people": "person",
        "men": "man",
        "children": "child",
        "sheep": "sheep",
        "benches": "bench",
        "boxes": "box",
        "ponies": "pony",
        "knives": "knife",
        "glasses": "glasses",
        "bus": "bus",
    }
    for plural, singular in cases.items():
        assert singularize(plural) == singular


def test_pluralize_rules_and_irregulars():
    cases = {
        "truck": "trucks",
        "person": "people",
        "man": "men",
        "child": "children",
        "sheep": "sheep",
        "bench": "benches",
        "box": "boxes",
        "pony": "ponies",
        "bus": "buses",
    }
    for singular, plural in cases.items():
        assert pluralize(singular) == plural


def test_round_trip_common_nouns():
    for noun in ("car", "dog", "sign", "chair", "person", "umbrella", "bench"):
        assert singularize(pluralize(noun)) == noun
