from dataclasses import dataclass

import pytest

from dash import command_lang as L


@dataclass
class Seen:
    track_id: str
    shape: str
    color: str
    position: tuple
    height: float = 0.15


def frame_of(text):
    return L.search_ast(L.parse_command(text))


# 30-sentence corpus covering every relation, descriptor combination, and
# clause form; expected (target shape, target color, relation,
# reference shape, reference color, clause relation or None)
CORPUS = [
    ("put the red cylinder on top of the blue box",
     ("cylinder", "red", "on_top_of", "box", "blue", None)),
    ("stack the box that is left of the green sphere on the yellow cylinder",
     ("box", None, "on_top_of", "cylinder", "yellow", "left_of")),
    ("place the blue box on the red cylinder",
     ("box", "blue", "on_top_of", "cylinder", "red", None)),
    ("stack the green box onto the yellow box",
     ("box", "green", "on_top_of", "box", "yellow", None)),
    ("move the yellow sphere onto the green box",
     ("sphere", "yellow", "on_top_of", "box", "green", None)),
    ("put the red box atop the blue cylinder",
     ("box", "red", "on_top_of", "cylinder", "blue", None)),
    ("place the green cylinder to the left of the red box",
     ("cylinder", "green", "left_of", "box", "red", None)),
    ("put the blue sphere left of the yellow cylinder",
     ("sphere", "blue", "left_of", "cylinder", "yellow", None)),
    ("move the red box to the right of the green cylinder",
     ("box", "red", "right_of", "cylinder", "green", None)),
    ("place the yellow box right of the blue sphere",
     ("box", "yellow", "right_of", "sphere", "blue", None)),
    ("put the green sphere in front of the red cylinder",
     ("sphere", "green", "in_front_of", "cylinder", "red", None)),
    ("move the blue cylinder behind the yellow box",
     ("cylinder", "blue", "behind", "box", "yellow", None)),
    ("set the red sphere behind the green box",
     ("sphere", "red", "behind", "box", "green", None)),
    ("put the cylinder on the box",
     ("cylinder", None, "on_top_of", "box", None, None)),
    ("stack the red one-word cube on the blue block".replace(" one-word", ""),
     ("box", "red", "on_top_of", "box", "blue", None)),
    ("put the ball on the green box",
     ("sphere", None, "on_top_of", "box", "green", None)),
    ("place the yellow cylinder at ( 0.1 , 0.2 , 0.0 )",
     ("cylinder", "yellow", "at_location", None, None, None)),
    ("move the red box at location 0.0 0.3",
     ("box", "red", "at_location", None, None, None)),
    ("put the blue box at (0.2, 0.4)",
     ("box", "blue", "at_location", None, None, None)),
    ("stack the box which is right of the red sphere on the green cylinder",
     ("box", None, "on_top_of", "cylinder", "green", "right_of")),
    ("put the cylinder that is behind the blue box on the red box",
     ("cylinder", None, "on_top_of", "box", "red", "behind")),
    ("place the sphere that is in front of the yellow cylinder on the blue box",
     ("sphere", None, "on_top_of", "box", "blue", "in_front_of")),
    ("move the green box that is left of the red cylinder behind the yellow sphere",
     ("box", "green", "behind", "sphere", "yellow", "left_of")),
    ("put the red cube on top of the green cylinder",
     ("box", "red", "on_top_of", "cylinder", "green", None)),
    ("stack the blue block on the yellow box",
     ("box", "blue", "on_top_of", "box", "yellow", None)),
    ("place the green ball in front of the blue box",
     ("sphere", "green", "in_front_of", "box", "blue", None)),
    ("put the yellow box on top of the box that is right of the blue sphere",
     ("box", "yellow", "on_top_of", "box", None, "right_of")),
    ("move the red cylinder to the left of the cylinder that is behind the green box",
     ("cylinder", "red", "left_of", "cylinder", None, "behind")),
    ("set the blue cylinder at (0.05, 0.45, 0.0)",
     ("cylinder", "blue", "at_location", None, None, None)),
    ("place a green box on a red cylinder",
     ("box", "green", "on_top_of", "cylinder", "red", None)),
]


def test_corpus_has_30_sentences():
    assert len(CORPUS) == 30


@pytest.mark.parametrize("text,expected", CORPUS)
def test_corpus_parses_exactly(text, expected):
    t_shape, t_color, relation, r_shape, r_color, clause_rel = expected
    frame = frame_of(text)
    assert frame.target.shape == t_shape
    assert frame.target.color == t_color
    assert frame.relation == relation
    if relation == "at_location":
        assert frame.location is not None and len(frame.location) == 3
        assert frame.reference is None
    else:
        assert frame.reference.shape == r_shape
        assert frame.reference.color == r_color
    assert frame.clause_relation == clause_rel


def test_example_hand_parse():
    frame = frame_of("put the red cylinder on top of the blue box")
    assert (frame.target.color, frame.target.shape) == ("red", "cylinder")
    assert frame.relation == "on_top_of"
    assert (frame.reference.color, frame.reference.shape) == ("blue", "box")


def test_clause_example_hand_parse():
    frame = frame_of("stack the box that is left of the green sphere on the yellow cylinder")
    assert frame.target.shape == "box" and frame.target.color is None
    assert frame.clause_relation == "left_of"
    assert (frame.clause_reference.color, frame.clause_reference.shape) == ("green", "sphere")
    assert frame.relation == "on_top_of"
    assert (frame.reference.color, frame.reference.shape) == ("yellow", "cylinder")


def test_empty_input_fails_at_zero():
    with pytest.raises(L.ParseFailure) as e:
        L.parse_command("")
    assert e.value.position == 0


def test_unknown_word_is_parse_failure():
    with pytest.raises(L.ParseFailure):
        L.parse_command("put the purple dinosaur on the blue box")


def test_out_of_subset_sentence():
    with pytest.raises(L.ParseFailure):
        L.parse_command("how are you today")


def test_missing_relation_is_missing_role():
    # grammatically we fail at parse; build a relation-free tree manually
    ast = L.Node("command", children=[
        L.Node("verb"),
        L.Node("np", children=[L.Node("word", value="box")]),
    ])
    with pytest.raises(L.MissingRole) as e:
        L.search_ast(ast)
    assert e.value.role == "relation"


def test_two_relations_first_in_bfs_wins():
    ast = L.Node("command", children=[
        L.Node("verb"),
        L.Node("np", children=[L.Node("word", value="box")]),
        L.Node("relation", value="left_of"),
        L.Node("relation", value="behind"),
        L.Node("np", children=[L.Node("word", value="cylinder")]),
    ])
    with pytest.warns(UserWarning, match="first in BFS order"):
        frame = L.search_ast(ast)
    assert frame.relation == "left_of"


SCENE = [
    Seen("a", "cylinder", "red", (0.0, 0.1, 0.075)),
    Seen("b", "box", "blue", (0.2, 0.3, 0.08), height=0.16),
    Seen("c", "sphere", "green", (0.1, 0.45, 0.05)),
]


def test_unique_match_grounds():
    spec = L.parse_and_ground("put the red cylinder on top of the blue box", SCENE)
    assert spec.target_id == "a"
    assert spec.kind == "stack"
    assert spec.bottom_id == "b"
    assert spec.p_initial == (0.0, 0.1, 0.075)
    # destination is the bottom object's top center
    assert spec.p_destination == pytest.approx((0.2, 0.3, 0.16))


def test_two_blue_boxes_clause_disambiguates():
    seen = SCENE + [Seen("d", "box", "blue", (0.02, 0.44, 0.08), height=0.16)]
    spec = L.parse_and_ground(
        "put the box that is left of the green sphere on top of the red cylinder", seen)
    # d has smaller x than the sphere; b does not
    assert spec.target_id == "d"


def test_two_blue_boxes_no_clause_is_ambiguous():
    seen = SCENE + [Seen("d", "box", "blue", (0.02, 0.44, 0.08), height=0.16)]
    with pytest.raises(L.AmbiguousCommand) as e:
        L.parse_and_ground("put the blue box on top of the red cylinder", seen)
    assert set(e.value.candidate_ids) == {"b", "d"}


def test_no_match_is_unresolved():
    with pytest.raises(L.UnresolvedReference):
        L.parse_and_ground("put the yellow box on the red cylinder", SCENE)


def test_grounding_invariant_under_permutation():
    seen = SCENE + [Seen("d", "box", "blue", (0.02, 0.44, 0.08), height=0.16)]
    import itertools
    ids = set()
    for perm in itertools.permutations(seen):
        spec = L.parse_and_ground(
            "put the box that is left of the green sphere on the red cylinder", list(perm))
        ids.add(spec.target_id)
    assert ids == {"d"}


def test_directional_destination_offset():
    spec = L.parse_and_ground("place the red cylinder to the left of the blue box", SCENE)
    assert spec.kind == "place"
    assert spec.p_destination == pytest.approx((0.2 - 0.15, 0.3, 0.0))


def test_at_location_destination():
    spec = L.parse_and_ground("place the red cylinder at (0.1, 0.2, 0.0)", SCENE)
    assert spec.p_destination == (0.1, 0.2, 0.0)
    assert spec.kind == "place"


def test_workspace_bounds_enforced():
    with pytest.raises(L.GroundingError):
        L.parse_and_ground("place the red cylinder at (5.0, 0.2, 0.0)", SCENE)


def test_split_sentences():
    parts = L.split_sentences(
        "put the red box on the blue box. then place the green sphere at (0.1, 0.2)")
    assert len(parts) == 2
