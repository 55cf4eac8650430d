"""Command parsing and grounding for the grasp-and-stack command subset.

Two-step structure: a recursive-descent parser builds a parse tree from the
lexed sentence, then a breadth-first search over that tree extracts the
target / relation / reference roles against a fixed keyword dictionary.
Grounding cross-references the extracted frame with perceived objects and
resolves remaining ambiguity through the modifier clause.
"""

import re
import warnings
from dataclasses import dataclass, field

import numpy as np

VERBS = {"put", "place", "stack", "move", "set"}
ARTICLES = {"the", "a", "an"}

SHAPE_WORDS = {
    "box": "box", "cube": "box", "block": "box",
    "cylinder": "cylinder", "can": "cylinder",
    "sphere": "sphere", "ball": "sphere",
}
COLOR_WORDS = {"red": "red", "yellow": "yellow", "green": "green", "blue": "blue"}

# multiword relation phrases, longest-match-first
RELATION_PHRASES = [
    (("on", "top", "of"), "on_top_of"),
    (("to", "the", "left", "of"), "left_of"),
    (("to", "the", "right", "of"), "right_of"),
    (("in", "front", "of"), "in_front_of"),
    (("left", "of"), "left_of"),
    (("right", "of"), "right_of"),
    (("onto",), "on_top_of"),
    (("atop",), "on_top_of"),
    (("on",), "on_top_of"),
    (("behind",), "behind"),
    (("at",), "at_location"),
]

CLAUSE_OPENERS = ({"that", "is"}, {"which", "is"}, {"that's"})

# lateral offset for directional placement relative to a reference object
SIDE_OFFSET = 0.15

DEFAULT_WORKSPACE = ((-0.525, 0.675), (-0.2, 0.6))


class ParseFailure(Exception):
    def __init__(self, position: int, expected):
        self.position = position
        self.expected = sorted(expected) if not isinstance(expected, str) else [expected]
        super().__init__(f"parse failure at position {position}: expected {', '.join(self.expected)}")


class MissingRole(Exception):
    def __init__(self, role: str):
        self.role = role
        super().__init__(f"command is missing a {role}")


class AmbiguousCommand(Exception):
    def __init__(self, candidate_ids):
        self.candidate_ids = list(candidate_ids)
        super().__init__(f"ambiguous command; candidates: {', '.join(map(str, candidate_ids))}")


class UnresolvedReference(Exception):
    pass


class GroundingError(Exception):
    pass


@dataclass
class Token:
    text: str
    position: int  # character offset in the input


@dataclass
class Node:
    """Generic parse-tree node; the BFS role extraction walks these."""

    label: str  # command | verb | np | relation | location | clause | word
    token: Token = None
    value: object = None
    children: list = field(default_factory=list)


@dataclass
class ObjectDescriptor:
    shape: str = None
    color: str = None

    def matches(self, shape: str, color: str) -> bool:
        return (self.shape is None or self.shape == shape) and \
            (self.color is None or self.color == color)


@dataclass
class Frame:
    """Normalized roles extracted from the parse tree."""

    target: ObjectDescriptor
    relation: str
    reference: ObjectDescriptor = None
    location: tuple = None
    clause_relation: str = None
    clause_reference: ObjectDescriptor = None


@dataclass
class TaskSpec:
    target_id: object
    p_initial: tuple
    p_destination: tuple
    kind: str  # place | stack
    bottom_id: object = None


CommandAst = Node  # the AST is the parse tree itself


def _lex(text: str):
    tokens = []
    for m in re.finditer(r"[A-Za-z']+|-?\d+(?:\.\d+)?|[(),]", text):
        tokens.append(Token(m.group(0).lower(), m.start()))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _lex(text)
        self.i = 0

    def peek(self, k=0):
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else None

    def fail(self, expected):
        pos = self.peek().position if self.peek() else len(self.text)
        raise ParseFailure(pos, expected)

    def eat(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def try_relation(self):
        for phrase, rel in RELATION_PHRASES:
            if all(self.peek(k) and self.peek(k).text == w for k, w in enumerate(phrase)):
                tok = self.peek()
                for _ in phrase:
                    self.eat()
                return Node("relation", token=tok, value=rel)
        return None

    def parse_location(self):
        tok = self.peek()
        coords = []
        if tok and tok.text == "location":
            self.eat()
        if self.peek() and self.peek().text == "(":
            self.eat()
        while self.peek() and re.fullmatch(r"-?\d+(?:\.\d+)?", self.peek().text):
            coords.append(float(self.eat().text))
            if self.peek() and self.peek().text == ",":
                self.eat()
        if self.peek() and self.peek().text == ")":
            self.eat()
        if len(coords) not in (2, 3):
            self.fail({"two or three coordinates"})
        if len(coords) == 2:
            coords.append(0.0)
        return Node("location", token=tok, value=tuple(coords))

    def parse_np(self, allow_clause=True):
        words = []
        if self.peek() and self.peek().text in ARTICLES:
            self.eat()
        saw_descriptor = False
        while self.peek():
            t = self.peek().text
            if t in COLOR_WORDS or t in SHAPE_WORDS:
                tok = self.eat()
                words.append(Node("word", token=tok, value=tok.text))
                saw_descriptor = True
            else:
                break
        if not saw_descriptor:
            self.fail(set(COLOR_WORDS) | set(SHAPE_WORDS))
        node = Node("np", children=words)
        if allow_clause and self._at_clause_opener():
            node.children.append(self.parse_clause())
        return node

    def _at_clause_opener(self):
        t = self.peek()
        if t is None:
            return False
        if t.text == "that's":
            return True
        if t.text in ("that", "which"):
            nxt = self.peek(1)
            return nxt is not None and nxt.text == "is"
        return False

    def parse_clause(self):
        opener = self.eat()
        if opener.text in ("that", "which"):
            self.eat()  # "is"
        rel = self.try_relation()
        if rel is None:
            self.fail({p[1] for p in RELATION_PHRASES})
        if rel.value == "at_location":
            inner = self.parse_location()
        else:
            inner = self.parse_np(allow_clause=False)
        return Node("clause", children=[rel, inner])

    def parse_command(self):
        tok = self.peek()
        if tok is None:
            raise ParseFailure(0, VERBS)
        if tok.text not in VERBS:
            self.fail(VERBS)
        verb = Node("verb", token=self.eat())
        target = self.parse_np()
        rel = self.try_relation()
        if rel is None:
            self.fail({p[1] for p in RELATION_PHRASES})
        if rel.value == "at_location":
            obj = self.parse_location()
        else:
            obj = self.parse_np()
        if self.peek() is not None:
            self.fail({"end of command"})
        return Node("command", children=[verb, target, rel, obj])


def split_sentences(text: str):
    """Multi-sentence commands are executed as independent tasks, in order."""
    parts = re.split(r"(?:(?<!\d)\.(?!\d)|;|\bthen\b)", text)
    return [p.strip() for p in parts if p.strip()]


def parse_command(text: str) -> CommandAst:
    if not text or not text.strip():
        raise ParseFailure(0, VERBS)
    return _Parser(text).parse_command()


def _descriptor_from_np(np_node: Node) -> ObjectDescriptor:
    desc = ObjectDescriptor()
    for child in np_node.children:
        if child.label != "word":
            continue
        if child.value in COLOR_WORDS:
            desc.color = COLOR_WORDS[child.value]
        elif child.value in SHAPE_WORDS:
            desc.shape = SHAPE_WORDS[child.value]
    return desc


def search_ast(ast: CommandAst) -> Frame:
    """Breadth-first traversal extracting target, relation, and reference
    against the keyword dictionary; the first relation in BFS order wins."""
    queue = [ast]
    nps = []
    relations = []
    locations = []
    clauses = []
    while queue:
        node = queue.pop(0)
        if node.label == "np":
            nps.append(node)
        elif node.label == "relation":
            relations.append(node)
        elif node.label == "location":
            locations.append(node)
        elif node.label == "clause":
            clauses.append(node)
        queue.extend(node.children)
    # exclude relation/location/np nodes living inside clauses: those fill
    # the clause roles, not the primary ones
    clause_members = set()
    for cl in clauses:
        stack = list(cl.children)
        while stack:
            n = stack.pop()
            clause_members.add(id(n))
            stack.extend(n.children)
    primary_nps = [n for n in nps if id(n) not in clause_members]
    primary_rels = [n for n in relations if id(n) not in clause_members]
    primary_locs = [n for n in locations if id(n) not in clause_members]

    if not primary_nps:
        raise MissingRole("target")
    if not primary_rels:
        raise MissingRole("relation")
    if len(primary_rels) > 1:
        warnings.warn("multiple relations in command; first in BFS order wins")
    relation = primary_rels[0].value

    target = _descriptor_from_np(primary_nps[0])
    frame = Frame(target=target, relation=relation)
    if relation == "at_location":
        if not primary_locs:
            raise MissingRole("reference")
        frame.location = primary_locs[0].value
    else:
        if len(primary_nps) < 2:
            raise MissingRole("reference")
        frame.reference = _descriptor_from_np(primary_nps[1])
    # the first clause (BFS order) disambiguates the target
    if clauses:
        rel_node = clauses[0].children[0]
        inner = clauses[0].children[1]
        frame.clause_relation = rel_node.value
        if inner.label == "location":
            frame.clause_reference = None
        else:
            frame.clause_reference = _descriptor_from_np(inner)
    return frame


def _obj_id(obj):
    return getattr(obj, "track_id", None) or getattr(obj, "id")


def _relation_holds(relation: str, candidate_pos, reference_pos) -> bool:
    """Spatial relation on table axes: +x is the agent's right, +y is away
    from the agent (so 'in front of' means smaller y)."""
    cx, cy = candidate_pos[0], candidate_pos[1]
    rx, ry = reference_pos[0], reference_pos[1]
    if relation == "left_of":
        return cx < rx
    if relation == "right_of":
        return cx > rx
    if relation == "in_front_of":
        return cy < ry
    if relation == "behind":
        return cy > ry
    if relation == "on_top_of":
        return np.hypot(cx - rx, cy - ry) < 0.05 and candidate_pos[2] > reference_pos[2]
    return False


def _match(desc: ObjectDescriptor, perceived):
    return [o for o in perceived if desc.matches(o.shape, o.color)]


def _resolve(desc: ObjectDescriptor, perceived, clause_relation=None,
             clause_reference=None, role="target"):
    candidates = _match(desc, perceived)
    if len(candidates) > 1 and clause_relation and clause_reference is not None:
        refs = _match(clause_reference, perceived)
        if len(refs) != 1:
            raise AmbiguousCommand([_obj_id(o) for o in candidates])
        ref = refs[0]
        candidates = [
            c for c in candidates
            if _obj_id(c) != _obj_id(ref)
            and _relation_holds(clause_relation, np.asarray(c.position), np.asarray(ref.position))
        ]
    if not candidates:
        raise UnresolvedReference(f"no perceived object matches the {role} description")
    if len(candidates) > 1:
        raise AmbiguousCommand(sorted(_obj_id(o) for o in candidates))
    return candidates[0]


def ground(frame: Frame, perceived, workspace=DEFAULT_WORKSPACE) -> TaskSpec:
    """Cross-reference the frame against perceived objects into a TaskSpec."""
    target = _resolve(frame.target, perceived, frame.clause_relation,
                      frame.clause_reference, role="target")
    p_i = tuple(float(v) for v in target.position)

    if frame.relation == "at_location":
        dest = tuple(float(v) for v in frame.location)
        kind, bottom_id = "place", None
    else:
        others = [o for o in perceived if _obj_id(o) != _obj_id(target)]
        ref = _resolve(frame.reference, others, role="reference")
        rp = np.asarray(ref.position, dtype=float)
        if frame.relation == "on_top_of":
            dest = (float(rp[0]), float(rp[1]), float(rp[2] + ref.height / 2.0))
            kind, bottom_id = "stack", _obj_id(ref)
        else:
            offset = {
                "left_of": (-SIDE_OFFSET, 0.0),
                "right_of": (SIDE_OFFSET, 0.0),
                "in_front_of": (0.0, -SIDE_OFFSET),
                "behind": (0.0, SIDE_OFFSET),
            }[frame.relation]
            dest = (float(rp[0] + offset[0]), float(rp[1] + offset[1]), 0.0)
            kind, bottom_id = "place", None

    (x0, x1), (y0, y1) = workspace
    for name, p in (("initial position", p_i), ("destination", dest)):
        if not (x0 <= p[0] <= x1 and y0 <= p[1] <= y1):
            raise GroundingError(f"{name} {p} outside workspace bounds")
    return TaskSpec(target_id=_obj_id(target), p_initial=p_i,
                    p_destination=dest, kind=kind, bottom_id=bottom_id)


def parse_and_ground(text: str, perceived, workspace=DEFAULT_WORKSPACE) -> TaskSpec:
    return ground(search_ast(parse_command(text)), perceived, workspace)
