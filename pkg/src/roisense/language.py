"""Prompt parsing, anchor grounding and ROI construction from a spatial direction."""
from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum
from importlib import resources

from .errors import AnchorNotVisible, EmptyRoi, NoAnchorFound, NoDirectionFound, UnknownObject
from .scene import Scene
from .sensing import RoiBox


class Direction(str, Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"
    BEHIND = "BEHIND"
    FRONT = "FRONT"


SYNONYMS = {
    "left": Direction.LEFT,
    "right": Direction.RIGHT,
    "behind": Direction.BEHIND,
    "back": Direction.BEHIND,
    "rear": Direction.BEHIND,
    "front": Direction.FRONT,
    "before": Direction.FRONT,
    "ahead": Direction.FRONT,
}

PREPOSITIONS = {"of", "behind", "before", "beside", "near", "at", "past", "beyond", "from"}
DETERMINERS = {"the", "a", "an", "this", "that", "these", "those", "my", "your", "its"}
# tokens that end a noun phrase
STOPWORDS = {"please", "and", "then", "now", "thanks", "for", "me", "is", "are"}


@dataclass(frozen=True)
class PromptParse:
    anchor_tokens: tuple[str, ...]
    direction: Direction

    def __post_init__(self):
        if not self.anchor_tokens:
            raise NoAnchorFound("empty anchor description")
        object.__setattr__(self, "anchor_tokens", tuple(self.anchor_tokens))


def tokenize(text: str) -> list[str]:
    table = str.maketrans({c: " " for c in string.punctuation})
    return text.lower().translate(table).split()


def parse_prompt(text: str) -> PromptParse:
    """Extract the spatial direction and the anchor noun phrase of a request."""
    tokens = tokenize(text or "")
    if not tokens:
        raise NoAnchorFound("empty prompt")
    direction = next((SYNONYMS[t] for t in tokens if t in SYNONYMS), None)
    if direction is None:
        raise NoDirectionFound(f"no supported direction word in {text!r}")
    preps = [i for i, t in enumerate(tokens) if t in PREPOSITIONS]
    if not preps:
        raise NoAnchorFound(f"no preposition introducing an anchor in {text!r}")
    anchor = []
    for t in tokens[preps[-1] + 1:]:
        if t in STOPWORDS or t in PREPOSITIONS:
            break
        if t in DETERMINERS:
            continue
        anchor.append(t)
    if not anchor:
        raise NoAnchorFound(f"no anchor noun phrase in {text!r}")
    return PromptParse(tuple(anchor), direction)


def resolve_anchor(parse: PromptParse, scene: Scene) -> int:
    """Observed object whose labels overlap the anchor tokens most; ties go to the smaller id."""
    tokens = set(parse.anchor_tokens)
    best, best_overlap = None, 0
    for oid in scene.observed_ids():
        overlap = len(tokens & scene.objects[oid].labels)
        if overlap > best_overlap:
            best, best_overlap = oid, overlap
    if best is None:
        raise AnchorNotVisible(f"no observed object matches {' '.join(parse.anchor_tokens)!r}")
    return best


def build_roi(scene: Scene, anchor: int, direction: Direction | str) -> RoiBox:
    """Slab from the anchor's bounding-box face on the ``direction`` side to the grid boundary."""
    if anchor not in scene.objects:
        raise UnknownObject(anchor)
    direction = Direction(direction)
    obj = scene.objects[anchor]
    lo, hi = obj.bbox()
    nx, ny, nz = scene.spec.dims
    x0, x1, y0, y1, z0, z1 = 0, nx - 1, 0, ny - 1, 0, nz - 1
    if direction is Direction.LEFT:
        x1 = int(lo[0]) - 1
    elif direction is Direction.RIGHT:
        x0 = int(hi[0]) + 1
    elif direction is Direction.FRONT:
        y1 = int(lo[1]) - 1
    else:
        y0 = int(hi[1]) + 1
    if x1 < x0 or y1 < y0:
        raise EmptyRoi(f"anchor {anchor} touches the grid boundary on the {direction.value} side")
    return RoiBox(x0, x1, y0, y1, z0, z1)


def roi_from_prompt(scene: Scene, text: str) -> tuple[PromptParse, int, RoiBox]:
    parse = parse_prompt(text)
    anchor = resolve_anchor(parse, scene)
    return parse, anchor, build_roi(scene, anchor, parse.direction)


PHRASES = {
    Direction.LEFT: "to the left of",
    Direction.RIGHT: "to the right of",
    Direction.BEHIND: "behind",
    Direction.FRONT: "in front of",
}


def make_prompt(scene: Scene, anchor: int, direction: Direction) -> str:
    obj = scene.objects[anchor]
    return f"Show me {PHRASES[Direction(direction)]} the {obj.color_label} {obj.shape_label}"


def visible_anchor_choices(scene: Scene) -> list[int]:
    """Observed objects whose (color, shape) labels are unique among observed objects."""
    ids = scene.observed_ids()
    labels = [(scene.objects[i].color_label, scene.objects[i].shape_label) for i in ids]
    return [i for i, lab in zip(ids, labels) if labels.count(lab) == 1]


def load_prompt_corpus(path=None) -> list[tuple[str, PromptParse]]:
    """Read ``prompt<TAB>DIRECTION<TAB>anchor tokens`` lines; ``#`` starts a comment."""
    if path is None:
        text = resources.files("roisense.data").joinpath("prompts.tsv").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    out = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        prompt, direction, anchor = line.split("\t")
        out.append((prompt, PromptParse(tuple(anchor.split()), Direction(direction.strip()))))
    return out
