"""Synthetic toy world: abstract images of colored objects with known
ground truth, plus matching region-proposal features.

Two layouts cover the benchmark tasks at desk scale:

* nested (``actions`` non-empty): each figure is a large container object
  (e.g. a person with an action attribute) with a smaller color-attributed
  object centered inside it.  A point near the center lands in both boxes,
  so the model has to pick the relevant one from the question.
* flat (``actions`` empty): disjoint objects with per-image class counts,
  plus human-style counting questions, for the look-twice task and the
  comparative questions.

Feature vectors are noisy one-hot blocks (class, color, action) plus the
five normalized geometry values, so everything the oracle knows is in
principle decodable from the features.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from io import BytesIO

import numpy as np

from .builders.base import EVAL_SPLITS, PointQAInstance, assign_splits, per_image_rng
from .errors import ConfigurationError
from .features import FeatureStore, ProposalSet, geometry_features
from .geometry import BoundingBox, Point, center_point, contains
from .scene_graph import AnnotationStore, ImageAnnotation, ObjectAnnotation, SourceQA
from .text import pluralize, singularize, tokenize


@dataclass
class SynthWorldConfig:
    num_images: int = 200
    classes: tuple[str, ...] = ("shirt",)
    colors: tuple[str, ...] = ("red", "blue", "green", "yellow")
    actions: tuple[str, ...] = ()
    container_class: str = "person"
    objects_per_image: tuple[int, int] = (2, 3)  # figures (nested mode)
    classes_per_image: tuple[int, int] = (2, 3)  # flat mode
    counts_per_class: tuple[int, int] = (1, 4)  # flat mode
    canvas: tuple[int, int] = (256, 256)
    feature_dim: int = 32
    proposals_per_image: int = 24
    jitter_per_object: int = 1
    noise: float = 0.02
    seed: int = 0

    @property
    def nested(self) -> bool:
        return len(self.actions) > 0

    def class_list(self) -> tuple[str, ...]:
        return self.classes + ((self.container_class,) if self.nested else ())

    def blocks_dim(self) -> int:
        return len(self.class_list()) + len(self.colors) + len(self.actions) + 5

    def validate(self) -> None:
        if not self.classes or not self.colors:
            raise ConfigurationError("class and color vocabularies must be non-empty")
        if self.feature_dim < 8:
            raise ConfigurationError("feature_dim must be >= 8")
        if self.feature_dim < self.blocks_dim():
            raise ConfigurationError(
                f"feature_dim {self.feature_dim} too small for one-hot blocks "
                f"({self.blocks_dim()} needed)"
            )
        if self.nested:
            max_figs = self.objects_per_image[1]
            if max_figs > min(len(self.colors), len(self.actions)):
                raise ConfigurationError(
                    "nested mode needs enough colors/actions for distinct figures"
                )
            max_real = 2 * max_figs * (1 + self.jitter_per_object)
        else:
            max_real = (
                self.classes_per_image[1]
                * self.counts_per_class[1]
                * (1 + self.jitter_per_object)
            )
        if self.proposals_per_image < max_real + 1:
            raise ConfigurationError(
                f"proposals_per_image {self.proposals_per_image} cannot hold "
                f"{max_real} object proposals plus one spurious box"
            )

    def to_dict(self) -> dict:
        return {
            "num_images": self.num_images,
            "classes": list(self.classes),
            "colors": list(self.colors),
            "actions": list(self.actions),
            "container_class": self.container_class,
            "objects_per_image": list(self.objects_per_image),
            "classes_per_image": list(self.classes_per_image),
            "counts_per_class": list(self.counts_per_class),
            "canvas": list(self.canvas),
            "feature_dim": self.feature_dim,
            "proposals_per_image": self.proposals_per_image,
            "jitter_per_object": self.jitter_per_object,
            "noise": self.noise,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthWorldConfig":
        kwargs = {}
        for key in cls.__dataclass_fields__:
            if key in d:
                value = d[key]
                if isinstance(value, list):
                    value = tuple(value)
                kwargs[key] = value
        return cls(**kwargs)


@dataclass
class SynthWorld:
    config: SynthWorldConfig
    annotations: AnnotationStore
    features: FeatureStore
    oracle: "SynthOracle"


def _grid_cells(width: int, height: int, n: int, rng: random.Random) -> list[tuple[int, int, int, int]]:
    """n disjoint cells of a shuffled uniform grid."""
    side = 1
    while side * side < n:
        side += 1
    cw, ch = width // side, height // side
    cells = [(c * cw, r * ch, cw, ch) for r in range(side) for c in range(side)]
    rng.shuffle(cells)
    return cells[:n]


def _box_in_cell(cell: tuple[int, int, int, int], scale: float, rng: random.Random) -> BoundingBox:
    cx, cy, cw, ch = cell
    w = max(4, int(cw * scale))
    h = max(4, int(ch * scale))
    x = cx + rng.randrange(max(1, cw - w))
    y = cy + rng.randrange(max(1, ch - h))
    return BoundingBox(x, y, w, h)


def _centered_box(outer: BoundingBox, scale: float) -> BoundingBox:
    w = max(2, int(outer.w * scale))
    h = max(2, int(outer.h * scale))
    x = int(outer.x + (outer.w - w) / 2)
    y = int(outer.y + (outer.h - h) / 2)
    return BoundingBox(x, y, w, h)


def _jitter_box(box: BoundingBox, width: int, height: int, rng: random.Random) -> BoundingBox:
    dx = rng.uniform(-0.12, 0.12) * box.w
    dy = rng.uniform(-0.12, 0.12) * box.h
    sw = rng.uniform(0.85, 1.2)
    sh = rng.uniform(0.85, 1.2)
    w = min(max(2.0, box.w * sw), width)
    h = min(max(2.0, box.h * sh), height)
    x = min(max(0.0, box.x + dx), width - w)
    y = min(max(0.0, box.y + dy), height - h)
    return BoundingBox(round(x), round(y), round(w), round(h))


class _FeatureBuilder:
    def __init__(self, config: SynthWorldConfig) -> None:
        self.config = config
        classes = config.class_list()
        self.class_idx = {c: i for i, c in enumerate(classes)}
        self.color_idx = {c: len(classes) + i for i, c in enumerate(config.colors)}
        base = len(classes) + len(config.colors)
        self.action_idx = {a: base + i for i, a in enumerate(config.actions)}
        self.geom_offset = base + len(config.actions)

    def vector(
        self,
        box: BoundingBox,
        cls: str | None,
        color: str | None,
        action: str | None,
        rng: np.random.Generator,
    ) -> np.ndarray:
        cfg = self.config
        f = np.zeros(cfg.feature_dim, dtype=np.float32)
        if cls is not None:
            f[self.class_idx[cls]] = 1.0
        if color is not None:
            f[self.color_idx[color]] = 1.0
        if action is not None:
            f[self.action_idx[action]] = 1.0
        geom = geometry_features(
            np.array([[box.x, box.y, box.w, box.h]]), cfg.canvas[0], cfg.canvas[1]
        )[0]
        f[self.geom_offset : self.geom_offset + 5] = geom
        if cfg.noise > 0:
            f += cfg.noise * rng.standard_normal(cfg.feature_dim).astype(np.float32)
        return f


def _sample_flat_counts(config: SynthWorldConfig, rng: random.Random) -> dict[str, int]:
    """Class counts for one flat image; the first two classes always land
    in different answer bins so every image passes the eval constraint."""

    def bin_of(n: int) -> str:
        return "1" if n == 1 else ("2" if n == 2 else ">2")

    k = rng.randint(*config.classes_per_image)
    chosen = rng.sample(sorted(config.classes), k)
    lo, hi = config.counts_per_class
    counts = {chosen[0]: rng.randint(lo, hi)}
    second = rng.randint(lo, hi)
    while bin_of(second) == bin_of(counts[chosen[0]]):
        second = rng.randint(lo, hi)
    counts[chosen[1]] = second
    for cls in chosen[2:]:
        counts[cls] = rng.randint(lo, hi)
    return counts


def synth_world_generate(config: SynthWorldConfig) -> SynthWorld:
    """Generate the full world: annotations, proposal features, oracle."""
    config.validate()
    width, height = config.canvas
    fb = _FeatureBuilder(config)

    images: dict[str, ImageAnnotation] = {}
    proposals: dict[str, ProposalSet] = {}

    for index in range(config.num_images):
        image_id = f"synth{index:05d}"
        rng = per_image_rng(config.seed, image_id)
        nrng = np.random.default_rng([config.seed & 0x7FFFFFFF, index])

        # (box, class, color, action) rows for real objects
        rows: list[tuple[BoundingBox, str, str | None, str | None]] = []
        source_qas: list[SourceQA] = []
        if config.nested:
            n_fig = rng.randint(*config.objects_per_image)
            cells = _grid_cells(width, height, n_fig, rng)
            fig_colors = rng.sample(sorted(config.colors), n_fig)
            fig_actions = rng.sample(sorted(config.actions), n_fig)
            for fi in range(n_fig):
                container = _box_in_cell(cells[fi], rng.uniform(0.82, 0.95), rng)
                inner_cls = sorted(config.classes)[rng.randrange(len(config.classes))]
                inner = _centered_box(container, rng.uniform(0.30, 0.45))
                rows.append((container, config.container_class, None, fig_actions[fi]))
                rows.append((inner, inner_cls, fig_colors[fi], None))
        else:
            counts = _sample_flat_counts(config, rng)
            n_total = sum(counts.values())
            cells = _grid_cells(width, height, n_total, rng)
            scale_mult = rng.uniform(0.8, 1.2)
            scales = [
                min(0.92, s * scale_mult)
                for s in np.linspace(0.35, 0.78, n_total)
            ]
            rng.shuffle(scales)
            ci = 0
            for cls in sorted(counts):
                for _ in range(counts[cls]):
                    box = _box_in_cell(cells[ci], scales[ci], rng)
                    color = sorted(config.colors)[rng.randrange(len(config.colors))]
                    rows.append((box, cls, color, None))
                    ci += 1
            for cls in sorted(counts):
                source_qas.append(
                    SourceQA(
                        qa_id=f"{image_id}:count:{cls}",
                        question=f"How many {pluralize(cls)} are there?",
                        answer=str(counts[cls]),
                    )
                )

        objects = []
        for oi, (box, cls, color, action) in enumerate(rows):
            attrs = tuple(a for a in (color, action) if a is not None)
            objects.append(
                ObjectAnnotation(f"{image_id}:o{oi}", (cls,), box, attrs)
            )
        images[image_id] = ImageAnnotation(
            image_id=image_id,
            width=width,
            height=height,
            objects=tuple(objects),
            source_qas=tuple(source_qas),
        )

        # proposals: object boxes + jittered copies + spurious filler up to
        # a fixed total, so proposal density is comparable across images
        boxes, scores, feats = [], [], []
        for box, cls, color, action in rows:
            boxes.append(box)
            scores.append(rng.uniform(0.8, 1.0))
            feats.append(fb.vector(box, cls, color, action, nrng))
            for _ in range(config.jitter_per_object):
                jb = _jitter_box(box, width, height, rng)
                boxes.append(jb)
                scores.append(rng.uniform(0.5, 0.9))
                feats.append(fb.vector(jb, cls, color, action, nrng))
        while len(boxes) < config.proposals_per_image:
            w = rng.randint(10, max(11, width // 3))
            h = rng.randint(10, max(11, height // 3))
            sb = BoundingBox(rng.randrange(width - w), rng.randrange(height - h), w, h)
            boxes.append(sb)
            scores.append(rng.uniform(0.05, 0.4))
            feats.append(fb.vector(sb, None, None, None, nrng))

        proposals[image_id] = ProposalSet(
            image_id=image_id,
            boxes=np.array([[b.x, b.y, b.w, b.h] for b in boxes], dtype=np.float32),
            scores=np.array(scores, dtype=np.float32),
            features=np.stack(feats),
        )

    store = AnnotationStore(images)
    return SynthWorld(
        config=config,
        annotations=store,
        features=FeatureStore.in_memory(proposals),
        oracle=SynthOracle(store, config),
    )


class SynthOracle:
    """Answers any supported (question, point) query from world state."""

    def __init__(self, store: AnnotationStore, config: SynthWorldConfig) -> None:
        self.store = store
        self.config = config

    def _object_at(self, img: ImageAnnotation, point: Point, want: str) -> ObjectAnnotation | None:
        """Smallest containing object that has an attribute of the wanted
        kind ('color' or 'action'), or the smallest containing object."""
        containing = [o for o in img.objects if contains(o.box, point)]
        if not containing:
            return None
        if want == "action":
            with_attr = [o for o in containing if set(o.attributes) & set(self.config.actions)]
        elif want == "color":
            with_attr = [o for o in containing if set(o.attributes) & set(self.config.colors)]
        else:
            with_attr = containing
        pool = with_attr or containing
        return min(pool, key=lambda o: (o.box.area, o.object_id))

    def answer(self, image_id: str, question: str, point: Point | None) -> str | None:
        img = self.store.get(image_id)
        if img is None:
            return None
        tokens = tokenize(question)

        if tokens[:2] == ["how", "many"]:
            if point is not None and ("these" in tokens or "this" in tokens):
                obj = self._object_at(img, point, "any")
                cls = obj.canonical_name if obj else None
            else:
                nouns = [t for t in tokens[2:] if t not in ("of", "these", "are", "there", "?")]
                cls = singularize(nouns[0]) if nouns else None
            if cls is None:
                return None
            n = len(img.objects_named(cls))
            return "1" if n == 1 else ("2" if n == 2 else ">2")

        if tokens[:1] == ["what"] and "color" in tokens:
            obj = self._object_at(img, point, "color")
            if obj is None:
                return None
            colors = [a for a in obj.attributes if a in self.config.colors]
            return colors[0] if colors else None

        if tokens[:1] == ["what"] and "action" in tokens:
            obj = self._object_at(img, point, "action")
            if obj is None:
                return None
            actions = [a for a in obj.attributes if a in self.config.actions]
            return actions[0] if actions else None

        if tokens[:1] == ["is"] and "largest" in tokens:
            obj = self._object_at(img, point, "any")
            if obj is None:
                return None
            peers = img.objects_named(obj.canonical_name)
            return "yes" if all(obj.box.area >= p.box.area for p in peers) else "no"

        if tokens[:1] == ["is"]:
            # "Is this {class} {color}?"
            obj = self._object_at(img, point, "color")
            if obj is None:
                return None
            asked = [t for t in tokens if t in self.config.colors]
            if not asked:
                return None
            return "yes" if asked[0] in obj.attributes else "no"

        return None


def make_comparative_dataset(
    world: SynthWorld, seed: int = 0, fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
) -> list[PointQAInstance]:
    """Balanced yes/no questions over a flat world: "Is this the largest
    {class}?" needs image context, "Is this {class} {color}?" does not.
    """
    if world.config.nested:
        raise ConfigurationError("comparative datasets need a flat world")

    image_ids = world.annotations.image_ids()
    split_of = assign_splits(image_ids, fractions, seed, EVAL_SPLITS)

    instances = []
    for image_id in image_ids:
        img = world.annotations[image_id]
        rng = per_image_rng(seed, image_id)
        split = split_of[image_id]
        by_class: dict[str, list[ObjectAnnotation]] = {}
        for obj in img.objects:
            by_class.setdefault(obj.canonical_name, []).append(obj)
        n = 0
        for cls in sorted(by_class):
            objs = by_class[cls]
            if len(objs) < 2:
                continue
            largest = max(objs, key=lambda o: o.box.area)
            others = [o for o in objs if o is not largest]
            smaller = others[rng.randrange(len(others))]
            question = f"Is this the largest {cls}?"
            for obj, label in ((largest, "yes"), (smaller, "no")):
                instances.append(
                    PointQAInstance(
                        qa_id=f"cmp:{image_id}:{n}",
                        image_id=image_id,
                        question=question,
                        answer=label,
                        split=split,
                        point=center_point(obj.box),
                        gt_box=obj.box,
                        meta={"task": "general", "question_kind": "comparative"},
                    )
                )
                n += 1
            # local color questions keep the mix from being all-comparative
            probe = objs[rng.randrange(len(objs))]
            color = next(a for a in probe.attributes if a in world.config.colors)
            wrong = rng.choice(sorted(set(world.config.colors) - {color}))
            for asked, label in ((color, "yes"), (wrong, "no")):
                instances.append(
                    PointQAInstance(
                        qa_id=f"cmp:{image_id}:{n}",
                        image_id=image_id,
                        question=f"Is this {cls} {asked}?",
                        answer=label,
                        split=split,
                        point=center_point(probe.box),
                        gt_box=probe.box,
                        meta={"task": "general", "question_kind": "color"},
                    )
                )
                n += 1
    return instances


_COLOR_RGB = {
    "red": (220, 60, 50),
    "blue": (60, 90, 220),
    "green": (60, 180, 90),
    "yellow": (235, 210, 60),
    "orange": (240, 150, 50),
    "purple": (150, 70, 200),
    "pink": (240, 150, 190),
    "brown": (140, 95, 55),
    "black": (35, 35, 35),
    "white": (245, 245, 245),
    "gray": (150, 150, 150),
}


def _rgb_for(name: str) -> tuple[int, int, int]:
    if name in _COLOR_RGB:
        return _COLOR_RGB[name]
    h = abs(hash(name))  # decorative only; never used for logic
    return (60 + h % 160, 60 + (h // 7) % 160, 60 + (h // 49) % 160)


def rasterize_png(img: ImageAnnotation, colors: tuple[str, ...] | None = None) -> bytes:
    """Deterministic PNG rendering of one abstract image."""
    from PIL import Image, ImageDraw

    color_names = colors if colors is not None else tuple(_COLOR_RGB)
    canvas = Image.new("RGB", (img.width, img.height), (228, 228, 228))
    draw = ImageDraw.Draw(canvas)
    for obj in sorted(img.objects, key=lambda o: -o.box.area):
        b = obj.box
        color = next((a for a in obj.attributes if a in color_names), None)
        xy = [int(b.x), int(b.y), int(b.x + b.w) - 1, int(b.y + b.h) - 1]
        if color is None:
            draw.rectangle(xy, outline=(90, 90, 90), width=2)
        else:
            draw.rectangle(xy, fill=_rgb_for(color), outline=(50, 50, 50))
    out = BytesIO()
    canvas.save(out, format="PNG")
    return out.getvalue()
