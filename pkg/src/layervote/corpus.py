"""Label space and gold-labeled evaluation sets.

A corpus file is UTF-8 JSON Lines, one object per example:

    {"id": "ex-0001", "tokens": ["show", "me", "flights"], "intents": ["flight"]}

``intents`` may hold several co-occurring intents; they are collapsed into a
single canonical multi-intent label (components sorted, joined with ``+``) so
that label equality never depends on annotation order.  Any other keys (slot
tags and the like) are ignored.  Labels are case-sensitive: no normalization
beyond canonicalization is applied.
"""

import json
from dataclasses import dataclass, field

from .errors import (
    DuplicateComponentError,
    DuplicateExampleIdError,
    EmptyComponentError,
    ParseError,
    ReservedSeparatorError,
    UnknownLabelError,
)

SEPARATOR = "+"

# A canonical intent label: components sorted by code point, joined with "+".
IntentLabel = str


def canonicalize_label(components: list[str] | tuple[str, ...]) -> IntentLabel:
    """Collapse one or more intent components into a canonical label.

    Components are sorted lexicographically by code point and joined with
    the reserved ``+`` separator, so ``["flight", "airfare"]`` and
    ``["airfare", "flight"]`` name the same label.  Idempotent on its own
    output when re-split on the separator.

    Raises:
        EmptyComponentError: no components, or a component is empty.
        ReservedSeparatorError: a component contains ``+``.
        DuplicateComponentError: the same component appears twice.
    """
    if not components:
        raise EmptyComponentError("label must have at least one component")
    seen = set()
    for part in components:
        if not part:
            raise EmptyComponentError("empty label component")
        if SEPARATOR in part:
            raise ReservedSeparatorError(
                f"component {part!r} contains reserved separator {SEPARATOR!r}"
            )
        if part in seen:
            raise DuplicateComponentError(f"duplicate component {part!r}")
        seen.add(part)
    return SEPARATOR.join(sorted(components))


def label_components(label: IntentLabel) -> tuple[str, ...]:
    """Split a canonical label back into its components."""
    return tuple(label.split(SEPARATOR))


# Component-level canonicalization failures re-raised with file coordinates.
CorpusComponentErrors = (EmptyComponentError, ReservedSeparatorError, DuplicateComponentError)


@dataclass(frozen=True)
class LabelSpace:
    """Ordered, duplicate-free set of canonical labels.

    The order is the order of first appearance in the declaring file and is
    the column order of every prediction matrix for the dataset.
    """

    labels: tuple[IntentLabel, ...]
    index: dict[IntentLabel, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        idx = {}
        for i, label in enumerate(self.labels):
            if label in idx:
                raise ValueError(f"duplicate label {label!r} in label space")
            idx[label] = i
        object.__setattr__(self, "index", idx)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: IntentLabel) -> bool:
        return label in self.index

    def position(self, label: IntentLabel) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise UnknownLabelError(f"label {label!r} not in label space") from None


@dataclass(frozen=True)
class GoldSet:
    """Gold-labeled examples in file order.

    File order is canonical: row *i* of every prediction matrix for this
    dataset refers to ``examples[i]``.  Immutable after construction and safe
    to share across threads.
    """

    dataset_id: str
    examples: tuple[tuple[str, tuple[str, ...], IntentLabel], ...]

    def __post_init__(self):
        seen = set()
        for example_id, _, _ in self.examples:
            if example_id in seen:
                raise DuplicateExampleIdError(f"duplicate example id {example_id!r}")
            seen.add(example_id)

    def __len__(self) -> int:
        return len(self.examples)

    def gold_labels(self) -> tuple[IntentLabel, ...]:
        return tuple(gold for _, _, gold in self.examples)


def load_label_space(path: str) -> LabelSpace:
    """Load a sidecar label-space file (JSON list of label strings).

    Entries are canonicalized; repeated entries collapse to their first
    appearance, preserving file order.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(str(exc), path=path) from exc
    if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
        raise ParseError("label space file must be a JSON list of strings", path=path)
    ordered: list[IntentLabel] = []
    seen: set[IntentLabel] = set()
    for text in raw:
        label = canonicalize_label(label_components(text))
        if label not in seen:
            seen.add(label)
            ordered.append(label)
    return LabelSpace(tuple(ordered))


def load_gold(
    path: str,
    label_space: LabelSpace | None = None,
    dataset_id: str | None = None,
) -> tuple[LabelSpace, GoldSet]:
    """Load a JSON Lines corpus into (LabelSpace, GoldSet).

    With ``label_space`` given (declared mode) every gold label must belong
    to it; otherwise (inferred mode) the space is built from the first
    appearance of each gold label.  ``dataset_id`` defaults to the file's
    base name without extension.

    Raises:
        ParseError: malformed line (with its 1-based line number).
        UnknownLabelError: declared mode only.
        DuplicateExampleIdError: repeated ``id``.
    """
    if dataset_id is None:
        base = path.replace("\\", "/").rsplit("/", 1)[-1]
        dataset_id = base.rsplit(".", 1)[0] if "." in base else base

    examples: list[tuple[str, tuple[str, ...], IntentLabel]] = []
    inferred: list[IntentLabel] = []
    inferred_seen: set[IntentLabel] = set()
    seen_ids: set[str] = set()

    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", path=path, line=lineno) from exc
            if not isinstance(row, dict):
                raise ParseError("row is not a JSON object", path=path, line=lineno)
            try:
                example_id = row["id"]
                tokens = row["tokens"]
                intents = row["intents"]
            except KeyError as exc:
                raise ParseError(f"missing key {exc}", path=path, line=lineno) from exc
            if not isinstance(example_id, str) or not example_id:
                raise ParseError("'id' must be a non-empty string", path=path, line=lineno)
            if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
                raise ParseError("'tokens' must be a list of strings", path=path, line=lineno)
            if (
                not isinstance(intents, list)
                or not intents
                or not all(isinstance(x, str) for x in intents)
            ):
                raise ParseError(
                    "'intents' must be a non-empty list of strings", path=path, line=lineno
                )
            if example_id in seen_ids:
                raise DuplicateExampleIdError(
                    f"{path}:{lineno}: duplicate example id {example_id!r}"
                )
            seen_ids.add(example_id)

            try:
                gold = canonicalize_label(intents)
            except CorpusComponentErrors as exc:
                raise type(exc)(f"{path}:{lineno}: {exc}") from exc

            if label_space is not None:
                if gold not in label_space:
                    raise UnknownLabelError(
                        f"{path}:{lineno}: gold label {gold!r} not in declared label space"
                    )
            elif gold not in inferred_seen:
                inferred_seen.add(gold)
                inferred.append(gold)
            examples.append((example_id, tuple(tokens), gold))

    space = label_space if label_space is not None else LabelSpace(tuple(inferred))
    return space, GoldSet(dataset_id=dataset_id, examples=tuple(examples))


def save_gold(gold: GoldSet, path: str) -> None:
    """Write a GoldSet back to JSON Lines (inverse of load_gold)."""
    with open(path, "w", encoding="utf-8") as handle:
        for example_id, tokens, label in gold.examples:
            row = {
                "id": example_id,
                "tokens": list(tokens),
                "intents": list(label_components(label)),
            }
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")


def save_label_space(space: LabelSpace, path: str) -> None:
    """Write a LabelSpace as a sidecar JSON list."""
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(list(space.labels), handle, ensure_ascii=False, indent=0)
        handle.write("\n")
