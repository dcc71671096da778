"""Corpus ingestion via line-delimited manifests.

One utterance per line, encoded as a flat JSON object with fields `id`,
`path`, `label` (one of the four emotion names, or empty/absent for
unlabeled), `corpus_id`, and optional `speaker_id`. Augmented utterances
additionally carry `augmented: true` and their `vtlp_alpha` warp factor.
Relative audio paths resolve against the manifest's directory.
"""

from __future__ import annotations

import json
import wave
from dataclasses import dataclass, field, replace
from pathlib import Path

from rlser.labels import EmotionLabel


class ManifestError(ValueError):
    """Malformed or inconsistent manifest content."""


@dataclass(frozen=True)
class Utterance:
    id: str
    audio_path: Path
    label: EmotionLabel | None
    corpus_id: str
    speaker_id: str | None = None
    augmented: bool = False
    vtlp_alpha: float | None = None

    @property
    def qualified_id(self) -> str:
        """Identity key that stays unique when corpora are mixed."""
        return f"{self.corpus_id}/{self.id}"

    def with_augmentation(self, new_id: str, alpha: float) -> "Utterance":
        return replace(self, id=new_id, augmented=True, vtlp_alpha=alpha)


@dataclass(frozen=True)
class Corpus:
    corpus_id: str
    utterances: tuple[Utterance, ...]
    sample_rate_hz: int

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        if not self.utterances:
            raise ManifestError("empty corpus")
        seen: set[str] = set()
        for u in self.utterances:
            if u.id in seen:
                raise ManifestError(f"duplicate utterance id {u.id!r} in corpus {self.corpus_id!r}")
            seen.add(u.id)

    def __len__(self) -> int:
        return len(self.utterances)

    def labeled(self) -> list[Utterance]:
        return [u for u in self.utterances if u.label is not None]


_FIELDS = {"id", "path", "label", "corpus_id", "speaker_id", "augmented", "vtlp_alpha"}


def _parse_record(line: str, lineno: int, base: Path) -> Utterance:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"line {lineno}: malformed record: {exc}") from exc
    if not isinstance(rec, dict):
        raise ManifestError(f"line {lineno}: expected a flat object, got {type(rec).__name__}")
    unknown = set(rec) - _FIELDS
    if unknown:
        raise ManifestError(f"line {lineno}: unknown fields {sorted(unknown)}")
    for required in ("id", "path", "corpus_id"):
        if not rec.get(required):
            raise ManifestError(f"line {lineno}: missing required field {required!r}")

    label_name = rec.get("label") or None
    try:
        label = EmotionLabel.from_name(label_name) if label_name else None
    except ValueError as exc:
        raise ManifestError(f"line {lineno}: {exc}") from exc

    path = Path(rec["path"])
    if not path.is_absolute():
        path = base / path
    return Utterance(
        id=str(rec["id"]),
        audio_path=path,
        label=label,
        corpus_id=str(rec["corpus_id"]),
        speaker_id=rec.get("speaker_id") or None,
        augmented=bool(rec.get("augmented", False)),
        vtlp_alpha=rec.get("vtlp_alpha"),
    )


def load_manifest(path: str | Path) -> Corpus:
    """Read a manifest into a Corpus.

    Checks that every referenced audio file exists; the sample rate is probed
    from the first clip's WAV header. Raises ManifestError with the offending
    line number for malformed records.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"manifest not found: {path}")
    base = path.resolve().parent

    utterances: list[Utterance] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            utterances.append(_parse_record(line, lineno, base))
    if not utterances:
        raise ManifestError("empty corpus")

    missing = [str(u.audio_path) for u in utterances if not u.audio_path.exists()]
    if missing:
        raise ManifestError(f"{len(missing)} referenced audio files missing, first: {missing[0]}")

    with wave.open(str(utterances[0].audio_path), "rb") as probe:
        rate = probe.getframerate()
    return Corpus(corpus_id=utterances[0].corpus_id, utterances=tuple(utterances), sample_rate_hz=rate)


def save_manifest(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus back out; load(save(c)) reproduces ids, labels, and order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    base = path.resolve().parent
    with open(path, "w", encoding="utf-8") as fh:
        for u in corpus.utterances:
            audio = u.audio_path
            try:
                rel = audio.resolve().relative_to(base)
                audio = rel
            except ValueError:
                pass
            rec: dict = {
                "id": u.id,
                "path": str(audio),
                "label": u.label.label_name if u.label is not None else "",
                "corpus_id": u.corpus_id,
            }
            if u.speaker_id:
                rec["speaker_id"] = u.speaker_id
            if u.augmented:
                rec["augmented"] = True
                rec["vtlp_alpha"] = u.vtlp_alpha
            fh.write(json.dumps(rec) + "\n")
