"""Dataset manifests binding audio files to speakers and group labels."""

import csv
from dataclasses import dataclass
from pathlib import Path


class ManifestError(ValueError):
    """Raised for malformed manifest files."""


REQUIRED_COLUMNS = ("path", "utterance_id", "speaker_id", "group")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    utterance_id: str
    speaker_id: str
    group: str


@dataclass
class DatasetManifest:
    entries: list

    @property
    def groups(self):
        return sorted({e.group for e in self.entries})

    @property
    def speakers(self):
        return sorted({e.speaker_id for e in self.entries})

    def subset(self, groups) -> "DatasetManifest":
        keep = set(groups)
        return DatasetManifest([e for e in self.entries if e.group in keep])

    def summary(self) -> dict:
        per_group = {g: sum(1 for e in self.entries if e.group == g) for g in self.groups}
        return {
            "n_utterances": len(self.entries),
            "n_speakers": len(self.speakers),
            "groups": self.groups,
            "utterances_per_group": per_group,
        }


def load_manifest(path) -> DatasetManifest:
    """Parse a manifest CSV with header path,utterance_id,speaker_id,group.

    Relative audio paths are resolved against the manifest's directory.
    Duplicate utterance ids and missing columns are rejected.
    """
    path = Path(path)
    base = path.parent
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ManifestError(f"empty manifest: {path}")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ManifestError(f"manifest {path} missing column(s): {', '.join(missing)}")
        entries = []
        seen = set()
        for row in reader:
            uid = row["utterance_id"]
            if uid in seen:
                raise ManifestError(f"duplicate utterance_id {uid!r} in {path}")
            seen.add(uid)
            p = Path(row["path"])
            if not p.is_absolute():
                p = base / p
            entries.append(
                ManifestEntry(
                    path=str(p),
                    utterance_id=uid,
                    speaker_id=row["speaker_id"],
                    group=row["group"],
                )
            )
    if not entries:
        raise ManifestError(f"manifest {path} has no data rows")
    return DatasetManifest(entries)


def write_manifest(path, entries) -> None:
    """Write entries as a manifest CSV; paths are stored as given."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REQUIRED_COLUMNS)
        for e in entries:
            writer.writerow([e.path, e.utterance_id, e.speaker_id, e.group])
