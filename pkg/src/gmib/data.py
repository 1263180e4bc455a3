"""Loading and preprocessing labelled image data for the vector experiments.

Images are read from IDX or CSV files, restricted to two classes mapped to
labels -1 and +1, randomly projected to a few dimensions and whitened per
class so that the result resembles ``x = beta * Y + N(0, I)``.
"""
from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
EIG_FLOOR = 1e-10
MAX_CONDITION = 1e12
DEFAULT_CLASS_CAP = 2000


class DataFormatError(ValueError):
    """Malformed input file; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int, path: Optional[str] = None):
        where = f"{path}: " if path else ""
        super().__init__(f"{where}{message} (byte offset {offset})")
        self.offset = offset
        self.path = path


class UnknownClassError(ValueError):
    pass


class SingularCovarianceError(np.linalg.LinAlgError):
    def __init__(self, label: float, condition: float):
        super().__init__(f"covariance of class {label:+g} is singular (condition number {condition:.3g})")
        self.label = label
        self.condition = condition


@dataclass
class LabeledDataset:
    vectors: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        y = np.asarray(self.labels, dtype=float).ravel()
        if v.ndim != 2:
            raise ValueError("vectors must be a 2-D array")
        if v.shape[0] != y.size:
            raise ValueError(f"{v.shape[0]} vectors but {y.size} labels")
        if np.any(np.abs(y) != 1):
            raise ValueError("labels must be -1 or +1")
        self.vectors, self.labels = v, y

    def __len__(self) -> int:
        return self.labels.size

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def subset(self, idx) -> "LabeledDataset":
        return LabeledDataset(self.vectors[idx], self.labels[idx])

    def class_cap(self, cap: int = DEFAULT_CLASS_CAP) -> "LabeledDataset":
        """Keep at most ``cap`` samples of each class, in original order."""
        keep = np.concatenate([np.flatnonzero(self.labels == c)[:cap] for c in (-1.0, 1.0)])
        return self.subset(np.sort(keep))


# --------------------------------------------------------------------------
# readers
# --------------------------------------------------------------------------

def _read_bytes(path: Path) -> bytes:
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        return fh.read()


def _parse_idx(raw: bytes, magic: int, path: str) -> np.ndarray:
    if len(raw) < 4:
        raise DataFormatError("file too short for an IDX header", len(raw), path)
    found = struct.unpack(">I", raw[:4])[0]
    if found != magic:
        raise DataFormatError(f"bad IDX magic 0x{found:08x}, expected 0x{magic:08x}", 0, path)
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise DataFormatError("truncated IDX dimension header", len(raw), path)
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    expected = header + int(np.prod(dims))
    if len(raw) != expected:
        raise DataFormatError(f"IDX payload size mismatch: expected {expected} bytes, found {len(raw)}",
                              min(len(raw), expected), path)
    return np.frombuffer(raw, dtype=np.uint8, offset=header).reshape(dims)


def _default_labels_path(images: Path) -> Path:
    name = images.name.replace("images", "labels").replace("idx3", "idx1")
    if name == images.name:
        raise ValueError(f"cannot infer a labels file for {images}; pass labels_path")
    return images.with_name(name)


def _read_idx(path: Path, labels_path: Optional[Path]):
    images = _parse_idx(_read_bytes(path), IDX_IMAGES_MAGIC, str(path))
    lpath = labels_path or _default_labels_path(path)
    labels = _parse_idx(_read_bytes(lpath), IDX_LABELS_MAGIC, str(lpath))
    if labels.shape[0] != images.shape[0]:
        raise DataFormatError(f"{images.shape[0]} images but {labels.shape[0]} labels", 4, str(lpath))
    vectors = images.reshape(images.shape[0], -1).astype(float) / 255.0
    return vectors, labels.astype(int)


def _is_number(token: bytes) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _read_csv(path: Path):
    raw = _read_bytes(path)
    rows, labels = [], []
    offset = 0
    width = None
    for lineno, line in enumerate(raw.split(b"\n")):
        start = offset
        offset += len(line) + 1
        line = line.rstrip(b"\r")
        if not line.strip():
            continue
        fields = line.split(b",")
        if lineno == 0 and not _is_number(fields[0].strip()):
            continue  # header
        if width is None:
            width = len(fields)
        if len(fields) != width or width < 2:
            raise DataFormatError(f"line {lineno + 1} has {len(fields)} fields, expected {width}",
                                  start, str(path))
        pos = start
        values = []
        for tok in fields:
            try:
                values.append(float(tok))
            except ValueError:
                raise DataFormatError(f"non-numeric field {tok.decode(errors='replace')!r}",
                                      pos, str(path)) from None
            pos += len(tok) + 1
        if values[0] != int(values[0]):
            raise DataFormatError("class label must be an integer", start, str(path))
        labels.append(int(values[0]))
        rows.append(values[1:])
    if not rows:
        raise DataFormatError("no data rows", len(raw), str(path))
    vectors = np.asarray(rows, dtype=float)
    if vectors.max() > 1.0:
        # pixel intensities given on the 0..255 scale
        vectors = vectors / 255.0
    return vectors, np.asarray(labels)


def load_dataset(path: Union[str, Path], format: str = "idx", classes: Sequence[int] = (7, 9),
                 labels_path: Union[str, Path, None] = None) -> LabeledDataset:
    """Read a two-class dataset; ``classes[0]`` maps to -1 and ``classes[1]`` to +1.

    IDX images are read together with their labels file (``labels_path`` or
    the sibling ``*labels-idx1*`` name).  CSV rows are ``label,pixel,...``
    with an optional header line.  Pixel intensities are scaled to [0, 1].
    """
    path = Path(path)
    if format == "idx":
        vectors, raw_labels = _read_idx(path, Path(labels_path) if labels_path else None)
    elif format == "csv":
        vectors, raw_labels = _read_csv(path)
    else:
        raise ValueError(f"unknown format {format!r}; expected 'idx' or 'csv'")
    if len(classes) != 2 or classes[0] == classes[1]:
        raise ValueError("classes must name two distinct labels")
    present = set(np.unique(raw_labels).tolist())
    missing = [c for c in classes if c not in present]
    if missing:
        raise UnknownClassError(f"class(es) {missing} not found in {path}; present: {sorted(present)}")
    keep = np.isin(raw_labels, classes)
    labels = np.where(raw_labels[keep] == classes[0], -1.0, 1.0)
    return LabeledDataset(vectors[keep], labels)


def write_idx(images: np.ndarray, labels: np.ndarray, images_path: Union[str, Path],
              labels_path: Union[str, Path]) -> None:
    """Write uint8 images ``(n, rows, cols)`` and labels in IDX format."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">I", IDX_IMAGES_MAGIC))
        fh.write(struct.pack(">3I", *images.shape))
        fh.write(images.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, labels.size))
        fh.write(labels.tobytes())


# --------------------------------------------------------------------------
# transforms
# --------------------------------------------------------------------------

def random_projection(data: LabeledDataset, d0: int, seed: int = 0) -> LabeledDataset:
    """Multiply every vector by a seeded ``d0 x d`` standard Gaussian matrix."""
    if not 1 <= d0 <= data.dim:
        raise ValueError(f"d0 must lie in [1, {data.dim}], got {d0}")
    G = np.random.default_rng(seed).standard_normal((d0, data.dim))
    return LabeledDataset(data.vectors @ G.T, data.labels.copy())


def _inv_sqrt(cov: np.ndarray, label: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(cov)
    top = vals.max()
    cond = top / max(vals.min(), 0.0) if vals.min() > 0 else np.inf
    if top <= 0 or cond > MAX_CONDITION:
        raise SingularCovarianceError(label, cond)
    vals = np.maximum(vals, EIG_FLOOR)
    return (vecs / np.sqrt(vals)) @ vecs.T


def class_whiten(data: LabeledDataset) -> LabeledDataset:
    """Whiten each class with its own covariance and centre it at +-half the mean gap.

    Class +1 is moved to ``+(mu_plus - mu_minus)/2`` and class -1 to the
    mirrored point, so the output follows the symmetric two-class model.
    """
    d = data.dim
    means, idx = {}, {}
    for c in (-1.0, 1.0):
        idx[c] = np.flatnonzero(data.labels == c)
        if idx[c].size < d + 1:
            raise ValueError(f"class {c:+g} needs at least {d + 1} samples, has {idx[c].size}")
        means[c] = data.vectors[idx[c]].mean(axis=0)
    half_gap = 0.5 * (means[1.0] - means[-1.0])
    out = np.empty_like(data.vectors)
    for c in (-1.0, 1.0):
        block = data.vectors[idx[c]] - means[c]
        cov = np.atleast_2d(np.cov(block, rowvar=False))
        out[idx[c]] = block @ _inv_sqrt(cov, c) + c * half_gap
    return LabeledDataset(out, data.labels.copy())


def split(data: LabeledDataset, train_fraction: float, seed: int = 0):
    """Seeded stratified split; rows keep their original order on each side."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    train = []
    for c in (-1.0, 1.0):
        members = np.flatnonzero(data.labels == c)
        k = int(round(train_fraction * members.size))
        train.append(rng.permutation(members)[:k])
    train_idx = np.sort(np.concatenate(train))
    test_mask = np.ones(len(data), dtype=bool)
    test_mask[train_idx] = False
    return data.subset(train_idx), data.subset(np.flatnonzero(test_mask))


def estimated_betas(data: LabeledDataset) -> np.ndarray:
    """Per-coordinate half mean gap between the +1 and -1 classes."""
    return 0.5 * (data.vectors[data.labels == 1].mean(axis=0) - data.vectors[data.labels == -1].mean(axis=0))
