from herdwatch.formats.confusion import load_confusion, save_confusion
from herdwatch.formats.embeddings import load_embeddings, save_embeddings
from herdwatch.formats.tensors import load_tensor, save_tensor
from herdwatch.formats.tracks import load_tracks, save_tracks

__all__ = [
    "load_confusion",
    "save_confusion",
    "load_embeddings",
    "save_embeddings",
    "load_tensor",
    "save_tensor",
    "load_tracks",
    "save_tracks",
]
