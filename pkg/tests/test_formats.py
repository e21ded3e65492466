import struct
import warnings

import numpy as np
import pytest
import torch as T

from herdwatch.common.errors import MalformedInputError
from herdwatch.common.type_aliases import BoundingBox, TrackRecord, TrackSet
from herdwatch.formats import confusion
from herdwatch.formats.confusion import load_confusion, save_confusion
from herdwatch.formats.embeddings import load_embeddings, save_embeddings
from herdwatch.formats.tensors import load_tensor, save_tensor
from herdwatch.formats.tracks import load_tracks, save_tracks
from herdwatch.metrics.classification import ConfusionMatrix

HEADER = "frame,id,x,y,w,h,score\n"


def _write(path, text):
    path.write_text(text)
    return str(path)


def test_tracks_file(tmp_path):
    tracks = TrackSet(
        [
            TrackRecord(1, 1, BoundingBox(0.1, 2.0, 10.0, 20.0), 0.9),
            TrackRecord(1, 3, BoundingBox(5.0, 5.0, 1.0, 1.0)),
            TrackRecord(2, 1, BoundingBox(1.0 / 3, 2.0, 10.0, 20.0), 0.5),
        ]
    )
    path = str(tmp_path / "tracks.csv")
    save_tracks(tracks, path)
    with open(path) as f:
        assert f.readline() == HEADER
    assert load_tracks(path) == tracks


@pytest.mark.parametrize(
    "body, line",
    [
        ("1,1,0,0,10,10,1\n1,1,5,5,10,10,1\n", 3),
        ("2,1,0,0,10,10,1\n1,1,5,5,10,10,1\n", 3),
        ("1,1,0,0,10,10\n", 2),
        ("1,1,0,0,10,abc,1\n", 2),
        ("1,1,0,0,0,10,1\n", 2),
        ("1,2,0,0,10,10,1\n1,1,0,0,10,10,1\n", 3),
    ],
)
def test_malformed_tracks(tmp_path, body, line):
    path = _write(tmp_path / "bad.csv", HEADER + body)
    with pytest.raises(MalformedInputError, match=f"line {line}"):
        load_tracks(path)


def test_tracks_header(tmp_path):
    path = _write(tmp_path / "bad.csv", "frame,id,x,y,w,h\n")
    with pytest.raises(MalformedInputError, match="line 1"):
        load_tracks(path)


def test_empty_tracks_file(tmp_path):
    assert len(load_tracks(_write(tmp_path / "empty.csv", HEADER))) == 0


@pytest.mark.parametrize("dtype", ["float32", "float16"])
def test_tensor_file(tmp_path, dtype):
    values = np.arange(24, dtype=np.float64).reshape(1, 2, 3, 4) / 4
    path = str(tmp_path / "x.dtn")
    save_tensor(values, path, dtype)
    loaded = load_tensor(path)
    assert loaded.dtype == T.float64
    assert tuple(loaded.shape) == (1, 2, 3, 4)
    np.testing.assert_array_equal(loaded.numpy(), values)

    with open(path, "rb") as f:
        data = f.read()
    assert data[:4] == (b"DTN1" if dtype == "float32" else b"DTNH")
    assert struct.unpack_from("<5I", data, 4) == (4, 1, 2, 3, 4)


def test_malformed_tensor_files(tmp_path):
    path = tmp_path / "x.dtn"
    path.write_bytes(b"DTN1" + struct.pack("<5I", 4, 1, 1, 1, 2) + struct.pack("<f", 1.0))
    with pytest.raises(MalformedInputError):
        load_tensor(str(path))

    path.write_bytes(b"XXXX" + struct.pack("<5I", 4, 1, 1, 1, 1) + struct.pack("<f", 1.0))
    with pytest.raises(MalformedInputError):
        load_tensor(str(path))

    path.write_bytes(b"DTN1" + struct.pack("<4I", 3, 1, 1, 1))
    with pytest.raises(MalformedInputError):
        load_tensor(str(path))

    with pytest.raises(MalformedInputError):
        save_tensor(np.zeros((2, 2)), str(path))


@pytest.mark.parametrize("precision", ["half16", "single32"])
def test_embedding_file(tmp_path, precision):
    values = np.array([[0.5, -0.25, 1.0], [0.0, 2.0, -1.5]])
    path = str(tmp_path / "e.emb")
    save_embeddings(values, path, precision)
    loaded, stored = load_embeddings(path)
    assert stored.value == precision
    np.testing.assert_array_equal(loaded, values)


def test_malformed_embedding_file(tmp_path):
    path = tmp_path / "e.emb"
    path.write_bytes(struct.pack("<4sIIB", b"EMB1", 2, 3, 1) + b"\x00" * 10)
    with pytest.raises(MalformedInputError):
        load_embeddings(str(path))
    path.write_bytes(struct.pack("<4sIIB", b"EMB1", 0, 3, 7))
    with pytest.raises(MalformedInputError):
        load_embeddings(str(path))


def test_confusion_file(tmp_path):
    cm = ConfusionMatrix(["lying", "standing"], np.array([[10, 2], [1, 7]]))
    path = str(tmp_path / "cm.csv")
    save_confusion(cm, path)
    with open(path) as f:
        assert f.readline() == "true\\pred,lying,standing\n"
    loaded = load_confusion(path)
    assert loaded.class_names == cm.class_names
    np.testing.assert_array_equal(loaded.counts, cm.counts)


@pytest.mark.parametrize(
    "text",
    [
        "label,a,b\na,1,0\nb,0,1\n",
        "true\\pred,a,b\nb,1,0\na,0,1\n",
        "true\\pred,a,b\na,1,0\n",
        "true\\pred,a,b\na,1\nb,0,1\n",
        "true\\pred,a,b\na,1,x\nb,0,1\n",
        "true\\pred,a,b\na,1,-1\nb,0,1\n",
    ],
)
def test_malformed_confusion(tmp_path, text):
    with pytest.raises(MalformedInputError):
        load_confusion(_write(tmp_path / "cm.csv", text))


def test_confusion_module_compiles_without_warnings():
    with open(confusion.__file__) as f:
        source = f.read()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        compile(source, confusion.__file__, "exec")
    assert confusion.__doc__.startswith("Confusion-matrix files: CSV with header `true\\pred,")
