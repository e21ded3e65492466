from enum import Enum


class DistanceMode(Enum):
    """Localisation distance used for MOTP and frame-level matching costs"""

    CENTER = "center"
    ONE_MINUS_IOU = "one-minus-iou"


class Precision(Enum):
    """Storage precision of an embedding or weight file"""

    HALF16 = "half16"
    SINGLE32 = "single32"

    @property
    def nbytes(self) -> int:
        return 2 if self == Precision.HALF16 else 4

    @property
    def numpy_dtype(self) -> str:
        return "<f2" if self == Precision.HALF16 else "<f4"


class UnitMode(Enum):
    """Byte unit convention, decimal SI (1 GB = 1e9 B) or binary (1 GiB = 2**30 B)"""

    DECIMAL = "decimal"
    BINARY = "binary"


class TensorDtype(Enum):
    """On-disk value type of a feature tensor file"""

    FLOAT32 = "float32"
    FLOAT16 = "float16"
