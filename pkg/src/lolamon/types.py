"""Value types of the specification language."""

from __future__ import annotations

import enum


class Kind(enum.Enum):
    BOOL = "bool"
    UINT = "uint"
    INT = "int"
    FLOAT = "float"


class SemType(enum.Enum):
    """Declared value type of a stream.

    ``width`` is the storage size in bytes, the unit used by the memory
    report. Arithmetic on floats is always carried out in 64 bit.
    """

    Bool = (Kind.BOOL, 1)
    UInt8 = (Kind.UINT, 1)
    UInt16 = (Kind.UINT, 2)
    UInt32 = (Kind.UINT, 4)
    UInt64 = (Kind.UINT, 8)
    Int8 = (Kind.INT, 1)
    Int16 = (Kind.INT, 2)
    Int32 = (Kind.INT, 4)
    Int64 = (Kind.INT, 8)
    Float16 = (Kind.FLOAT, 2)
    Float32 = (Kind.FLOAT, 4)
    Float64 = (Kind.FLOAT, 8)

    @property
    def kind(self) -> Kind:
        return self.value[0]

    @property
    def width(self) -> int:
        return self.value[1]

    @property
    def signed(self) -> bool:
        return self.kind in (Kind.INT, Kind.FLOAT)

    @property
    def is_numeric(self) -> bool:
        return self.kind is not Kind.BOOL

    @property
    def is_integer(self) -> bool:
        return self.kind in (Kind.UINT, Kind.INT)

    @property
    def is_float(self) -> bool:
        return self.kind is Kind.FLOAT

    def widens_to(self, other: SemType) -> bool:
        """True if a value of this type converts implicitly to ``other``."""
        return self.kind is other.kind and self.width <= other.width

    @classmethod
    def by_name(cls, name: str) -> SemType | None:
        return cls.__members__.get(name)

    @classmethod
    def widest(cls, kind: Kind) -> SemType:
        return max((t for t in cls if t.kind is kind), key=lambda t: t.width)

    def __str__(self) -> str:
        return self.name


TYPE_NAMES = tuple(SemType.__members__)
