"""
Worked-Example Presets

The two small systems used throughout the docs and golden tests:
  example1  K=2, N=2 over GF(2) with the (4,3) single-parity code
  example2  K=3, N=2 over GF(5) with a (6,4) code whose parity columns are
            all-ones and (1,2,3,4)
Files are named A and B.
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple

from core.errors import ConfigError
from core.galois import Field
from core.mds import GeneratorMatrix
from core.model import FileLibrary, SystemParams


@dataclass(frozen=True)
class Preset:
    name: str
    K: int
    N: int
    p: int
    generator_rows: Tuple[Tuple[int, ...], ...]
    files: Tuple[Tuple[int, ...], ...]
    description: str = ""

    def field(self) -> Field:
        return Field(self.p)

    def params(self) -> SystemParams:
        return SystemParams(K=self.K, N=self.N, F=len(self.files[0]), field=self.field())

    def generator(self) -> GeneratorMatrix:
        return GeneratorMatrix.from_rows(self.generator_rows, self.field())

    def library(self) -> FileLibrary:
        field = self.field()
        return FileLibrary(tuple(field.vector(f) for f in self.files))

    def build(self) -> Tuple[SystemParams, FileLibrary, GeneratorMatrix]:
        return self.params(), self.library(), self.generator()


PRESETS: Dict[str, Preset] = {
    "example1": Preset(
        name="example1",
        K=2,
        N=2,
        p=2,
        generator_rows=(
            (1, 0, 0, 1),
            (0, 1, 0, 1),
            (0, 0, 1, 1),
        ),
        files=((1, 1, 0), (0, 1, 1)),
        description="2 users, 2 files, M=1/3, rate 4/3",
    ),
    "example2": Preset(
        name="example2",
        K=3,
        N=2,
        p=5,
        generator_rows=(
            (1, 0, 0, 0, 1, 1),
            (0, 1, 0, 0, 1, 2),
            (0, 0, 1, 0, 1, 3),
            (0, 0, 0, 1, 1, 4),
        ),
        files=((1, 2, 3, 4), (4, 0, 2, 1)),
        description="3 users, 2 files, M=1/4, rate 3/2",
    ),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def preset_names() -> List[str]:
    return sorted(PRESETS)
