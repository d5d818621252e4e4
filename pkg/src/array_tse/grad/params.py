"""Named parameter collections and their on-disk container.

Container layout (stable, documented in README):
  params.bin  raw little-endian float32 payloads, concatenated in index order
  params.idx  plain text; first line "array-tse-params 1", then one line per
              record: <name>\t<comma-separated dims>\t<byte offset>\t<count>
"""

import os

import numpy as np

from .tensor import Tensor

INDEX_MAGIC = "array-tse-params 1"
BIN_NAME = "params.bin"
IDX_NAME = "params.idx"


class ParameterSet:
    """Ordered name -> Tensor map for one model's trainable parameters."""

    def __init__(self):
        self._params = {}

    def add(self, name, data):
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        if any(ch.isspace() for ch in name):
            raise ValueError(f"parameter name {name!r} contains whitespace")
        t = data if isinstance(data, Tensor) else Tensor(data)
        t.requires_grad = True
        t.name = name
        self._params[name] = t
        return t

    def __getitem__(self, name):
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def __len__(self):
        return len(self._params)

    def names(self):
        return list(self._params)

    def items(self):
        return self._params.items()

    def tensors(self):
        return list(self._params.values())

    def zero_grad(self):
        for t in self._params.values():
            t.grad = None

    def n_params(self):
        return sum(t.size for t in self._params.values())

    def state_arrays(self):
        return {name: t.data.copy() for name, t in self._params.items()}

    def load_arrays(self, arrays, strict=True):
        if strict:
            missing = set(self._params) - set(arrays)
            extra = set(arrays) - set(self._params)
            if missing or extra:
                raise KeyError(f"parameter name mismatch: missing {sorted(missing)}, "
                               f"unexpected {sorted(extra)}")
        for name, arr in arrays.items():
            t = self._params[name]
            if tuple(arr.shape) != t.shape:
                raise ValueError(f"parameter {name!r}: stored shape {arr.shape} != "
                                 f"model shape {t.shape}")
            t.data = arr.astype(t.data.dtype)
            t.grad = None


def save_params(params, directory):
    """Write a ParameterSet (or name -> ndarray dict) as params.bin/params.idx."""
    os.makedirs(directory, exist_ok=True)
    items = params.items() if isinstance(params, ParameterSet) else params.items()
    lines = [INDEX_MAGIC]
    offset = 0
    with open(os.path.join(directory, BIN_NAME), "wb") as fbin:
        for name, value in items:
            arr = value.data if isinstance(value, Tensor) else np.asarray(value)
            payload = np.ascontiguousarray(arr, dtype="<f4")
            dims = ",".join(str(d) for d in payload.shape)
            lines.append(f"{name}\t{dims}\t{offset}\t{payload.size}")
            fbin.write(payload.tobytes())
            offset += payload.size * 4
    with open(os.path.join(directory, IDX_NAME), "w", encoding="utf-8") as fidx:
        fidx.write("\n".join(lines) + "\n")


def load_params(directory):
    """Read params.bin/params.idx back into {name: float32 ndarray}."""
    idx_path = os.path.join(directory, IDX_NAME)
    with open(idx_path, encoding="utf-8") as fidx:
        lines = [ln.rstrip("\n") for ln in fidx if ln.strip()]
    if not lines or lines[0] != INDEX_MAGIC:
        raise ValueError(f"{idx_path}: not a parameter index (bad magic line)")
    with open(os.path.join(directory, BIN_NAME), "rb") as fbin:
        blob = fbin.read()
    arrays = {}
    for ln in lines[1:]:
        name, dims, offset, count = ln.split("\t")
        shape = tuple(int(d) for d in dims.split(",")) if dims else ()
        offset, count = int(offset), int(count)
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
        if int(np.prod(shape)) != count:
            raise ValueError(f"{idx_path}: record {name!r} shape {shape} != count {count}")
        arrays[name] = arr.reshape(shape).copy()
    return arrays
