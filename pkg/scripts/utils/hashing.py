#!/usr/bin/env python3
from pathlib import Path

import blake3
import numpy as np


def calculate_file_hash(file_path: Path) -> str:
    """calculate BLAKE3 hash of file content"""
    hasher = blake3.blake3()
    with open(str(file_path), 'rb') as f:
        for chunk in iter(lambda: f.read(65536), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


def hash_arrays(*arrays: np.ndarray, prefix: bytes = b"") -> str:
    """BLAKE3 over little-endian float64 bytes of each array, in order"""
    hasher = blake3.blake3(prefix)
    for arr in arrays:
        data = np.ascontiguousarray(arr, dtype='<f8')
        hasher.update(len(data).to_bytes(8, 'little'))
        hasher.update(data.tobytes())
    return hasher.hexdigest()
