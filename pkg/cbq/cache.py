"""On-disk cache of pseudo ground truths.

Each table is a CSV file named `{problem slug}-{hash}.csv` where the hash is the first
12 hex digits of the SHA-256 of the configuration, serialized as sorted JSON.
The file starts with the configuration as a `#` comment, then a header row, then one
row per value at full double precision:

```
# {"draws": 5000, "problem": "sir", ...}
theta,truth
5.1234,1.234e+05
```
The directory is `--cache-dir`, else `$CBQ_CACHE_DIR`, else `.cbq-cache`.
"""
from __future__ import annotations

__all__ = ['TruthCache', 'CACHE_ENV', 'DEFAULT_CACHE_DIR', 'cache_dir']

import json
import os
from hashlib import sha256
from logging import getLogger
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from slugify import slugify  # type: ignore

logger = getLogger('cbq')

CACHE_ENV = 'CBQ_CACHE_DIR'
DEFAULT_CACHE_DIR = '.cbq-cache'


def cache_dir(location: Union[str, Path, None] = None) -> Path:
    if location:
        return Path(location)
    return Path(os.environ.get(CACHE_ENV) or DEFAULT_CACHE_DIR)


class TruthCache:
    """Numeric tables keyed by a problem name and its configuration."""

    def __init__(self, location: Union[str, Path, None] = None):
        self.location = cache_dir(location)

    def path(self, name: str, key: dict) -> Path:
        digest = sha256(json.dumps(key, sort_keys=True).encode('utf-8')).hexdigest()[:12]
        return self.location / f'{slugify(name)}-{digest}.csv'

    def load(self, name: str, key: dict) -> Optional[np.ndarray]:
        path = self.path(name, key)
        if not path.exists():
            logger.info(f'{name}: cache miss {path}')
            return None
        logger.info(f'{name}: cache hit {path}')
        return np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)

    def store(self, name: str, key: dict, table: np.ndarray, header: Sequence[str]) -> Path:
        path = self.path(name, key)
        path.parent.mkdir(parents=True, exist_ok=True)
        comment = json.dumps(key, sort_keys=True)
        np.savetxt(path, np.atleast_2d(table), fmt='%.17g', delimiter=',',
                   header=f'# {comment}\n{",".join(header)}', comments='')
        logger.info(f'{name}: cached {np.atleast_2d(table).shape[0]} rows in {path}')
        return path

    def __repr__(self):
        return f'<{type(self).__name__} {self.location}>'
