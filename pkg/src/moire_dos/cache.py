"""Byte-budgeted LRU store for per-node spectral data."""

from collections import OrderedDict
import threading


def _nbytes(value):
    if isinstance(value, tuple):
        return sum(_nbytes(v) for v in value)
    return getattr(value, "nbytes", 64)


class EigenCache:
    def __init__(self, budget_bytes=512 * 2**20):
        self.budget = int(budget_bytes)
        self._data = OrderedDict()
        self._size = 0
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key):
        with self._lock:
            val = self._data.get(key)
            if val is None:
                self.misses += 1
                return None
            self._data.move_to_end(key)
            self.hits += 1
            return val[0]

    def put(self, key, value):
        size = _nbytes(value)
        if size > self.budget:
            return
        with self._lock:
            old = self._data.pop(key, None)
            if old is not None:
                self._size -= old[1]
            self._data[key] = (value, size)
            self._size += size
            while self._size > self.budget:
                _, (_, s) = self._data.popitem(last=False)
                self._size -= s

    def clear(self):
        with self._lock:
            self._data.clear()
            self._size = 0
            self.hits = self.misses = 0

    def __len__(self):
        return len(self._data)

    @property
    def size_bytes(self):
        return self._size


DEFAULT_CACHE = EigenCache()


def clear_cache():
    DEFAULT_CACHE.clear()
