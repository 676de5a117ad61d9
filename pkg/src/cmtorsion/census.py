"""
Range scans over odd degrees.

A scan never calls :func:`odt.groups` per degree.  It lists every
non-universal threshold t <= hi once, then sieves: each odd multiple of t
gains t's groups.  Three arrays per chunk come out of that sieve:

* the group count and the largest group order;
* the class representative, i.e. the lcm of the thresholds dividing d;
  two degrees have the same group list exactly when these agree, so it
  serves as the fingerprint key (1 means Olson);
* r(d), by sieving the distinct values g_l instead.

Chunks are independent, so they can go to worker processes; results are
merged in ascending d and fingerprint ids are handed out in order of first
appearance, which makes the output independent of the worker count.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterator

import numpy as np

from .classnum import ClassNumberCache, shared_cache
from .odt import (EvenDegreeError, Kind, TorsionGroup, ell_bound, fingerprint,
                  fingerprint_string, groups, threshold, threshold_family)

CHUNK = 1 << 16                  # odd degrees per work unit
CHECKPOINT_MAGIC = "ODTCENSUS v1"
CSV_HEADER = "d,olson,fingerprint_id,group_count,t_cm,r"
UNIVERSAL_COUNT = 6
UNIVERSAL_TCM = 6


class CheckpointError(ValueError):
    pass


@dataclass
class SieveTables:
    """Everything a worker needs: thresholds with their group counts and
    largest orders, and the distinct g_l values for r(d)."""

    hi: int
    thresholds: np.ndarray
    counts: np.ndarray
    max_orders: np.ndarray
    gens: np.ndarray


def sieve_tables(hi: int, cache: ClassNumberCache | None = None) -> SieveTables:
    top = ell_bound(hi)
    cache = cache if cache is not None else shared_cache(top)
    if cache.covered_limit < top:
        cache.extend(top)
    fam = threshold_family(hi, cache)
    vals = fam.values()
    counts = [len(fam.by_value[v]) for v in vals]
    orders = [max(g.order() for g in fam.by_value[v]) for v in vals]
    gens = sorted({cache[ell] * (ell - 1) // 2 for ell in cache.ells()
                   if 3 < ell <= top and cache[ell] * (ell - 1) // 2 <= hi})
    as64 = lambda xs: np.array(xs, dtype=np.int64)
    return SieveTables(hi, as64(vals), as64(counts), as64(orders), as64(gens))


@dataclass
class ChunkResult:
    lo: int
    group_count: np.ndarray
    t_cm: np.ndarray
    rep: np.ndarray
    r: np.ndarray


def _first_index(values: np.ndarray, lo: int) -> np.ndarray:
    """Index (into the odd numbers from lo) of the first odd multiple >= lo."""
    m = -(-lo // values)
    m += (m % 2 == 0)
    return (m * values - lo) // 2


def sieve_chunk(tables: SieveTables, lo: int, hi: int) -> ChunkResult:
    """Statistics for the odd d in [lo, hi] (both odd)."""
    n = (hi - lo) // 2 + 1
    count = np.full(n, UNIVERSAL_COUNT, dtype=np.int32)
    tcm = np.full(n, UNIVERSAL_TCM, dtype=np.int64)
    rep = np.ones(n, dtype=np.int64)
    r = np.ones(n, dtype=np.int32)            # e = 1 from l = 3 always divides

    T = tables.thresholds
    idx = _first_index(T, lo)
    hit = idx < n
    T, idx = T[hit], idx[hit]
    C, M = tables.counts[hit], tables.max_orders[hit]
    few = T >= n                               # at most one multiple in range
    np.add.at(count, idx[few], C[few].astype(np.int32))
    np.maximum.at(tcm, idx[few], M[few])
    np.lcm.at(rep, idx[few], T[few])
    for t, i, c, mo in zip(T[~few].tolist(), idx[~few].tolist(),
                           C[~few].tolist(), M[~few].tolist()):
        count[i::t] += c
        np.maximum(tcm[i::t], mo, out=tcm[i::t])
        np.lcm(rep[i::t], t, out=rep[i::t])

    G = tables.gens[tables.gens <= hi]
    gi = _first_index(G, lo)
    G, gi = G[gi < n], gi[gi < n]
    few = G >= n
    np.add.at(r, gi[few], 1)
    for g, i in zip(G[~few].tolist(), gi[~few].tolist()):
        r[i::g] += 1
    return ChunkResult(lo, count, tcm, rep, r)


# worker-process plumbing
_tables: SieveTables | None = None


def _init_worker(tables: SieveTables) -> None:
    global _tables
    _tables = tables


def _work(bounds: tuple[int, int]) -> ChunkResult:
    return sieve_chunk(_tables, *bounds)


def _chunk_bounds(lo: int, hi: int, width: int) -> list[tuple[int, int]]:
    out = []
    a = lo
    while a <= hi:
        b = min(hi, a + 2 * (width - 1))
        out.append((a, b))
        a = b + 2
    return out


def _check_range(lo: int, hi: int) -> None:
    for v in (lo, hi):
        if v < 1:
            raise ValueError("degrees must be positive")
        if v % 2 == 0:
            raise EvenDegreeError(v)
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")


def iter_chunks(lo: int, hi: int, workers: int = 1, width: int = CHUNK,
                tables: SieveTables | None = None) -> Iterator[ChunkResult]:
    _check_range(lo, hi)
    tables = tables if tables is not None else sieve_tables(hi)
    bounds = _chunk_bounds(lo, hi, width)
    if workers <= 1:
        for b in bounds:
            yield sieve_chunk(tables, *b)
        return
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(tables,)) as pool:
        yield from pool.map(_work, bounds)


# ---------------------------------------------------------------------------
# records and aggregates

@dataclass(frozen=True)
class DegreeRecord:
    d: int
    fingerprint_id: int
    group_count: int
    t_cm: int
    olson: bool
    r: int


@dataclass
class ClassAggregate:
    fingerprint_id: int
    representative: int
    count: int
    empirical_density: float
    interval: object = None            # DensityInterval when certified


@dataclass
class ScanState:
    """Running aggregates; this is what a checkpoint stores."""

    lo: int
    hi: int
    fmt: str
    scanned_up_to: int = 0             # last odd d processed (0 before start)
    output_bytes: int = 0
    reps: list[int] = field(default_factory=lambda: [1])
    rep_ids: dict[int, int] = field(default_factory=lambda: {1: 0})
    counts: list[int] = field(default_factory=lambda: [0])
    best_d: int = 0
    best_count: int = 0

    def intern(self, rep: np.ndarray) -> np.ndarray:
        uniq, first, inv = np.unique(rep, return_index=True, return_inverse=True)
        for k in np.argsort(first, kind="stable").tolist():
            u = int(uniq[k])
            if u not in self.rep_ids:
                self.rep_ids[u] = len(self.reps)
                self.reps.append(u)
                self.counts.append(0)
        ids = np.array([self.rep_ids[int(u)] for u in uniq], dtype=np.int64)[inv]
        for i, c in zip(*np.unique(ids, return_counts=True)):
            self.counts[int(i)] += int(c)
        return ids

    def absorb(self, res: ChunkResult) -> np.ndarray:
        ids = self.intern(res.rep)
        k = int(np.argmax(res.group_count))
        if int(res.group_count[k]) > self.best_count:
            self.best_count = int(res.group_count[k])
            self.best_d = res.lo + 2 * k
        self.scanned_up_to = res.lo + 2 * (res.group_count.size - 1)
        return ids

    def range_size(self) -> int:
        """Number of integers (odd and even) in [lo, scanned_up_to]."""
        return self.scanned_up_to - self.lo + 1

    def aggregates(self) -> list[ClassAggregate]:
        size = self.range_size()
        return [ClassAggregate(i, rep, self.counts[i], self.counts[i] / size)
                for i, rep in enumerate(self.reps)]


def format_chunk(res: ChunkResult, ids: np.ndarray, fmt: str) -> str:
    d = res.lo + 2 * np.arange(res.group_count.size, dtype=np.int64)
    cols = zip(d.tolist(), ids.tolist(), res.group_count.tolist(),
               res.t_cm.tolist(), res.r.tolist())
    if fmt == "csv":
        return "".join(f"{a},{int(i == 0)},{i},{c},{t},{r}\n" for a, i, c, t, r in cols)
    if fmt == "jsonl":
        return "".join(
            f'{{"d":{a},"olson":{"true" if i == 0 else "false"},"fingerprint_id":{i},'
            f'"group_count":{c},"t_cm":{t},"r":{r}}}\n' for a, i, c, t, r in cols)
    raise ValueError(f"unknown format {fmt!r}")


def records(res: ChunkResult, ids: np.ndarray) -> Iterator[DegreeRecord]:
    for k in range(res.group_count.size):
        i = int(ids[k])
        yield DegreeRecord(res.lo + 2 * k, i, int(res.group_count[k]), int(res.t_cm[k]),
                           i == 0, int(res.r[k]))


# ---------------------------------------------------------------------------
# checkpoints

_fp_cache: dict[int, str] = {}


def _fp_text(rep: int) -> str:
    if rep not in _fp_cache:
        _fp_cache[rep] = fingerprint_string(fingerprint(rep)) or "-"
    return _fp_cache[rep]


def write_checkpoint(path: str, state: ScanState) -> None:
    lines = [CHECKPOINT_MAGIC,
             f"scanned_up_to={state.scanned_up_to}",
             f"range={state.lo},{state.hi}",
             f"format={state.fmt}",
             f"output_bytes={state.output_bytes}",
             f"fingerprints={len(state.reps)}"]
    lines += [f"{rep}\t{_fp_text(rep)}" for rep in state.reps]
    lines += ["aggregates",
              f"max_group_count={state.best_d},{state.best_count}",
              f"counts={len(state.counts)}"]
    lines += [f"{i},{c}" for i, c in enumerate(state.counts)]
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def read_checkpoint(path: str) -> ScanState:
    try:
        lines = open(path, encoding="ascii").read().split("\n")
        if lines[0] != CHECKPOINT_MAGIC:
            raise CheckpointError(f"{path}: bad header {lines[0]!r}")
        kv = lambda line, key: line.split("=", 1)[1] if line.startswith(key + "=") else None
        up_to = int(kv(lines[1], "scanned_up_to"))
        lo, hi = (int(x) for x in kv(lines[2], "range").split(","))
        fmt = kv(lines[3], "format")
        out_bytes = int(kv(lines[4], "output_bytes"))
        nfp = int(kv(lines[5], "fingerprints"))
        reps = [int(line.split("\t")[0]) for line in lines[6:6 + nfp]]
        pos = 6 + nfp
        if lines[pos] != "aggregates":
            raise CheckpointError(f"{path}: missing aggregates section")
        best_d, best_count = (int(x) for x in kv(lines[pos + 1], "max_group_count").split(","))
        ncounts = int(kv(lines[pos + 2], "counts"))
        counts = [int(line.split(",")[1]) for line in lines[pos + 3:pos + 3 + ncounts]]
    except (IndexError, ValueError, TypeError, AttributeError) as exc:
        if isinstance(exc, CheckpointError):
            raise
        raise CheckpointError(f"{path}: corrupt checkpoint ({exc})") from exc
    if len(counts) != len(reps) or reps[:1] != [1]:
        raise CheckpointError(f"{path}: fingerprint table and counts disagree")
    return ScanState(lo, hi, fmt, up_to, out_bytes, reps,
                     {r: i for i, r in enumerate(reps)}, counts, best_d, best_count)


# ---------------------------------------------------------------------------
# driver

def scan(lo: int, hi: int, out: IO[str] | None = None, workers: int = 1, fmt: str = "csv",
         checkpoint: str | None = None, output_path: str | None = None,
         width: int = CHUNK, header: bool = True, stop_after: int | None = None) -> ScanState:
    """Scan odd d in [lo, hi], writing one record per degree.

    With ``checkpoint`` the state is saved after every chunk.  Resuming
    needs ``output_path`` (the record file), which is cut back to the byte
    count stored in the checkpoint before appending.  ``stop_after`` ends the
    run after that many chunks (used to test resumption).
    """
    _check_range(lo, hi)
    state = None
    if checkpoint and os.path.exists(checkpoint):
        state = read_checkpoint(checkpoint)
        if (state.lo, state.hi, state.fmt) != (lo, hi, fmt):
            raise CheckpointError("checkpoint belongs to a different scan")
    opened = None
    if output_path is not None:
        if state is not None:
            opened = open(output_path, "r+", encoding="ascii", newline="\n")
            opened.truncate(state.output_bytes)
            opened.seek(state.output_bytes)
        else:
            opened = open(output_path, "w", encoding="ascii", newline="\n")
        out = opened
    if state is None:
        state = ScanState(lo, hi, fmt)
        if out is not None and header and fmt == "csv":
            out.write(CSV_HEADER + "\n")
            state.output_bytes += len(CSV_HEADER) + 1
    start = state.scanned_up_to + 2 if state.scanned_up_to else lo
    try:
        if start <= hi:
            for k, res in enumerate(iter_chunks(start, hi, workers, width), 1):
                ids = state.absorb(res)
                if out is not None:
                    text = format_chunk(res, ids, fmt)
                    out.write(text)
                    state.output_bytes += len(text)
                if checkpoint:
                    if out is not None:
                        out.flush()
                    write_checkpoint(checkpoint, state)
                if stop_after is not None and k >= stop_after:
                    break
    finally:
        if opened is not None:
            opened.close()
    return state


def scan_records(lo: int, hi: int, workers: int = 1) -> tuple[list[DegreeRecord], ScanState]:
    """Small-range convenience: all records in memory."""
    state = ScanState(lo, hi, "csv")
    out = []
    for res in iter_chunks(lo, hi, workers):
        ids = state.absorb(res)
        out.extend(records(res, ids))
    return out, state


def scan_digest(lo: int, hi: int, workers: int = 1, fmt: str = "csv") -> tuple[str, ScanState]:
    """SHA-256 of the full record stream, without keeping it."""

    class _Hash(io.TextIOBase):
        def __init__(self):
            self.h = hashlib.sha256()

        def write(self, s):
            self.h.update(s.encode("ascii"))
            return len(s)

    sink = _Hash()
    state = scan(lo, hi, sink, workers, fmt)
    return sink.h.hexdigest(), state


def max_group_count(lo: int, hi: int, workers: int = 1) -> tuple[int, int]:
    """(d*, #G_CM(d*)) maximizing the group count; ties go to the smaller d."""
    state = scan(lo, hi, None, workers)
    return state.best_d, state.best_count


def certify(aggregates: list[ClassAggregate], up_to: int, z: int, **kw) -> None:
    """Attach density intervals to classes whose representative is <= up_to."""
    from .density import stratum_density
    for agg in aggregates:
        if agg.representative <= up_to:
            agg.interval = stratum_density(agg.representative, z, **kw).interval


# ---------------------------------------------------------------------------
# the degree table

def _m_list(gs: list[TorsionGroup]) -> str:
    ms = sorted(g.order() for g in gs if g.kind != Kind.Z2xZ2)
    return "Z/mZ for m=" + ",".join(map(str, ms)) + " and Z/2Z⊕Z/2Z"


def table_rows(dmax: int, cache: ClassNumberCache | None = None) -> list[tuple[int, str]]:
    rows = []
    for d in range(1, dmax + 1, 2):
        gs = groups(d, cache)
        rep = math.lcm(1, *(threshold(g, cache).value for g in gs))
        if rep == d:
            rows.append((d, _m_list(gs)))
        elif rep == 1:
            rows.append((d, "Olson"))
        else:
            rows.append((d, f"{rep}-Olson"))
    return rows


def table(dmax: int, cache: ClassNumberCache | None = None) -> str:
    if dmax < 1:
        raise ValueError("dmax must be >= 1")
    rows = table_rows(dmax, cache)
    width = len(str(rows[-1][0]))
    return "".join(f"{d:>{width}} | {text}\n" for d, text in rows)
