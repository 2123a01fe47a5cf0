"""Wall-clock comparison of movement schemes on streamline traces.

For each step size the harness traces the same seeds with the naive
scheme once and with the error-checked guided scheme per error parameter,
verifying that every run takes the same number of steps inside the mesh
(otherwise the comparison is meaningless and the rows are flagged).
Timings are best-of-N on a monotonic clock, single-threaded.
"""

import time
from dataclasses import dataclass

from .trace import TraceConfig, rk2_trace


@dataclass
class BenchRecord:
    """One timed configuration; speedup is naive time over scheme time."""

    scheme: str
    h: float
    err_max: float | None
    seconds: float
    steps_inside: int
    speedup: float | None = None
    flagged: bool = False


def _time_traces(fld, seeds, cfg, repetitions):
    best = None
    steps = 0
    for _ in range(repetitions):
        start = time.perf_counter()
        steps = 0
        for seed in seeds:
            result = rk2_trace(fld, seed, cfg)
            steps += result.steps_inside
        elapsed = time.perf_counter() - start
        if best is None or elapsed < best:
            best = elapsed
    return best, steps


def cmd_bench(fld, seeds, h_list, err_list, repetitions=5, total_time=18.0,
              n_steps=None):
    """Bench naive vs error-checked guided search over a parameter grid.

    Without an explicit ``n_steps``, each step size h runs for the same
    integration time (round(total_time / h) steps), so step counts inside
    the mesh match across schemes by construction as long as the trace
    stays inside. Returns one BenchRecord per (scheme, h) cell; guided
    rows carry speedups relative to the naive row of the same h, and are
    flagged (without a speedup) when step counts differ.
    """
    records = []
    for h in h_list:
        steps = n_steps if n_steps is not None else max(1, round(total_time / h))
        naive_cfg = TraceConfig(h=h, n_steps=steps, scheme="naive")
        naive_s, naive_steps = _time_traces(fld, seeds, naive_cfg, repetitions)
        records.append(
            BenchRecord("naive", h, None, naive_s, naive_steps)
        )
        for err in err_list:
            cfg = TraceConfig(h=h, n_steps=steps, scheme="checked", err_max=err)
            secs, inside = _time_traces(fld, seeds, cfg, repetitions)
            rec = BenchRecord("checked", h, err, secs, inside)
            if inside == naive_steps:
                rec.speedup = naive_s / secs if secs > 0 else None
            else:
                rec.flagged = True
            records.append(rec)
    return records


def write_bench_csv(records, path):
    """CSV with one row per step size and one column pair per error value."""
    errs = sorted({r.err_max for r in records if r.err_max is not None})
    hs = []
    for r in records:
        if r.h not in hs:
            hs.append(r.h)
    by_key = {(r.scheme, r.h, r.err_max): r for r in records}
    with open(path, "w") as f:
        cols = ["h", "naive_seconds", "naive_steps"]
        for e in errs:
            cols += [f"checked_seconds_err={e:g}", f"speedup_err={e:g}"]
        f.write(",".join(cols) + "\n")
        for h in hs:
            naive = by_key[("naive", h, None)]
            row = [f"{h:g}", f"{naive.seconds:.6f}", str(naive.steps_inside)]
            for e in errs:
                rec = by_key.get(("checked", h, e))
                if rec is None:
                    row += ["", ""]
                elif rec.flagged:
                    row += [f"{rec.seconds:.6f}", "flagged"]
                else:
                    row += [f"{rec.seconds:.6f}", f"{rec.speedup:.3f}"]
            f.write(",".join(row) + "\n")
