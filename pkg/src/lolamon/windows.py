"""Sliding-window aggregation in bounded memory.

A window of length ``d`` evaluated every ``p`` nanoseconds is split into
``N = ceil(d / p)`` panes aligned to the evaluation grid: pane ``k``
covers ``(origin + k*p, origin + (k+1)*p]``. Evaluating at grid point
``origin + n*p`` merges panes ``n-N .. n-1``, i.e. the half-open interval
``(now - N*p, now]``. Samples live only in their pane's partial aggregate,
so memory is ``N`` pane states regardless of the sample rate. When ``d``
is not a multiple of ``p`` eviction happens at pane granularity.

The integral uses the trapezoid rule over consecutive samples, counting a
trapezoid only when both of its samples lie inside the window. Each pane
therefore keeps the area between its own samples plus, separately, the
trapezoid that links its first sample to the previous one.
"""

from __future__ import annotations

from typing import Optional

from .frontend.ast import WindowFunction

NS_PER_SECOND = 1_000_000_000


class WindowError(ValueError):
    """Timestamps fed to a window went backwards."""


class WindowState:
    """Base class; build instances with :func:`new_window`."""

    function: WindowFunction

    def __init__(self, duration_ns: Optional[int], period_ns: int, origin_ns: int = 0, zero=0):
        if period_ns <= 0:
            raise ValueError("evaluation period must be positive")
        if duration_ns is not None and duration_ns <= 0:
            raise ValueError("window duration must be positive")
        self.duration_ns = duration_ns
        self.period_ns = period_ns
        self.origin_ns = origin_ns
        self.zero = zero
        self.capacity = 0 if duration_ns is None else -(-duration_ns // period_ns)
        self.last_t: Optional[int] = None
        self.tags: list[Optional[int]] = [None] * self.capacity

    @property
    def unbounded(self) -> bool:
        return self.duration_ns is None

    @property
    def live_panes(self) -> int:
        return sum(tag is not None for tag in self.tags)

    def _pane_of(self, t: int) -> int:
        return -((self.origin_ns - t) // self.period_ns) - 1

    def _check_time(self, t: int) -> None:
        if self.last_t is not None and t < self.last_t:
            raise WindowError(f"sample at {t} ns precedes previous sample at {self.last_t} ns")
        self.last_t = t

    def _span(self, now: int) -> tuple[int, int]:
        """Pane indices [lo, hi) covered at ``now``; evicts older panes."""
        offset = now - self.origin_ns
        if offset % self.period_ns:
            raise ValueError(f"{now} ns is not on the evaluation grid")
        if self.last_t is not None and now < self.last_t:
            raise WindowError(f"evaluation at {now} ns precedes a sample at {self.last_t} ns")
        hi = offset // self.period_ns
        lo = hi - self.capacity
        tags = self.tags
        for slot, tag in enumerate(tags):
            if tag is not None and tag < lo:
                tags[slot] = None
        return lo, hi

    def _slots(self, now: int):
        """Ring slots of the live panes at ``now``, oldest first."""
        lo, hi = self._span(now)
        tags = self.tags
        cap = self.capacity
        for k in range(lo, hi):
            slot = k % cap
            if tags[slot] == k:
                yield slot

    def insert(self, t: int, value) -> None:
        raise NotImplementedError

    def evaluate(self, now: int):
        raise NotImplementedError


class CountWindow(WindowState):
    function = WindowFunction.COUNT

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.counts = [0] * self.capacity
        self.total = 0

    def insert(self, t: int, value) -> None:
        self._check_time(t)
        if self.capacity == 0:
            self.total += 1
            return
        k = self._pane_of(t)
        slot = k % self.capacity
        if self.tags[slot] != k:
            self.tags[slot] = k
            self.counts[slot] = 0
        self.counts[slot] += 1

    def evaluate(self, now: int):
        if self.capacity == 0:
            return self.total
        return sum(self.counts[slot] for slot in self._slots(now))


class SumWindow(WindowState):
    function = WindowFunction.SUM

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.sums = [self.zero] * self.capacity
        self.total = self.zero

    def insert(self, t: int, value) -> None:
        self._check_time(t)
        if self.capacity == 0:
            self.total += value
            return
        k = self._pane_of(t)
        slot = k % self.capacity
        if self.tags[slot] != k:
            self.tags[slot] = k
            self.sums[slot] = value
        else:
            self.sums[slot] += value

    def evaluate(self, now: int):
        if self.capacity == 0:
            return self.total
        total = self.zero
        for slot in self._slots(now):
            total += self.sums[slot]
        return total


class AvgWindow(WindowState):
    function = WindowFunction.AVG

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.sums = [0] * self.capacity
        self.counts = [0] * self.capacity
        self.total = 0
        self.count = 0

    def insert(self, t: int, value) -> None:
        self._check_time(t)
        if self.capacity == 0:
            self.total += value
            self.count += 1
            return
        k = self._pane_of(t)
        slot = k % self.capacity
        if self.tags[slot] != k:
            self.tags[slot] = k
            self.sums[slot] = value
            self.counts[slot] = 1
        else:
            self.sums[slot] += value
            self.counts[slot] += 1

    def evaluate(self, now: int):
        if self.capacity == 0:
            total, count = self.total, self.count
        else:
            total = count = 0
            for slot in self._slots(now):
                total += self.sums[slot]
                count += self.counts[slot]
        if count == 0:
            return None
        return total / count


class _ExtremumWindow(WindowState):
    better = staticmethod(min)

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.extrema = [None] * self.capacity
        self.best = None

    def insert(self, t: int, value) -> None:
        self._check_time(t)
        if self.capacity == 0:
            self.best = value if self.best is None else self.better(self.best, value)
            return
        k = self._pane_of(t)
        slot = k % self.capacity
        if self.tags[slot] != k:
            self.tags[slot] = k
            self.extrema[slot] = value
        else:
            self.extrema[slot] = self.better(self.extrema[slot], value)

    def evaluate(self, now: int):
        if self.capacity == 0:
            return self.best
        best = None
        for slot in self._slots(now):
            v = self.extrema[slot]
            best = v if best is None else self.better(best, v)
        return best


class MinWindow(_ExtremumWindow):
    function = WindowFunction.MIN
    better = staticmethod(min)


class MaxWindow(_ExtremumWindow):
    function = WindowFunction.MAX
    better = staticmethod(max)


class IntegralWindow(WindowState):
    function = WindowFunction.INTEGRAL

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.inner = [0.0] * self.capacity
        self.link = [0.0] * self.capacity
        self.area = 0.0
        self.prev_value = 0.0
        self.has_prev = False

    def insert(self, t: int, value) -> None:
        prev_t = self.last_t
        self._check_time(t)
        step = 0.0
        if self.has_prev:
            step = (self.prev_value + value) * (t - prev_t) / (2 * NS_PER_SECOND)
        self.prev_value = value
        self.has_prev = True
        if self.capacity == 0:
            self.area += step
            return
        k = self._pane_of(t)
        slot = k % self.capacity
        if self.tags[slot] != k:
            self.tags[slot] = k
            self.inner[slot] = 0.0
            self.link[slot] = step
        else:
            self.inner[slot] += step

    def evaluate(self, now: int):
        if self.capacity == 0:
            return self.area
        total = 0.0
        first = True
        for slot in self._slots(now):
            total += self.inner[slot]
            if first:
                first = False
            else:
                total += self.link[slot]
        return total


_CLASSES = {
    WindowFunction.COUNT: CountWindow,
    WindowFunction.SUM: SumWindow,
    WindowFunction.AVG: AvgWindow,
    WindowFunction.MIN: MinWindow,
    WindowFunction.MAX: MaxWindow,
    WindowFunction.INTEGRAL: IntegralWindow,
}


def new_window(
    function: WindowFunction,
    duration_ns: Optional[int],
    period_ns: int,
    origin_ns: int = 0,
    zero=0,
) -> WindowState:
    """Empty window; ``duration_ns`` None makes it unbounded.

    ``zero`` is the empty result of sum windows (``0`` or ``0.0``).
    """
    return _CLASSES[function](duration_ns, period_ns, origin_ns, zero)


def window_insert(state: WindowState, t: int, value) -> WindowState:
    state.insert(t, value)
    return state


def window_evaluate(state: WindowState, now: int):
    """Aggregate over ``(now - d, now]``; None when avg/min/max see no sample."""
    return state.evaluate(now)
