"""Pure-Python event kernel.

Mirrors ``_kernel.pyx`` operation for operation so both backends produce
bit-identical statistics from the same random draws.
"""

import numpy as np

SOJOURN_LEVELS = 11

EV_SU_ARRIVAL = 0
EV_SU_SERVICE = 1
EV_PU_ARRIVAL = 2
EV_PU_DEPARTURE = 3


class EventKernel:
    """Advances the SU/PU chain one event per triple of random draws.

    ``stop_time``/``stop_events`` end the run; statistics start after
    ``warm_time`` (horizon mode) or after ``warm_events`` events.
    """

    backend = "python"

    def __init__(self, lam, xi, mu, eta, q, stop_time, stop_events, warm_time, warm_events,
                 capacity=256):
        self.lam = float(lam)
        self.xi = float(xi)
        self.mu = float(mu)
        self.eta = float(eta)
        self.q = float(q)
        self.stop_time = float(stop_time)
        self.stop_events = int(stop_events)
        self.warm_time = float(warm_time)
        self.warm_events = int(warm_events)

        self.t = 0.0
        self.server = 1
        self.head = 0
        self.tail = 0
        self.arr_t = [0.0] * capacity
        self.arr_lvl = [0] * capacity
        self.arr_tracked = [0] * capacity

        self.events = 0
        self.done = False
        self.measuring = self.warm_events == 0 and self.warm_time <= 0.0
        self.t0 = 0.0
        self.p00_time = 0.0
        self.level_time = [0.0] * (capacity + 1)
        self.completions = 0

        self.joined = 0
        self.served = 0
        self.dismissed = 0
        self.balked = 0
        self.sojourn_served = 0.0
        self.sojourn_resolved = 0.0
        self.lvl_count = [0] * SOJOURN_LEVELS
        self.lvl_sum = [0.0] * SOJOURN_LEVELS
        self.lvl_sumsq = [0.0] * SOJOURN_LEVELS

    @property
    def queue_length(self):
        return self.tail - self.head

    def level_times(self):
        return np.array(self.level_time, dtype=np.float64)

    def resolved_by_level(self):
        return (np.array(self.lvl_count, dtype=np.int64),
                np.array(self.lvl_sum, dtype=np.float64),
                np.array(self.lvl_sumsq, dtype=np.float64))

    def residual(self):
        return sum(self.arr_tracked[self.head:self.tail])

    def _make_room(self):
        n = self.tail - self.head
        if self.head > 0:
            self.arr_t[:n] = self.arr_t[self.head:self.tail]
            self.arr_lvl[:n] = self.arr_lvl[self.head:self.tail]
            self.arr_tracked[:n] = self.arr_tracked[self.head:self.tail]
            self.head, self.tail = 0, n
        if self.tail == len(self.arr_t):
            extra = len(self.arr_t)
            self.arr_t.extend([0.0] * extra)
            self.arr_lvl.extend([0] * extra)
            self.arr_tracked.extend([0] * extra)
        if len(self.level_time) < len(self.arr_t) + 1:
            self.level_time.extend([0.0] * (len(self.arr_t) + 1 - len(self.level_time)))

    def _resolve(self, sojourn, level):
        self.sojourn_resolved += sojourn
        if level < SOJOURN_LEVELS:
            self.lvl_count[level] += 1
            self.lvl_sum[level] += sojourn
            self.lvl_sumsq[level] += sojourn * sojourn

    def advance(self, exp_draws, u_event, u_join, trace=None):
        """Consume draws until they run out or the run ends; return how many were used."""
        lam, xi, mu, eta, q = self.lam, self.xi, self.mu, self.eta, self.q
        level_time = self.level_time
        used = 0
        n_draws = len(exp_draws)
        while used < n_draws and not self.done:
            n = self.tail - self.head
            if self.server == 0:
                total = lam + eta
            elif n == 0:
                total = lam + xi
            else:
                total = lam + xi + mu
            dt = exp_draws[used] / total
            t_next = self.t + dt
            if t_next > self.stop_time:
                t_next = self.stop_time
                self.done = True
            # time accounting for the interval spent in the current state
            start = self.t
            if not self.measuring and self.warm_time > 0.0 and t_next >= self.warm_time:
                self.measuring = True
                self.t0 = self.warm_time
                start = self.warm_time
            if self.measuring:
                span = t_next - start
                if self.server == 0:
                    self.p00_time += span
                else:
                    level_time[n] += span
            self.t = t_next
            if self.done:
                break

            u = u_event[used] * total
            if u < lam:
                kind = EV_SU_ARRIVAL
                if self.server == 0:
                    if self.measuring:
                        self.balked += 1
                elif u_join[used] < q:
                    if self.tail == len(self.arr_t):
                        self._make_room()
                        level_time = self.level_time
                    self.arr_t[self.tail] = self.t
                    self.arr_lvl[self.tail] = n
                    self.arr_tracked[self.tail] = 1 if self.measuring else 0
                    self.tail += 1
                    if self.measuring:
                        self.joined += 1
                elif self.measuring:
                    self.balked += 1
            elif self.server == 0:
                kind = EV_PU_DEPARTURE
                self.server = 1
            elif u < lam + xi:
                kind = EV_PU_ARRIVAL
                for i in range(self.head, self.tail):
                    if self.arr_tracked[i]:
                        self.dismissed += 1
                        self._resolve(self.t - self.arr_t[i], self.arr_lvl[i])
                self.head = 0
                self.tail = 0
                self.server = 0
            else:
                kind = EV_SU_SERVICE
                i = self.head
                if self.arr_tracked[i]:
                    sojourn = self.t - self.arr_t[i]
                    self.served += 1
                    self.sojourn_served += sojourn
                    self._resolve(sojourn, self.arr_lvl[i])
                self.head += 1
                if self.head == self.tail:
                    self.head = 0
                    self.tail = 0
                if self.measuring:
                    self.completions += 1

            used += 1
            self.events += 1
            if trace is not None:
                k = trace.length
                trace.time[k] = self.t
                trace.kind[k] = kind
                trace.queue[k] = self.tail - self.head
                trace.server[k] = self.server
                trace.length = k + 1
            if not self.measuring and self.warm_events > 0 and self.events == self.warm_events:
                self.measuring = True
                self.t0 = self.t
            if self.events == self.stop_events:
                self.done = True
        return used

