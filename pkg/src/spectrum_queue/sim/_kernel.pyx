# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled event kernel; same contract and arithmetic as ``_kernel_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef enum:
    SOJOURN_LEVELS = 11

cdef int EV_SU_ARRIVAL = 0
cdef int EV_SU_SERVICE = 1
cdef int EV_PU_ARRIVAL = 2
cdef int EV_PU_DEPARTURE = 3


cdef class EventKernel:
    cdef public double lam, xi, mu, eta, q
    cdef public double stop_time, warm_time
    cdef public long long stop_events, warm_events
    cdef public double t, t0, p00_time, sojourn_served, sojourn_resolved
    cdef public int server
    cdef public Py_ssize_t head, tail
    cdef public long long events, completions, joined, served, dismissed, balked
    cdef public bint done, measuring

    cdef object _arr_t, _arr_lvl, _arr_tracked, _level_time
    cdef double[::1] arr_t
    cdef long long[::1] arr_lvl
    cdef signed char[::1] arr_tracked
    cdef double[::1] level_time
    cdef long long lvl_count[SOJOURN_LEVELS]
    cdef double lvl_sum[SOJOURN_LEVELS]
    cdef double lvl_sumsq[SOJOURN_LEVELS]

    backend = "cython"

    def __init__(self, lam, xi, mu, eta, q, stop_time, stop_events, warm_time, warm_events,
                 capacity=256):
        cdef int i
        self.lam = lam
        self.xi = xi
        self.mu = mu
        self.eta = eta
        self.q = q
        self.stop_time = stop_time
        self.stop_events = stop_events
        self.warm_time = warm_time
        self.warm_events = warm_events

        self.t = 0.0
        self.server = 1
        self.head = 0
        self.tail = 0
        self._arr_t = np.zeros(capacity, dtype=np.float64)
        self._arr_lvl = np.zeros(capacity, dtype=np.int64)
        self._arr_tracked = np.zeros(capacity, dtype=np.int8)
        self._level_time = np.zeros(capacity + 1, dtype=np.float64)
        self._bind()

        self.events = 0
        self.done = False
        self.measuring = self.warm_events == 0 and self.warm_time <= 0.0
        self.t0 = 0.0
        self.p00_time = 0.0
        self.completions = 0
        self.joined = 0
        self.served = 0
        self.dismissed = 0
        self.balked = 0
        self.sojourn_served = 0.0
        self.sojourn_resolved = 0.0
        for i in range(SOJOURN_LEVELS):
            self.lvl_count[i] = 0
            self.lvl_sum[i] = 0.0
            self.lvl_sumsq[i] = 0.0

    cdef void _bind(self):
        self.arr_t = self._arr_t
        self.arr_lvl = self._arr_lvl
        self.arr_tracked = self._arr_tracked
        self.level_time = self._level_time

    @property
    def queue_length(self):
        return self.tail - self.head

    def level_times(self):
        return np.array(self._level_time, dtype=np.float64)

    def resolved_by_level(self):
        return (np.array([self.lvl_count[i] for i in range(SOJOURN_LEVELS)], dtype=np.int64),
                np.array([self.lvl_sum[i] for i in range(SOJOURN_LEVELS)], dtype=np.float64),
                np.array([self.lvl_sumsq[i] for i in range(SOJOURN_LEVELS)], dtype=np.float64))

    def residual(self):
        return int(np.asarray(self._arr_tracked[self.head:self.tail]).sum())

    cdef void _make_room(self):
        cdef Py_ssize_t n = self.tail - self.head
        cdef Py_ssize_t cap
        if self.head > 0:
            self._arr_t[:n] = self._arr_t[self.head:self.tail].copy()
            self._arr_lvl[:n] = self._arr_lvl[self.head:self.tail].copy()
            self._arr_tracked[:n] = self._arr_tracked[self.head:self.tail].copy()
            self.head = 0
            self.tail = n
        cap = self._arr_t.shape[0]
        if self.tail == cap:
            self._arr_t = np.concatenate([self._arr_t, np.zeros(cap, dtype=np.float64)])
            self._arr_lvl = np.concatenate([self._arr_lvl, np.zeros(cap, dtype=np.int64)])
            self._arr_tracked = np.concatenate([self._arr_tracked, np.zeros(cap, dtype=np.int8)])
        cap = self._arr_t.shape[0]
        if self._level_time.shape[0] < cap + 1:
            self._level_time = np.concatenate(
                [self._level_time, np.zeros(cap + 1 - self._level_time.shape[0], dtype=np.float64)])
        self._bind()

    cdef inline void _resolve(self, double sojourn, long long level):
        self.sojourn_resolved += sojourn
        if level < SOJOURN_LEVELS:
            self.lvl_count[level] += 1
            self.lvl_sum[level] += sojourn
            self.lvl_sumsq[level] += sojourn * sojourn

    def advance(self, const double[::1] exp_draws, const double[::1] u_event,
                const double[::1] u_join, trace=None):
        cdef double lam = self.lam, xi = self.xi, mu = self.mu, eta = self.eta, q = self.q
        cdef Py_ssize_t used = 0, n_draws = exp_draws.shape[0], n, i
        cdef double total, dt, t_next, start, u, sojourn
        cdef int kind
        cdef bint tracing = trace is not None
        cdef double[::1] tr_time
        cdef signed char[::1] tr_kind
        cdef long long[::1] tr_queue
        cdef signed char[::1] tr_server
        cdef Py_ssize_t k = 0
        if tracing:
            tr_time = trace.time
            tr_kind = trace.kind
            tr_queue = trace.queue
            tr_server = trace.server
            k = trace.length

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
            start = self.t
            if not self.measuring and self.warm_time > 0.0 and t_next >= self.warm_time:
                self.measuring = True
                self.t0 = self.warm_time
                start = self.warm_time
            if self.measuring:
                if self.server == 0:
                    self.p00_time += t_next - start
                else:
                    self.level_time[n] += t_next - start
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
                    if self.tail == self.arr_t.shape[0]:
                        self._make_room()
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
            if tracing:
                tr_time[k] = self.t
                tr_kind[k] = kind
                tr_queue[k] = self.tail - self.head
                tr_server[k] = self.server
                k += 1
            if not self.measuring and self.warm_events > 0 and self.events == self.warm_events:
                self.measuring = True
                self.t0 = self.t
            if self.events == self.stop_events:
                self.done = True
        if tracing:
            trace.length = k
        return used
