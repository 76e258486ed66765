"""Fast invariant battery behind ``infoflux selftest``."""

from __future__ import annotations

import math

import numpy as np

from .engines import AdiabaticEngine, AnalogEngine, CircuitEngine
from .entangle import bipartite_concurrence, multipartite_concurrence
from .infoflow import FlowEstimator, proposition_check, proposition_tolerance, trace_distance
from .qla import is_unitary, matexp_unitary, partial_trace
from .redyn import apply, channel_at, direct_reduced_state


def _random_density(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _checks(n: int):
    rng = np.random.default_rng(2024)
    engines = [CircuitEngine(n), AnalogEngine(n), AdiabaticEngine(n)]

    def grover_closed_form():
        eng = CircuitEngine(n, k_max=20)
        probs = eng.trajectory(np.arange(21)).success_probabilities()
        theta = math.asin(2.0 ** (-n / 2))
        expect = np.sin((2 * np.arange(21) + 1) * theta) ** 2
        return float(np.max(np.abs(probs - expect))) < 1e-10

    def analog_certainty():
        eng = engines[1]
        return abs(eng.states([eng.run_time])[0][0]) ** 2 > 1 - 1e-9

    def unitarity():
        h = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
        return is_unitary(matexp_unitary(h + h.conj().T, 37.0))

    def channel_oracle():
        worst = 0.0
        for eng in engines:
            t = 0.37 * eng.run_time if not eng.discrete else 3.0
            snap = channel_at(eng, t, 1)
            for _ in range(5):
                rho = _random_density(rng, 2)
                worst = max(worst, np.max(np.abs(apply(snap, rho) - direct_reduced_state(eng, t, rho, 1))))
        return worst < 1e-10

    def contractivity():
        ok = True
        for eng in engines:
            est = FlowEstimator(eng, 1, 200, seed=5)
            d = est.distances(eng.default_grid(21))
            ok &= bool(np.all(d <= 1.0 + 1e-9))
        return ok

    def proposition():
        ok = True
        for eng in engines:
            est = FlowEstimator(eng, 1, 300, seed=9)
            for rec in est.records(eng.default_grid(9)):
                ok &= proposition_check(rec, eng) < proposition_tolerance(rec.sigma)
        return ok

    def entanglement_values():
        bell = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
        ghz = np.zeros(2**8, dtype=complex)
        ghz[0] = ghz[-1] = 1 / math.sqrt(2)
        plus = np.full(2**n, 2.0 ** (-n / 2), dtype=complex)
        return (abs(bipartite_concurrence(bell) - 1) < 1e-10
                and abs(multipartite_concurrence(ghz) - math.sqrt(127) / 8) < 1e-9
                and multipartite_concurrence(plus) < 1e-9)

    def partial_trace_linear():
        a, b = _random_density(rng, 2**n), _random_density(rng, 2**n)
        lhs = partial_trace(0.3 * a + 0.7 * b, n, {0})
        rhs = 0.3 * partial_trace(a, n, {0}) + 0.7 * partial_trace(b, n, {0})
        return np.max(np.abs(lhs - rhs)) < 1e-10

    def distance_bounds():
        r0, r1 = _random_density(rng, 4), _random_density(rng, 4)
        d = trace_distance(r0, r1)
        return 0.0 <= d <= 1.0

    return [
        ("grover closed form", grover_closed_form),
        ("analog reaches target", analog_certainty),
        ("matrix exponential unitary", unitarity),
        ("channel snapshot vs direct simulation", channel_oracle),
        ("trace distance contractive", contractivity),
        ("flow / min-entropy identity", proposition),
        ("analytic concurrences", entanglement_values),
        ("partial trace linear", partial_trace_linear),
        ("trace distance in [0, 1]", distance_bounds),
    ]


def run_selftest(quick: bool = False) -> bool:
    n = 4 if quick else 6
    all_ok = True
    for name, check in _checks(n):
        try:
            ok = bool(check())
        except Exception as exc:  # report and keep going
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return all_ok
