"""Acceptance gate: every shipped claim, one criterion per test.

Each test drives the matching self-check at full scale and prints one
PASS/FAIL line per result (visible under pytest -s; `levyexit validate`
prints the same lines).  The Monte Carlo cross-check dominates the runtime
at a few minutes; everything else is seconds.
"""

from levyexit.validation import (
    check_byte_determinism,
    check_convergence_order,
    check_duality,
    check_escape_crossing,
    check_escape_eps_trend,
    check_met_a_trend,
    check_met_eps_trend,
    check_pure_gaussian,
    check_pure_stable_benchmark,
    check_sampler_fidelity,
    check_special_functions,
    check_steady_states,
)


def _report(results):
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: "
              f"measured {r.measured}; expected {r.expected}")
    assert all(r.passed for r in results), "; ".join(
        r.name for r in results if not r.passed)


def test_criterion_01_steady_states():
    _report(check_steady_states())


def test_criterion_02_pure_stable_mc_benchmark():
    _report(check_pure_stable_benchmark())


def test_criterion_03_pure_gaussian_closed_forms():
    _report(check_pure_gaussian())


def test_criterion_04_escape_duality():
    _report(check_duality())


def test_criterion_05_convergence_order():
    _report(check_convergence_order())


def test_criterion_06_met_decreases_in_epsilon():
    _report(check_met_eps_trend())


def test_criterion_07_met_decreases_in_a():
    _report(check_met_a_trend())


def test_criterion_08_escape_curves_cross_in_alpha():
    _report(check_escape_crossing())


def test_criterion_09_extinction_probability_falls_with_epsilon():
    _report(check_escape_eps_trend())


def test_criterion_10_sampler_characteristic_function():
    _report(check_sampler_fidelity())


def test_criterion_11_special_function_values():
    _report(check_special_functions())


def test_criterion_12_byte_determinism_across_workers():
    _report(check_byte_determinism())
