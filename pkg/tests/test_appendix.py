from fractions import Fraction

from ballharm.services.appendix import check_circle, check_sphere, sphere_index, upper_coeff


def test_circle_table_holds():
    checks = check_circle(8)
    assert checks
    assert all(check.passed and check.printed_holds for check in checks)


def test_two_sphere_table_holds_with_doubled_order_zero_coefficient():
    checks = check_sphere(8)
    assert all(check.passed for check in checks)
    printed_failures = [check for check in checks if not check.printed_holds]
    assert printed_failures
    assert all(check.k == 0 and check.axis in (1, 2) for check in printed_failures)


def test_upper_coefficient():
    assert upper_coeff(0, 1, 1) == 1
    assert upper_coeff(0, 1, 1, corrected=False) == Fraction(1, 2)
    assert upper_coeff(3, 2, 2) == Fraction(7, 2)


def test_sphere_index_zero_conventions():
    assert sphere_index(0, 2, 3) is None
    assert sphere_index(4, 1, 3) is None
    assert sphere_index(1, 2, 3).n == (1, 0, 2)
