from fractions import Fraction
from unittest import TestCase

from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st

from test import testing_common  # noqa: F401

from orliczlab.lib.exceptions import (
    ExponentDomainError,
    ExponentParseError,
    InvalidPermutation,
    RankMismatch,
)
from orliczlab.lib.exponents import (
    INF,
    ONE,
    TWO,
    ExponentTuple,
    ExtExp,
    ProblemSpec,
    conjugate,
    cotcrit_admissible,
    cotcrit_thresholds,
    delta,
    dual_space_cotype,
    lambda_,
    mu,
    optimal_inner_exponent,
    orl_admissible,
    orl_thresholds,
    parse_exponent,
    space_cotype,
)

# exponents in (1, inf] with small rational reciprocals
open_exponents = st.fractions(
    min_value=0, max_value=Fraction(23, 24), max_denominator=24).map(ExtExp)
space_exponents = st.fractions(
    min_value=0, max_value=1, max_denominator=24).map(ExtExp)
# codomain exponents r in [2, inf)
cotype_exponents = st.fractions(
    min_value=Fraction(1, 24), max_value=Fraction(1, 2), max_denominator=24).map(ExtExp)


class TestParsing(TestCase):
    def test_accepted_forms(self):
        self.assertEqual(INF, parse_exponent('inf'))
        self.assertEqual(INF, parse_exponent(' Infinity '))
        self.assertEqual(ExtExp.of(4), parse_exponent('4'))
        self.assertEqual(ExtExp.of(Fraction(4, 3)), parse_exponent('4/3'))
        self.assertEqual(ExtExp.of(Fraction(6, 5)),
                         parse_exponent('1.2', allow_decimal=True))

    def test_rejected_forms(self):
        for text in ['', 'abc', '0', '3/0', '-2', '1/2/3']:
            with self.assertRaises(ExponentParseError, msg=text):
                parse_exponent(text)
        with self.assertRaises(ExponentParseError):
            parse_exponent('1.2')

    def test_parse_errors_are_domain_errors(self):
        self.assertTrue(issubclass(ExponentParseError, ExponentDomainError))

    def test_tuple(self):
        p = ExponentTuple.parse('inf, 4/3,2')
        self.assertEqual((INF, ExtExp.of(Fraction(4, 3)), TWO), tuple(p))
        self.assertEqual(['inf', '4/3', '2'], p.to_json())
        self.assertEqual('(inf, 4/3, 2)', str(p))
        with self.assertRaises(ExponentDomainError):
            ExponentTuple([])

    def test_ordering_by_value(self):
        self.assertLess(ONE, TWO)
        self.assertLess(TWO, INF)
        self.assertGreaterEqual(ExtExp.of(4), 4)
        self.assertEqual(sorted([INF, ONE, ExtExp.of(3)]),
                         [ONE, ExtExp.of(3), INF])

    def test_float_reciprocal_rejected(self):
        with self.assertRaises(ExponentDomainError):
            ExtExp(0.5)


class TestExponentCalculus(TestCase):
    def test_conjugate(self):
        self.assertEqual(INF, conjugate(ONE))
        self.assertEqual(ONE, conjugate(INF))
        self.assertEqual(TWO, conjugate(TWO))
        self.assertEqual(ExtExp.of(Fraction(4, 3)), conjugate(ExtExp.of(4)))
        with self.assertRaises(ExponentDomainError):
            conjugate(ExtExp.of(Fraction(1, 2)))

    @given(open_exponents)
    def test_conjugate_is_an_involution(self, p):
        self.assertEqual(p, conjugate(conjugate(p)))

    def test_delta(self):
        self.assertEqual(TWO, delta([INF, TWO]))
        self.assertEqual(INF, delta([TWO, TWO]))
        self.assertEqual(INF, delta([ONE]))
        self.assertEqual(ExtExp.of(4), delta([ExtExp.of(4), TWO]))
        with self.assertRaises(ExponentDomainError):
            delta([])

    def test_lambda(self):
        self.assertEqual(TWO, lambda_(TWO, [INF, INF]))
        self.assertEqual(INF, lambda_(TWO, [ExtExp.of(4), ExtExp.of(4)]))
        self.assertEqual(ExtExp.of(4), lambda_(TWO, [ExtExp.of(4), INF]))
        with self.assertRaises(ExponentDomainError):
            lambda_(ExtExp.of(Fraction(3, 2)), [INF])
        with self.assertRaises(ExponentDomainError):
            lambda_(INF, [INF])

    def test_mu_and_cotype(self):
        self.assertEqual(TWO, mu(INF))
        self.assertEqual(TWO, mu(ExtExp.of(3)))
        self.assertEqual(ExtExp.of(Fraction(3, 2)), mu(ExtExp.of(Fraction(3, 2))))
        self.assertEqual(ONE, mu(ONE))
        self.assertEqual(TWO, space_cotype(ONE))
        self.assertEqual(ExtExp.of(3), space_cotype(ExtExp.of(3)))
        self.assertEqual(INF, space_cotype(INF))
        self.assertEqual(TWO, dual_space_cotype(INF))
        self.assertEqual(ExtExp.of(4), dual_space_cotype(ExtExp.of(Fraction(4, 3))))

    def test_optimal_inner_exponent(self):
        self.assertEqual(ONE, optimal_inner_exponent(INF))
        self.assertEqual(ExtExp.of(Fraction(4, 3)), optimal_inner_exponent(ExtExp.of(4)))

    @hypothesis_settings(deadline=None, max_examples=100)
    @given(st.lists(space_exponents, min_size=1, max_size=4), open_exponents)
    def test_delta_with_mu_is_lambda_of_dual_cotype(self, s, p):
        """delta(s, mu) = lambda_r(s) with r = max{p*, 2}."""
        r = dual_space_cotype(p)
        self.assertEqual(delta(list(s) + [mu(p)]), lambda_(r, s))

    def test_delta_lambda_identity_on_grid(self):
        reciprocals = [Fraction(k, 10) for k in range(10)]
        count = 0
        for a in reciprocals:
            for b in reciprocals:
                s = [ExtExp(a), ExtExp(b / 2)]
                p = ExtExp(b)
                r = dual_space_cotype(p)
                self.assertEqual(delta(s + [mu(p)]), lambda_(r, s))
                count += 1
        self.assertEqual(100, count)

    @hypothesis_settings(deadline=None, max_examples=100)
    @given(st.lists(space_exponents, min_size=1, max_size=4), space_exponents)
    def test_delta_grows_with_an_extra_exponent(self, s, t):
        self.assertGreaterEqual(delta(list(s) + [t]), delta(s))

    @hypothesis_settings(deadline=None, max_examples=100)
    @given(st.lists(space_exponents, min_size=1, max_size=4), cotype_exponents,
           cotype_exponents)
    def test_lambda_is_nondecreasing_in_r(self, s, r1, r2):
        small, large = sorted([r1, r2])
        self.assertLessEqual(lambda_(small, s), lambda_(large, s))

    @hypothesis_settings(deadline=None, max_examples=100)
    @given(st.lists(st.tuples(st.integers(1, 12), st.integers(1, 12)),
                    min_size=2, max_size=4),
           st.integers(2, 7))
    def test_thresholds_ignore_common_factors(self, pairs, k):
        """Unreduced 'a/b' strings give the same thresholds as reduced ones."""
        # exponent b/a >= 1
        pairs = [(min(a, b), max(a, b)) for a, b in pairs]
        reduced = [str(Fraction(b, a)) for a, b in pairs]
        scaled = [f"{b * k}/{a * k}" for a, b in pairs]
        self.assertEqual(delta(ExponentTuple(reduced)), delta(ExponentTuple(scaled)))
        self.assertEqual(lambda_(TWO, ExponentTuple(reduced)),
                         lambda_(parse_exponent(f"{2 * k}/{k}"), ExponentTuple(scaled)))
        spec = ProblemSpec(m=len(pairs), p=reduced)
        spec_scaled = ProblemSpec(m=len(pairs), p=scaled)
        self.assertEqual(orl_thresholds(spec), orl_thresholds(spec_scaled))


class TestProblemSpec(TestCase):
    def test_defaults(self):
        spec = ProblemSpec(m=2, p=['inf', 'inf'])
        self.assertEqual((1, 2), spec.sigma)
        self.assertTrue(spec.is_orlicz())
        self.assertEqual(INF, spec.innermost)

    def test_invalid(self):
        with self.assertRaises(RankMismatch):
            ProblemSpec(m=3, p=['inf', 'inf'])
        with self.assertRaises(ExponentDomainError):
            ProblemSpec(m=2, p=['inf', '1/2'])
        with self.assertRaises(ExponentDomainError):
            ProblemSpec(m=1, p=['inf'])
        with self.assertRaises(InvalidPermutation):
            ProblemSpec(m=2, p=['inf', 'inf'], sigma=(1, 1))

    def test_permuted_exponents(self):
        spec = ProblemSpec(m=3, p=['2', '3', '4'], sigma=(3, 1, 2))
        self.assertEqual(ExponentTuple(['4', '2', '3']), spec.p_sigma)
        self.assertEqual(ExtExp.of(3), spec.innermost)

    def test_json_round_trip(self):
        spec = ProblemSpec(m=3, p=['inf', '4/3', '2'], sigma=(2, 3, 1))
        self.assertEqual(spec, ProblemSpec.from_json(spec.to_json()))


class TestAdmissibility(TestCase):
    def test_orlicz_thresholds(self):
        inner, thresholds = orl_thresholds(ProblemSpec(m=2, p=['inf', 'inf']))
        self.assertEqual(ONE, inner)
        self.assertEqual(ExponentTuple([TWO]), thresholds)

    def test_trilinear_thresholds(self):
        inner, thresholds = orl_thresholds(ProblemSpec(m=3, p=['inf'] * 3))
        self.assertEqual(ONE, inner)
        self.assertEqual(ExponentTuple([TWO, TWO]), thresholds)

    def test_l4_thresholds(self):
        inner, thresholds = orl_thresholds(ProblemSpec(m=2, p=['4', '4']))
        self.assertEqual(ExtExp.of(Fraction(4, 3)), inner)
        self.assertEqual(ExponentTuple(['4']), thresholds)

    def test_threshold_equality_is_admissible(self):
        spec = ProblemSpec(m=2, p=['4', '4'])
        self.assertTrue(orl_admissible(spec, ['4']).admissible)
        self.assertFalse(orl_admissible(spec, ['39/10']).admissible)
        self.assertTrue(orl_admissible(spec, ['inf']).admissible)

    def test_degenerate_last_exponent(self):
        spec = ProblemSpec(m=2, p=['3', '1'])
        verdict = orl_admissible(spec, ['inf'])
        self.assertTrue(verdict.degenerate)
        self.assertTrue(verdict.admissible)
        self.assertEqual(ExponentTuple([INF]), verdict.thresholds)
        self.assertFalse(orl_admissible(spec, ['100']).admissible)

    def test_wrong_length(self):
        spec = ProblemSpec(m=2, p=['inf', 'inf'])
        with self.assertRaises(ExponentDomainError):
            orl_admissible(spec, ['2', '1'])

    def test_cotcrit(self):
        self.assertEqual(
            ExponentTuple(['inf', '4']),
            cotcrit_thresholds(['4', '4'], TWO))
        self.assertEqual(
            ExponentTuple(['2', '2']), cotcrit_thresholds(['inf', 'inf'], TWO))
        self.assertTrue(cotcrit_admissible(['4', '4'], TWO, ['inf', '4']).admissible)
        self.assertFalse(cotcrit_admissible(['4', '4'], TWO, ['2', '4']).admissible)
        with self.assertRaises(ExponentDomainError):
            cotcrit_admissible(['4', '4'], TWO, ['inf'])

    @hypothesis_settings(deadline=None, max_examples=100)
    @given(st.lists(space_exponents, min_size=2, max_size=4), st.data())
    def test_admissibility_is_monotone_in_q(self, p, data):
        spec = ProblemSpec(m=len(p), p=p)
        q = data.draw(st.lists(open_exponents, min_size=len(p) - 1,
                               max_size=len(p) - 1))
        larger = [max(qi, data.draw(open_exponents)) for qi in q]
        if orl_admissible(spec, q).admissible:
            self.assertTrue(orl_admissible(spec, larger).admissible)
