//! Closed algebra of phase-space functions of the form P(x, p) * exp(-k*Q),
//! where P is a polynomial, k a non-negative integer, and Q the quadratic
//! form of a fixed Gaussian envelope. Sums, products, partial derivatives,
//! Poisson brackets, and the quartic Moyal bracket all stay inside this
//! family, so the defining identities of the effective Hamiltonian can be
//! checked coefficient-wise instead of by sampling.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::phase::{GaussianWignerState, PhasePoint, QuarticModel};

/// Largest tracked total degree of the polynomial part. Nested brackets of
/// the quartic expressions stay well below this.
pub const MAX_DEGREE: u32 = 16;

/// Coefficients below `PRUNE_REL * max|c|` are dropped after every operation
/// so cancellation noise cannot masquerade as a nonzero residual.
pub const PRUNE_REL: f64 = 1e-14;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("operands are built over different Gaussian envelopes")]
    EnvelopeMismatch,
    #[error("envelope powers differ: k = {0} vs k = {1}")]
    PowerMismatch(u32, u32),
    #[error("total degree {0} exceeds the tracked maximum {MAX_DEGREE}")]
    DegreeOverflow(u32),
}

/// P(x, p) * exp(-k * Q(x, p)) with a sparse monomial map for P.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGauss {
    envelope: GaussianWignerState,
    k: u32,
    coeffs: BTreeMap<(u32, u32), f64>,
}

impl PolyGauss {
    /// The zero element at a given envelope power.
    pub fn zero(envelope: GaussianWignerState, k: u32) -> Self {
        Self {
            envelope,
            k,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(envelope: GaussianWignerState, k: u32, c: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        if c != 0.0 {
            coeffs.insert((0, 0), c);
        }
        Self { envelope, k, coeffs }
    }

    /// Single monomial c * x^a * p^b * exp(-k*Q).
    pub fn monomial(
        envelope: GaussianWignerState,
        k: u32,
        a: u32,
        b: u32,
        c: f64,
    ) -> Result<Self, AlgebraError> {
        if a + b > MAX_DEGREE {
            return Err(AlgebraError::DegreeOverflow(a + b));
        }
        let mut coeffs = BTreeMap::new();
        if c != 0.0 {
            coeffs.insert((a, b), c);
        }
        Ok(Self { envelope, k, coeffs })
    }

    pub fn from_terms(
        envelope: GaussianWignerState,
        k: u32,
        terms: &[(u32, u32, f64)],
    ) -> Result<Self, AlgebraError> {
        let mut out = Self::zero(envelope, k);
        for &(a, b, c) in terms {
            if a + b > MAX_DEGREE {
                return Err(AlgebraError::DegreeOverflow(a + b));
            }
            if c != 0.0 {
                *out.coeffs.entry((a, b)).or_insert(0.0) += c;
            }
        }
        out.prune();
        Ok(out)
    }

    /// The normalized Gaussian ansatz itself: (1/(2 pi sx sp)) * exp(-Q).
    pub fn ansatz(state: GaussianWignerState) -> Self {
        let norm = 1.0 / (2.0 * std::f64::consts::PI * state.sigma_x() * state.sigma_p());
        Self::constant(state, 1, norm)
    }

    /// The quartic Hamiltonian p^2/2 + x^2/2 + g x^4/4 as a k = 0 element.
    pub fn hamiltonian(model: &QuarticModel, envelope: GaussianWignerState) -> Self {
        Self::from_terms(envelope, 0, &[(0, 2, 0.5), (2, 0, 0.5), (4, 0, model.g() / 4.0)])
            .expect("degree 4 is tracked")
    }

    /// The envelope quadratic form Q expanded as a k = 0 polynomial.
    pub fn q_poly(envelope: GaussianWignerState) -> Self {
        let sx2 = envelope.sigma_x() * envelope.sigma_x();
        let sp2 = envelope.sigma_p() * envelope.sigma_p();
        let (x0, p0) = (envelope.x0(), envelope.p0());
        Self::from_terms(
            envelope,
            0,
            &[
                (2, 0, 0.5 / sx2),
                (1, 0, -x0 / sx2),
                (0, 2, 0.5 / sp2),
                (0, 1, -p0 / sp2),
                (0, 0, 0.5 * x0 * x0 / sx2 + 0.5 * p0 * p0 / sp2),
            ],
        )
        .expect("degree 2 is tracked")
    }

    #[inline]
    pub fn envelope(&self) -> &GaussianWignerState {
        &self.envelope
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of x^a p^b (zero when absent).
    pub fn coeff(&self, a: u32, b: u32) -> f64 {
        self.coeffs.get(&(a, b)).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.coeffs.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|&(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn prune(&mut self) {
        let max = self.max_abs_coeff();
        if max == 0.0 {
            self.coeffs.clear();
        } else {
            let cut = PRUNE_REL * max;
            self.coeffs.retain(|_, c| c.abs() > cut);
        }
    }

    fn check_envelope(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.envelope != other.envelope {
            return Err(AlgebraError::EnvelopeMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_envelope(other)?;
        if self.k != other.k {
            return Err(AlgebraError::PowerMismatch(self.k, other.k));
        }
        let mut out = self.clone();
        for (&key, &c) in &other.coeffs {
            *out.coeffs.entry(key).or_insert(0.0) += c;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= factor;
        }
        out.prune();
        out
    }

    /// Polynomial product; envelope powers add.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_envelope(other)?;
        let mut out = Self::zero(self.envelope, self.k + other.k);
        for (&(a1, b1), &c1) in &self.coeffs {
            for (&(a2, b2), &c2) in &other.coeffs {
                let (a, b) = (a1 + a2, b1 + b2);
                if a + b > MAX_DEGREE {
                    return Err(AlgebraError::DegreeOverflow(a + b));
                }
                *out.coeffs.entry((a, b)).or_insert(0.0) += c1 * c2;
            }
        }
        out.prune();
        Ok(out)
    }

    /// Exact partial derivative in x: (dP/dx - k P dQ/dx) exp(-kQ).
    pub fn dx(&self) -> Result<Self, AlgebraError> {
        let sx2 = self.envelope.sigma_x() * self.envelope.sigma_x();
        self.derivative(true, 1.0 / sx2, self.envelope.x0() / sx2)
    }

    /// Exact partial derivative in p: (dP/dp - k P dQ/dp) exp(-kQ).
    pub fn dp(&self) -> Result<Self, AlgebraError> {
        let sp2 = self.envelope.sigma_p() * self.envelope.sigma_p();
        self.derivative(false, 1.0 / sp2, self.envelope.p0() / sp2)
    }

    fn derivative(
        &self,
        along_x: bool,
        inv_sigma2: f64,
        center_over_sigma2: f64,
    ) -> Result<Self, AlgebraError> {
        let mut out = Self::zero(self.envelope, self.k);
        let kf = self.k as f64;
        for (&(a, b), &c) in &self.coeffs {
            // dP term lowers the degree by one.
            let power = if along_x { a } else { b };
            if power > 0 {
                let key = if along_x { (a - 1, b) } else { (a, b - 1) };
                *out.coeffs.entry(key).or_insert(0.0) += power as f64 * c;
            }
            if self.k > 0 {
                // -k P (x - x0)/sx^2 (or the p analogue): raises degree by one.
                let up = if along_x { (a + 1, b) } else { (a, b + 1) };
                if up.0 + up.1 > MAX_DEGREE {
                    return Err(AlgebraError::DegreeOverflow(up.0 + up.1));
                }
                *out.coeffs.entry(up).or_insert(0.0) -= kf * inv_sigma2 * c;
                *out.coeffs.entry((a, b)).or_insert(0.0) += kf * center_over_sigma2 * c;
            }
        }
        out.prune();
        Ok(out)
    }

    /// Poisson bracket {self, other} = dx(self) dp(other) - dp(self) dx(other).
    pub fn poisson(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_envelope(other)?;
        let lhs = self.dx()?.mul(&other.dp()?)?;
        let rhs = self.dp()?.mul(&other.dx()?)?;
        lhs.sub(&rhs)
    }

    /// Numerical evaluation P(x, p) * exp(-k Q(x, p)).
    pub fn eval(&self, pt: PhasePoint) -> f64 {
        let poly: f64 = self
            .coeffs
            .iter()
            .map(|(&(a, b), &c)| c * pt.x.powi(a as i32) * pt.p.powi(b as i32))
            .sum();
        if self.k == 0 {
            poly
        } else {
            poly * (-(self.k as f64) * self.envelope.q_form(pt)).exp()
        }
    }
}

/// Quartic Moyal bracket {H, f}_M = {H, f} - (g x / 4) d^3 f / dp^3.
///
/// For the quartic Hamiltonian the Moyal expansion terminates, so this is the
/// exact quantum generator, not a truncation.
pub fn moyal_quartic(model: &QuarticModel, f: &PolyGauss) -> Result<PolyGauss, AlgebraError> {
    let h = PolyGauss::hamiltonian(model, *f.envelope());
    let bracket = h.poisson(f)?;
    let d3 = f.dp()?.dp()?.dp()?;
    let x = PolyGauss::monomial(*f.envelope(), 0, 1, 0, 1.0)?;
    let correction = x.mul(&d3)?.scale(model.g() / 4.0);
    bracket.sub(&correction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn env() -> GaussianWignerState {
        GaussianWignerState::coherent(0.0, 0.0).unwrap()
    }

    fn env_at(x0: f64, p0: f64) -> GaussianWignerState {
        GaussianWignerState::new(x0, p0, 0.9, 0.8).unwrap()
    }

    /// Coefficient-wise closeness relative to the larger operand.
    fn assert_pg_close(a: &PolyGauss, b: &PolyGauss, rtol: f64) {
        let scale = a.max_abs_coeff().max(b.max_abs_coeff());
        let diff = a.sub(b).unwrap().max_abs_coeff();
        if scale == 0.0 {
            assert_eq!(diff, 0.0);
        } else {
            assert!(
                diff <= rtol * scale,
                "coefficient mismatch: diff = {diff:.3e}, scale = {scale:.3e}"
            );
        }
    }

    #[test]
    fn add_merges_monomials() {
        let x = PolyGauss::monomial(env(), 0, 1, 0, 1.0).unwrap();
        let p = PolyGauss::monomial(env(), 0, 0, 1, 1.0).unwrap();
        let s = x.add(&p).unwrap();
        assert_eq!(s.coeff(1, 0), 1.0);
        assert_eq!(s.coeff(0, 1), 1.0);

        let a = PolyGauss::from_terms(env(), 1, &[(2, 0, 2.0)]).unwrap();
        let b = PolyGauss::from_terms(env(), 1, &[(2, 0, 3.0)]).unwrap();
        assert_eq!(a.add(&b).unwrap().coeff(2, 0), 5.0);

        let cancel = a.add(&a.scale(-1.0)).unwrap();
        assert!(cancel.is_zero());
    }

    #[test]
    fn add_rejects_mismatched_envelope_or_power() {
        let a = PolyGauss::constant(env(), 0, 1.0);
        let b = PolyGauss::constant(env_at(0.5, 0.0), 0, 1.0);
        assert_eq!(a.add(&b).unwrap_err(), AlgebraError::EnvelopeMismatch);
        let c = PolyGauss::constant(env(), 1, 1.0);
        assert_eq!(a.add(&c).unwrap_err(), AlgebraError::PowerMismatch(0, 1));
    }

    #[test]
    fn mul_convolves_and_adds_powers() {
        let x = PolyGauss::monomial(env(), 0, 1, 0, 1.0).unwrap();
        let p = PolyGauss::monomial(env(), 0, 0, 1, 1.0).unwrap();
        let xp = x.mul(&p).unwrap();
        assert_eq!(xp.coeff(1, 1), 1.0);
        assert_eq!(xp.k(), 0);

        let g1 = PolyGauss::constant(env(), 1, 1.0);
        let g2 = g1.mul(&g1).unwrap();
        assert_eq!(g2.k(), 2);
        assert_eq!(g2.coeff(0, 0), 1.0);

        let xp1 = PolyGauss::from_terms(env(), 0, &[(1, 0, 1.0), (0, 0, 1.0)]).unwrap();
        let xm1 = PolyGauss::from_terms(env(), 0, &[(1, 0, 1.0), (0, 0, -1.0)]).unwrap();
        let prod = xp1.mul(&xm1).unwrap();
        assert_eq!(prod.coeff(2, 0), 1.0);
        assert_eq!(prod.coeff(0, 0), -1.0);
        assert_eq!(prod.coeff(1, 0), 0.0);
    }

    #[test]
    fn degree_overflow_is_reported() {
        let big = PolyGauss::monomial(env(), 0, 10, 0, 1.0).unwrap();
        assert_eq!(big.mul(&big).unwrap_err(), AlgebraError::DegreeOverflow(20));
        assert!(PolyGauss::monomial(env(), 0, 17, 0, 1.0).is_err());
    }

    #[test]
    fn dx_of_polynomials() {
        let x2 = PolyGauss::monomial(env(), 0, 2, 0, 1.0).unwrap();
        let d = x2.dx().unwrap();
        assert_eq!(d.coeff(1, 0), 2.0);

        // p-independent polynomial has vanishing dp.
        assert!(x2.dp().unwrap().is_zero());
    }

    #[test]
    fn dx_of_gaussian_matches_product_rule_and_finite_differences() {
        // envelope centered at the origin with sigma_x = 1/sqrt(2):
        // dQ/dx = 2x, so d/dx e^{-Q} = -2x e^{-Q}.
        let e = env();
        let g = PolyGauss::constant(e, 1, 1.0);
        let d = g.dx().unwrap();
        assert_abs_diff_eq!(d.coeff(1, 0), -2.0, epsilon = 1e-15);
        assert_eq!(d.k(), 1);

        // Central finite differences at 5 fixed points.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for _ in 0..5 {
            let pt = PhasePoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let fd = (g.eval(PhasePoint::new(pt.x + h, pt.p))
                - g.eval(PhasePoint::new(pt.x - h, pt.p)))
                / (2.0 * h);
            let exact = d.eval(pt);
            assert!((fd - exact).abs() <= 1e-8 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn canonical_bracket_is_one() {
        let x = PolyGauss::monomial(env(), 0, 1, 0, 1.0).unwrap();
        let p = PolyGauss::monomial(env(), 0, 0, 1, 1.0).unwrap();
        let b = x.poisson(&p).unwrap();
        assert_eq!(b.coeff(0, 0), 1.0);
        assert_eq!(b.degree(), 0);
    }

    #[test]
    fn hamiltonian_bracket_matches_printed_form() {
        // {H, f} = (x + g x^3) df/dp - p df/dx for the quartic H.
        let model = QuarticModel::new(0.7).unwrap();
        let e = env_at(0.4, -0.2);
        let h = PolyGauss::hamiltonian(&model, e);
        let f = PolyGauss::from_terms(e, 1, &[(1, 2, 0.3), (0, 0, 1.0), (2, 1, -0.8)]).unwrap();

        let lhs = h.poisson(&f).unwrap();

        let grad =
            PolyGauss::from_terms(e, 0, &[(1, 0, 1.0), (3, 0, model.g())]).unwrap();
        let p = PolyGauss::monomial(e, 0, 0, 1, 1.0).unwrap();
        let rhs = grad
            .mul(&f.dp().unwrap())
            .unwrap()
            .sub(&p.mul(&f.dx().unwrap()).unwrap())
            .unwrap();

        assert_pg_close(&lhs, &rhs, 1e-14);
    }

    #[test]
    fn bracket_with_itself_vanishes() {
        let a = PolyGauss::from_terms(env(), 1, &[(2, 1, 1.3), (0, 2, -0.4), (1, 0, 0.9)]).unwrap();
        let b = a.poisson(&a).unwrap();
        assert!(b.max_abs_coeff() < 1e-14);
    }

    #[test]
    fn moyal_reduces_to_poisson_for_harmonic_and_low_p_degree() {
        let e = env_at(-0.3, 0.6);
        let f = PolyGauss::from_terms(e, 1, &[(2, 3, 0.5), (1, 1, -1.0), (0, 0, 0.7)]).unwrap();

        // g = 0: identical expressions, bitwise equal coefficients.
        let harmonic = QuarticModel::harmonic();
        let h = PolyGauss::hamiltonian(&harmonic, e);
        assert_eq!(moyal_quartic(&harmonic, &f).unwrap(), h.poisson(&f).unwrap());

        // p-degree <= 2: the third p-derivative of the polynomial part of a
        // k = 0 element vanishes.
        let model = QuarticModel::new(1.3).unwrap();
        let low = PolyGauss::from_terms(e, 0, &[(4, 2, 1.0), (2, 1, -0.5), (3, 0, 2.0)]).unwrap();
        let h = PolyGauss::hamiltonian(&model, e);
        assert_pg_close(
            &moyal_quartic(&model, &low).unwrap(),
            &h.poisson(&low).unwrap(),
            1e-14,
        );
    }

    #[test]
    fn moyal_correction_matches_finite_difference_third_derivative() {
        // For the Gaussian ansatz the correction -(g x/4) d^3 f/dp^3 is a
        // cubic in (p - p0) times the Gaussian; check against finite
        // differences of the plain density evaluation.
        let state = GaussianWignerState::coherent(0.5, -0.25).unwrap();
        let model = QuarticModel::new(1.0).unwrap();
        let f = PolyGauss::ansatz(state);
        let h = PolyGauss::hamiltonian(&model, state);
        let correction = moyal_quartic(&model, &f)
            .unwrap()
            .sub(&h.poisson(&f).unwrap())
            .unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h1 = 0.02;
        let h2 = 0.01;
        for _ in 0..5 {
            let pt = PhasePoint::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8));
            let d3 = |h: f64| {
                (state.eval(PhasePoint::new(pt.x, pt.p + 2.0 * h))
                    - 2.0 * state.eval(PhasePoint::new(pt.x, pt.p + h))
                    + 2.0 * state.eval(PhasePoint::new(pt.x, pt.p - h))
                    - state.eval(PhasePoint::new(pt.x, pt.p - 2.0 * h)))
                    / (2.0 * h * h * h)
            };
            // Richardson extrapolation of the O(h^2) stencil.
            let fd = d3(h2) + (d3(h2) - d3(h1)) / 3.0;
            let expected = -model.g() * pt.x / 4.0 * fd;
            let got = correction.eval(pt);
            assert!(
                (got - expected).abs() <= 1e-6 * expected.abs().max(1e-2),
                "pt=({}, {}): got {got}, fd oracle {expected}",
                pt.x,
                pt.p
            );
        }
    }

    #[test]
    fn eval_matches_hand_arithmetic() {
        let model = QuarticModel::new(1.0).unwrap();
        let h = PolyGauss::hamiltonian(&model, env());
        assert_abs_diff_eq!(h.eval(PhasePoint::new(1.0, 1.0)), 1.25, epsilon = 1e-15);

        let zero = PolyGauss::zero(env(), 1);
        assert_eq!(zero.eval(PhasePoint::new(0.3, -2.0)), 0.0);

        let g = PolyGauss::constant(env_at(1.5, -0.5), 1, 1.0);
        assert_abs_diff_eq!(g.eval(PhasePoint::new(1.5, -0.5)), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn max_abs_coeff_reports_largest_magnitude() {
        assert_eq!(PolyGauss::zero(env(), 0).max_abs_coeff(), 0.0);
        let a = PolyGauss::from_terms(env(), 0, &[(1, 0, 3.0), (0, 2, -5.0)]).unwrap();
        assert_eq!(a.max_abs_coeff(), 5.0);
        assert_eq!(a.sub(&a).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn derivatives_commute() {
        let a = PolyGauss::from_terms(env_at(0.7, 0.1), 2, &[(3, 2, 1.0), (1, 1, -2.0)]).unwrap();
        let xy = a.dx().unwrap().dp().unwrap();
        let yx = a.dp().unwrap().dx().unwrap();
        assert_pg_close(&xy, &yx, 1e-13);
    }

    #[test]
    fn ansatz_commutes_with_functions_of_q() {
        // {f_sigma, u(Q)} = 0 for u(Q) = Q and u(Q) = Q^2.
        for state in [
            GaussianWignerState::coherent(1.0, -0.5).unwrap(),
            GaussianWignerState::new(-0.3, 0.8, 1.1, 0.7).unwrap(),
        ] {
            let f = PolyGauss::ansatz(state);
            let q = PolyGauss::q_poly(state);
            let q2 = q.mul(&q).unwrap();
            assert!(f.poisson(&q).unwrap().max_abs_coeff() < 1e-12);
            assert!(f.poisson(&q2).unwrap().max_abs_coeff() < 1e-12);
        }
    }

    // Property tests over random envelopes and sparse polynomials.

    fn arb_envelope() -> impl Strategy<Value = GaussianWignerState> {
        (
            -2.0f64..2.0,
            -2.0f64..2.0,
            0.6f64..1.5,
            1.0f64..3.0,
        )
            .prop_map(|(x0, p0, sx, unc)| {
                let sp = unc / (2.0 * sx);
                GaussianWignerState::new(x0, p0, sx, sp).expect("built above the uncertainty floor")
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn poisson_is_antisymmetric(env in arb_envelope(), seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = PolyGauss::from_terms(env, 1, &[
                (rng.gen_range(0..3), rng.gen_range(0..3), rng.gen_range(-2.0..2.0)),
                (rng.gen_range(0..3), rng.gen_range(0..3), rng.gen_range(-2.0..2.0)),
            ]).unwrap();
            let b = PolyGauss::from_terms(env, 0, &[
                (rng.gen_range(0..4), rng.gen_range(0..4), rng.gen_range(-2.0..2.0)),
            ]).unwrap();
            let ab = a.poisson(&b).unwrap();
            let ba = b.poisson(&a).unwrap();
            assert_pg_close(&ab, &ba.scale(-1.0), 1e-13);
        }

        #[test]
        fn poisson_satisfies_leibniz(env in arb_envelope(), a in (0u32..3, 0u32..3, -2.0f64..2.0)) {
            let a = PolyGauss::from_terms(env, 0, &[(a.0, a.1, a.2), (1, 0, 0.5)]).unwrap();
            let b = PolyGauss::from_terms(env, 1, &[(2, 0, 0.7), (0, 1, -1.1)]).unwrap();
            let c = PolyGauss::from_terms(env, 0, &[(1, 2, 0.4), (0, 0, 2.0)]).unwrap();

            let lhs = a.poisson(&b.mul(&c).unwrap()).unwrap();
            let rhs = a.poisson(&b).unwrap().mul(&c).unwrap()
                .add(&b.mul(&a.poisson(&c).unwrap()).unwrap()).unwrap();
            assert_pg_close(&lhs, &rhs, 1e-12);
        }

        #[test]
        fn poisson_satisfies_jacobi_on_polynomials(env in arb_envelope(), seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(2654435761));
            let mut poly = |max: u32| {
                let terms = [
                    (rng.gen_range(0..=max), rng.gen_range(0..=max), rng.gen_range(-2.0f64..2.0)),
                    (rng.gen_range(0..=max), rng.gen_range(0..=max), rng.gen_range(-2.0f64..2.0)),
                ];
                let kept: Vec<_> = terms.iter().copied().filter(|&(a, b, _)| a + b <= 4).collect();
                PolyGauss::from_terms(env, 0, &kept).unwrap()
            };
            let (a, b, c) = (poly(4), poly(4), poly(4));
            let t1 = a.poisson(&b.poisson(&c).unwrap()).unwrap();
            let t2 = b.poisson(&c.poisson(&a).unwrap()).unwrap();
            let t3 = c.poisson(&a.poisson(&b).unwrap()).unwrap();
            let total = t1.add(&t2).unwrap().add(&t3).unwrap();
            let scale = t1.max_abs_coeff().max(t2.max_abs_coeff()).max(t3.max_abs_coeff());
            assert!(total.max_abs_coeff() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn moyal_equals_poisson_when_correction_inactive(env in arb_envelope(), g in 0.0f64..2.0) {
            // Any f with p-degree <= 2 (here a k=0 polynomial).
            let model = QuarticModel::new(g).unwrap();
            let f = PolyGauss::from_terms(env, 0, &[(3, 2, 1.0), (1, 1, -0.4)]).unwrap();
            let h = PolyGauss::hamiltonian(&model, env);
            assert_pg_close(
                &moyal_quartic(&model, &f).unwrap(),
                &h.poisson(&f).unwrap(),
                1e-13,
            );
        }
    }
}
