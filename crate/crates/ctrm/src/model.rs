//! Model families, their CDF-Laplace exponents and scaling sequences.
//!
//! Two limit families are supported: waiting times and jumps independent
//! (stable waits, Frechet jumps) and the coupled product family J = W^{1/gamma} Z
//! with Z Frechet and independent of the stable W. A third, exponential
//! waiting times with Pareto jumps, serves as a pre-limit oracle model with
//! closed-form transforms.

use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::quad;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("stable index must lie in (0,1), got {0}")]
    InvalidStableIndex(f64),
    #[error("shape parameter must be positive and finite, got {0}")]
    InvalidShape(f64),
    #[error("rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("{op} is not defined for the {model} model")]
    UnsupportedModel { op: &'static str, model: &'static str },
    #[error("argument out of domain: {0}")]
    Domain(String),
}

/// Index of the positive stable law driving the waiting times, in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableIndex(f64);

impl StableIndex {
    pub fn new(beta: f64) -> Result<Self, ModelError> {
        if beta > 0.0 && beta < 1.0 {
            Ok(Self(beta))
        } else {
            Err(ModelError::InvalidStableIndex(beta))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Shape of a Frechet jump law (alpha in the independent model, gamma in the
/// coupled one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrechetShape(f64);

impl FrechetShape {
    pub fn new(shape: f64) -> Result<Self, ModelError> {
        if shape > 0.0 && shape.is_finite() {
            Ok(Self(shape))
        } else {
            Err(ModelError::InvalidShape(shape))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// A concrete waiting-time/jump law family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    /// W beta-stable and J alpha-Frechet, independent.
    IndependentStableFrechet {
        beta: StableIndex,
        alpha: FrechetShape,
    },
    /// W beta-stable, J = W^{1/gamma} Z with Z gamma-Frechet independent of W.
    CoupledProductFrechet {
        beta: StableIndex,
        gamma: FrechetShape,
    },
    /// W exponential, J standard Pareto (F_J(x) = 1 - 1/x on [1, inf)),
    /// independent. Pre-limit oracle model; has no scaling limit exponent.
    ExponentialIndependent { rate: f64 },
}

impl ModelSpec {
    pub fn independent(beta: f64, alpha: f64) -> Result<Self, ModelError> {
        Ok(Self::IndependentStableFrechet {
            beta: StableIndex::new(beta)?,
            alpha: FrechetShape::new(alpha)?,
        })
    }

    pub fn coupled(beta: f64, gamma: f64) -> Result<Self, ModelError> {
        Ok(Self::CoupledProductFrechet {
            beta: StableIndex::new(beta)?,
            gamma: FrechetShape::new(gamma)?,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self, ModelError> {
        if rate > 0.0 && rate.is_finite() {
            Ok(Self::ExponentialIndependent { rate })
        } else {
            Err(ModelError::InvalidRate(rate))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::IndependentStableFrechet { .. } => "independent-stable-frechet",
            Self::CoupledProductFrechet { .. } => "coupled-product-frechet",
            Self::ExponentialIndependent { .. } => "exponential-independent",
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum ExponentKind {
    Independent { beta: f64, alpha: f64 },
    Coupled { beta: f64, gamma: f64 },
}

/// CDF-Laplace exponent Psi(xi, x) of the sum-max-stable limit (D, A),
/// together with its two marginals Psi_D(xi) = Psi(xi, inf) and
/// -log F_A(x) = Psi(0, x).
#[derive(Debug, Clone, Copy)]
pub struct ClExponent {
    kind: ExponentKind,
}

impl ClExponent {
    /// Psi(xi, x). Evaluation at x <= x0 returns +inf (the CDF-mass-zero
    /// region), keeping Laplace-inversion integrands total.
    pub fn psi(&self, xi: f64, x: f64) -> f64 {
        if x <= self.x_left() {
            return f64::INFINITY;
        }
        match self.kind {
            ExponentKind::Independent { beta, alpha } => xi.powf(beta) + x.powf(-alpha),
            ExponentKind::Coupled { beta, gamma } => (xi + x.powf(-gamma)).powf(beta),
        }
    }

    /// Log-Laplace exponent of D: Psi_D(xi) = xi^beta.
    pub fn psi_d(&self, xi: f64) -> f64 {
        xi.powf(self.beta())
    }

    /// log F_A(x); -inf for x <= x0.
    pub fn log_fa(&self, x: f64) -> f64 {
        if x <= self.x_left() {
            return f64::NEG_INFINITY;
        }
        match self.kind {
            ExponentKind::Independent { alpha, .. } => -x.powf(-alpha),
            ExponentKind::Coupled { beta, gamma } => -x.powf(-beta * gamma),
        }
    }

    pub fn beta(&self) -> f64 {
        match self.kind {
            ExponentKind::Independent { beta, .. } | ExponentKind::Coupled { beta, .. } => beta,
        }
    }

    /// Left endpoint of F_A (both families are Frechet: 0).
    pub fn x_left(&self) -> f64 {
        0.0
    }

    /// Right endpoint of F_A (+inf for Frechet).
    pub fn x_right(&self) -> f64 {
        f64::INFINITY
    }
}

/// Closed-form C-L exponent of a limit-family model.
pub fn cl_exponent(model: &ModelSpec) -> Result<ClExponent, ModelError> {
    match model {
        ModelSpec::IndependentStableFrechet { beta, alpha } => Ok(ClExponent {
            kind: ExponentKind::Independent {
                beta: beta.get(),
                alpha: alpha.get(),
            },
        }),
        ModelSpec::CoupledProductFrechet { beta, gamma } => Ok(ClExponent {
            kind: ExponentKind::Coupled {
                beta: beta.get(),
                gamma: gamma.get(),
            },
        }),
        ModelSpec::ExponentialIndependent { .. } => Err(ModelError::UnsupportedModel {
            op: "cl_exponent",
            model: model.name(),
        }),
    }
}

/// Levy-exponent-measure tail Phi((t, inf) x [0, x]) of the coupled model:
///
/// ```text
/// int_t^inf exp(-r x^{-gamma}) beta / Gamma(1-beta) r^{-beta-1} dr
/// ```
///
/// The substitution r = t u^{-1/beta} maps this to
/// t^{-beta}/Gamma(1-beta) * int_0^1 exp(-t u^{-1/beta} x^{-gamma}) du,
/// which has no endpoint blow-up.
pub fn exponent_measure_tail(model: &ModelSpec, t: f64, x: f64) -> Result<f64, ModelError> {
    let ModelSpec::CoupledProductFrechet { beta, gamma } = model else {
        return Err(ModelError::UnsupportedModel {
            op: "exponent_measure_tail",
            model: model.name(),
        });
    };
    if !(t > 0.0) {
        return Err(ModelError::Domain(format!("t must be positive, got {t}")));
    }
    if !(x > 0.0) {
        return Err(ModelError::Domain(format!("x must be positive, got {x}")));
    }
    let b = beta.get();
    let g = gamma.get();
    Ok(coupled_tail(b, g, t, x))
}

/// `exponent_measure_tail` with raw parameters; shared with the OCTRM
/// closed-form convolution.
pub(crate) fn coupled_tail(b: f64, g: f64, t: f64, x: f64) -> f64 {
    let scale = t.powf(-b) / gamma(1.0 - b);
    let xg = x.powf(-g);
    if xg == 0.0 {
        return scale;
    }
    let q = quad::integrate(
        |u: f64| {
            if u <= 0.0 {
                0.0
            } else {
                (-t * u.powf(-1.0 / b) * xg).exp()
            }
        },
        0.0,
        1.0,
        1e-300,
        1e-11,
    );
    scale * q.value
}

/// Norming sequences a_n = n^{pa}, b_n = n^{pb}, d_n = 0 of the sum-max
/// convergence, together with the continuous-parameter versions used in the
/// scaling-limit theorem.
#[derive(Debug, Clone, Copy)]
pub struct ScalingSequences {
    a_exp: f64,
    b_exp: f64,
}

impl ScalingSequences {
    pub fn a(&self, n: f64) -> f64 {
        n.powf(self.a_exp)
    }

    pub fn b(&self, n: f64) -> f64 {
        n.powf(self.b_exp)
    }

    pub fn d(&self, _n: f64) -> f64 {
        0.0
    }

    /// a-tilde(c) = c^beta, the exact inverse of 1/a for pure power laws.
    pub fn a_tilde(&self, c: f64) -> f64 {
        c.powf(-1.0 / self.a_exp)
    }

    /// b-tilde(c) = b(a-tilde(c)).
    pub fn b_tilde(&self, c: f64) -> f64 {
        self.b(self.a_tilde(c))
    }

    pub fn d_tilde(&self, _c: f64) -> f64 {
        0.0
    }
}

/// Scaling sequences of a limit-family model.
pub fn scaling(model: &ModelSpec) -> Result<ScalingSequences, ModelError> {
    match model {
        ModelSpec::IndependentStableFrechet { beta, alpha } => Ok(ScalingSequences {
            a_exp: -1.0 / beta.get(),
            b_exp: -1.0 / alpha.get(),
        }),
        ModelSpec::CoupledProductFrechet { beta, gamma } => Ok(ScalingSequences {
            a_exp: -1.0 / beta.get(),
            b_exp: -1.0 / (beta.get() * gamma.get()),
        }),
        ModelSpec::ExponentialIndependent { .. } => Err(ModelError::UnsupportedModel {
            op: "scaling",
            model: model.name(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT_PI: f64 = 1.7724538509055159;

    fn coupled_05_1() -> ModelSpec {
        ModelSpec::coupled(0.5, 1.0).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(StableIndex::new(0.0).is_err());
        assert!(StableIndex::new(1.0).is_err());
        assert!(StableIndex::new(f64::NAN).is_err());
        assert!(FrechetShape::new(-1.0).is_err());
        assert!(ModelSpec::exponential(0.0).is_err());
    }

    #[test]
    fn exponent_closed_forms() {
        let e = cl_exponent(&coupled_05_1()).unwrap();
        assert!((e.psi(0.0, 2.0) - 2f64.powf(-0.5)).abs() < 1e-15);
        let e2 = cl_exponent(&ModelSpec::independent(0.5, 1.0).unwrap()).unwrap();
        assert!((e2.psi(1.0, f64::INFINITY) - 1.0).abs() < 1e-15);
        let e3 = cl_exponent(&ModelSpec::coupled(0.5, 2.0).unwrap()).unwrap();
        assert!((e3.psi(3.0, 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exponent_mass_zero_region() {
        let e = cl_exponent(&coupled_05_1()).unwrap();
        assert!(e.psi(1.0, 0.0).is_infinite());
        assert!(e.psi(1.0, -3.0).is_infinite());
        assert_eq!(e.log_fa(-1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn exponent_unsupported_model() {
        let m = ModelSpec::exponential(1.0).unwrap();
        assert!(matches!(
            cl_exponent(&m),
            Err(ModelError::UnsupportedModel { .. })
        ));
        assert!(matches!(
            scaling(&m),
            Err(ModelError::UnsupportedModel { .. })
        ));
    }

    #[test]
    fn tail_at_x_infinity_is_stable_levy_tail() {
        // beta=0.5, gamma=1, t=1: t^{-beta}/Gamma(1-beta) = 1/sqrt(pi)
        let v = exponent_measure_tail(&coupled_05_1(), 1.0, f64::INFINITY).unwrap();
        assert!((v - 1.0 / SQRT_PI).abs() < 1e-12);
        // and at generic parameters vs the formula
        let m = ModelSpec::coupled(0.3, 2.0).unwrap();
        let v = exponent_measure_tail(&m, 2.5, f64::INFINITY).unwrap();
        assert!((v - 2.5f64.powf(-0.3) / gamma(0.7)).abs() < 1e-10);
    }

    #[test]
    fn tail_oracle_value() {
        // (1/(2 sqrt(pi))) int_1^inf e^{-r} r^{-3/2} dr, frozen from a
        // high-precision reference quadrature.
        let v = exponent_measure_tail(&coupled_05_1(), 1.0, 1.0).unwrap();
        assert!((v - 0.050254541660012221).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn tail_monotone() {
        let m = ModelSpec::coupled(0.7, 0.5).unwrap();
        let f = |t: f64, x: f64| exponent_measure_tail(&m, t, x).unwrap();
        assert!(f(1.0, 1.0) <= f(1.0, 2.0));
        assert!(f(2.0, 1.0) <= f(1.0, 1.0));
        // against the Levy tail bound in t at several points
        for &t in &[0.5, 1.0, 4.0] {
            let full = f(t, f64::INFINITY);
            let expected = t.powf(-0.7) / gamma(0.3);
            assert!((full - expected).abs() / expected < 1e-8);
            assert!(f(t, 3.0) <= full);
        }
    }

    #[test]
    fn tail_domain_errors() {
        let m = coupled_05_1();
        assert!(exponent_measure_tail(&m, 0.0, 1.0).is_err());
        assert!(exponent_measure_tail(&m, 1.0, -1.0).is_err());
    }

    #[test]
    fn scaling_values() {
        // a_n = n^{-1/beta} = 100^{-2}, b_n = n^{-1/(beta gamma)} = 100^{-2}
        let s = scaling(&coupled_05_1()).unwrap();
        assert!((s.a(100.0) - 1e-4).abs() < 1e-18);
        assert!((s.b(100.0) - 1e-4).abs() < 1e-18);
        assert_eq!(s.d(100.0), 0.0);

        let s = scaling(&ModelSpec::independent(0.5, 2.0).unwrap()).unwrap();
        assert!((s.a(16.0) - 1.0 / 256.0).abs() < 1e-18);
        assert!((s.b(16.0) - 0.25).abs() < 1e-15);
        assert_eq!(s.a(1.0), 1.0);
        assert_eq!(s.b(1.0), 1.0);
    }

    #[test]
    fn rescaling_functions() {
        // 1/a(a_tilde(c)) = c exactly for power-law a_n
        let s = scaling(&coupled_05_1()).unwrap();
        let c = 1e4;
        assert!((1.0 / s.a(s.a_tilde(c)) - c).abs() / c < 1e-12);
        // coupled: b_tilde(c) = c^{-1/gamma}
        assert!((s.b_tilde(c) - c.powf(-1.0)).abs() < 1e-16);
        let si = scaling(&ModelSpec::independent(0.5, 1.0).unwrap()).unwrap();
        assert!((si.b_tilde(c) - c.powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn coupled_marginal_is_beta_gamma_frechet() {
        // -log F_A from Psi(0, .) must match the b_n = n^{-1/(beta gamma)} scaling
        let m = ModelSpec::coupled(0.4, 2.5).unwrap();
        let e = cl_exponent(&m).unwrap();
        for &x in &[0.3, 1.0, 4.2] {
            assert!((e.psi(0.0, x) + e.log_fa(x)).abs() < 1e-14);
            assert!((-e.log_fa(x) - x.powf(-1.0)).abs() < 1e-14); // beta*gamma = 1
        }
    }

    proptest! {
        #[test]
        fn psi_marginals_and_monotonicity(
            beta in 0.05f64..0.95,
            shape in 0.1f64..5.0,
            coupled in proptest::bool::ANY,
            xi1 in 1e-3f64..10.0,
            xi2 in 1e-3f64..10.0,
            x1 in 1e-3f64..10.0,
            x2 in 1e-3f64..10.0,
        ) {
            let m = if coupled {
                ModelSpec::coupled(beta, shape).unwrap()
            } else {
                ModelSpec::independent(beta, shape).unwrap()
            };
            let e = cl_exponent(&m).unwrap();
            // marginal identities
            prop_assert!((e.psi(xi1, f64::INFINITY) - e.psi_d(xi1)).abs() <= 1e-12 * e.psi_d(xi1).max(1.0));
            prop_assert!((e.psi(0.0, x1) + e.log_fa(x1)).abs() <= 1e-12 * (-e.log_fa(x1)).max(1.0));
            // monotone: nondecreasing in xi, nonincreasing in x
            let (lo_xi, hi_xi) = if xi1 <= xi2 { (xi1, xi2) } else { (xi2, xi1) };
            let (lo_x, hi_x) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            prop_assert!(e.psi(lo_xi, x1) <= e.psi(hi_xi, x1) + 1e-12);
            prop_assert!(e.psi(xi1, hi_x) <= e.psi(xi1, lo_x) + 1e-12);
            // dominates both marginals
            prop_assert!(e.psi(xi1, x1) >= e.psi_d(xi1) - 1e-12);
            prop_assert!(e.psi(xi1, x1) >= -e.log_fa(x1) - 1e-12);
        }
    }
}
