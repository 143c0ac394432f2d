//! Numerical Laplace toolbox: Gaver-Stehfest inversion, forward transforms of
//! tabulated functions, the Mittag-Leffler function on the negative half-line,
//! and one-sided stable densities.

use thiserror::Error;

use crate::model::StableIndex;
use crate::quad;

#[derive(Debug, Error)]
pub enum LaplaceError {
    #[error("inversion time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("transform returned a non-finite value at xi = {0}")]
    NonFiniteTransform(f64),
    #[error("inversion order must be even and in [4, 20], got {0}")]
    BadOrder(usize),
    #[error("grid must be strictly increasing with positive times")]
    BadGrid,
    #[error("grid lengths differ: {0} times vs {1} values")]
    LengthMismatch(usize, usize),
}

/// A function of t > 0 tabulated on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    ts: Vec<f64>,
    vals: Vec<f64>,
}

impl GridFunction {
    pub fn new(ts: Vec<f64>, vals: Vec<f64>) -> Result<Self, LaplaceError> {
        if ts.len() != vals.len() {
            return Err(LaplaceError::LengthMismatch(ts.len(), vals.len()));
        }
        if ts.is_empty() || ts[0] <= 0.0 || ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LaplaceError::BadGrid);
        }
        Ok(Self { ts, vals })
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn vals(&self) -> &[f64] {
        &self.vals
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }
}

/// Gaver-Stehfest inversion configuration.
#[derive(Debug, Clone, Copy)]
pub struct InversionConfig {
    pub order: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self { order: 14 }
    }
}

/// Stehfest weights V_k for even order n. Numerator and denominator of each
/// summand are built in u128 (exact up to order 20), so the only rounding is
/// the final division.
pub(crate) fn stehfest_weights(order: usize) -> Result<Vec<f64>, LaplaceError> {
    if order < 4 || order > 20 || order % 2 != 0 {
        return Err(LaplaceError::BadOrder(order));
    }
    let m = order / 2;
    let fact = |n: usize| -> u128 { (1..=n as u128).product::<u128>().max(1) };
    let mut weights = Vec::with_capacity(order);
    for k in 1..=order {
        let mut sum = 0.0f64;
        for j in k.div_ceil(2)..=k.min(m) {
            let num = (j as u128).pow(m as u32) * fact(2 * j);
            let den = fact(m - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k);
            sum += num as f64 / den as f64;
        }
        let sign = if (m + k) % 2 == 0 { 1.0 } else { -1.0 };
        weights.push(sign * sum);
    }
    Ok(weights)
}

/// Gaver-Stehfest inverse Laplace transform of `transform` at time `t`:
/// f(t) ~ (ln 2 / t) * sum_k V_k F(k ln 2 / t), with compensated summation
/// (the weights alternate in sign and grow large).
pub fn invert<F: Fn(f64) -> f64>(
    transform: F,
    t: f64,
    cfg: InversionConfig,
) -> Result<f64, LaplaceError> {
    if !(t > 0.0) {
        return Err(LaplaceError::NonPositiveTime(t));
    }
    let weights = stehfest_weights(cfg.order)?;
    let ln2_t = std::f64::consts::LN_2 / t;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (k, &w) in weights.iter().enumerate() {
        let xi = (k + 1) as f64 * ln2_t;
        let fv = transform(xi);
        if !fv.is_finite() {
            return Err(LaplaceError::NonFiniteTransform(xi));
        }
        // Kahan step
        let y = w * fv - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    Ok(ln2_t * sum)
}

/// Forward Laplace transform of a tabulated function with an analytic tail
/// closure.
#[derive(Debug, Clone, Copy)]
pub struct TransformValue {
    pub value: f64,
    /// Set when adjacent-point trapezoid and Simpson quadrature disagree by
    /// more than 1e-4 relative: the grid is too coarse for the requested xi.
    pub accuracy_warning: bool,
}

/// Integral of exp(-xi t) f(t) over (0, inf) for a function tabulated on
/// [t_min, t_max]:
/// - head [0, t_min]: f is assumed flat at f(t_min) (grids should start well
///   inside the region where f has reached its t -> 0 limit),
/// - body: composite quadratic (Simpson-type) rule on the non-uniform grid,
/// - tail (t_max, inf): fit f(t) ~ a + C t^{-p} with p = `tail_exponent` on
///   the last decade of the grid and integrate the fit analytically.
pub fn forward_transform(f: &GridFunction, xi: f64, tail_exponent: f64) -> TransformValue {
    let ts = &f.ts;
    let vs = &f.vals;
    let n = ts.len();
    let g = |i: usize| (-xi * ts[i]).exp() * vs[i];

    // head closure: f constant at vs[0] on (0, t_min]
    let head = vs[0] * (1.0 - (-xi * ts[0]).exp()) / xi;

    // body: pairs of intervals integrated with the quadratic through three
    // points (non-uniform Simpson); trapezoid kept alongside as the
    // coarseness check
    let mut body = 0.0;
    let mut trap = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let (x0, x1, x2) = (ts[i], ts[i + 1], ts[i + 2]);
        let (y0, y1, y2) = (g(i), g(i + 1), g(i + 2));
        let h0 = x1 - x0;
        let h1 = x2 - x1;
        // exact integral of the interpolating quadratic over [x0, x2]
        let s = (h0 + h1) / 6.0
            * ((2.0 - h1 / h0) * y0
                + (h0 + h1) * (h0 + h1) / (h0 * h1) * y1
                + (2.0 - h0 / h1) * y2);
        body += s;
        trap += 0.5 * h0 * (y0 + y1) + 0.5 * h1 * (y1 + y2);
        i += 2;
    }
    if i + 1 < n {
        // odd leftover interval: trapezoid on both
        let s = 0.5 * (ts[i + 1] - ts[i]) * (g(i) + g(i + 1));
        body += s;
        trap += s;
    }

    // tail closure beyond t_max: least-squares fit f ~ a + C t^{-p} over the
    // last decade of the grid
    let t_max = ts[n - 1];
    let lo = t_max / 10.0;
    let idx: Vec<usize> = (0..n).filter(|&k| ts[k] >= lo).collect();
    let p = tail_exponent;
    let tail = if idx.len() >= 2 && p > 0.0 {
        let m = idx.len() as f64;
        let (mut su, mut sv, mut suu, mut suv) = (0.0, 0.0, 0.0, 0.0);
        for &k in &idx {
            let u = ts[k].powf(-p);
            let v = vs[k];
            su += u;
            sv += v;
            suu += u * u;
            suv += u * v;
        }
        let det = m * suu - su * su;
        let (a, c) = if det.abs() > 1e-300 {
            let c = (m * suv - su * sv) / det;
            let a = (sv - c * su) / m;
            (a, c)
        } else {
            (vs[n - 1], 0.0)
        };
        // int_{t_max}^inf e^{-xi t} (a + C t^{-p}) dt; the power-law part by
        // quadrature over the e-folding range of the exponential
        let const_part = a * (-xi * t_max).exp() / xi;
        let power_part = quad::integrate(
            |t: f64| (-xi * t).exp() * t.powf(-p),
            t_max,
            t_max + 60.0 / xi,
            1e-300,
            1e-10,
        )
        .value;
        const_part + c * power_part
    } else {
        vs[n - 1] * (-xi * t_max).exp() / xi
    };

    let value = head + body + tail;
    let denom = value.abs().max(1e-300);
    let accuracy_warning = ((body - trap).abs() / denom) > 1e-4;
    TransformValue {
        value,
        accuracy_warning,
    }
}

/// 1/Gamma(x) for any real x, zero at the poles x = 0, -1, -2, ...
///
/// Uses libm's tgamma (~1 ulp): the alternating Mittag-Leffler series below
/// amplifies any relative error in the gamma values by the size of its
/// largest term, so the usual ~1e-13-accurate special-function routines are
/// not good enough here.
fn recip_gamma(x: f64) -> f64 {
    if x > 0.5 {
        1.0 / libm::tgamma(x)
    } else {
        // reflection: 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
        (std::f64::consts::PI * x).sin() * libm::tgamma(1.0 - x) / std::f64::consts::PI
    }
}

/// Mittag-Leffler function E_beta(z) for z <= 0: the uncoupled limit CDF is
/// E_beta(-x^{-alpha} t^beta).
///
/// Power series sum z^k / Gamma(1 + beta k) for |z| <= 5, else the asymptotic
/// expansion -sum_{k=1..20} z^{-k} / Gamma(1 - beta k) truncated at the
/// smallest term. `beta = 1` is accepted for testing (E_1(z) = e^z).
pub fn mittag_leffler(beta: f64, z: f64) -> f64 {
    debug_assert!(beta > 0.0 && beta <= 1.0);
    debug_assert!(z <= 0.0);
    if z == 0.0 {
        return 1.0;
    }
    if z >= -5.0 {
        // compensated power series
        let mut sum = 1.0f64;
        let mut comp = 0.0f64;
        let mut zk = 1.0f64;
        for k in 1..200 {
            zk *= z;
            let term = zk * recip_gamma(1.0 + beta * k as f64);
            let y = term - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        // asymptotic series, stop at the smallest term. Terms at (or within
        // rounding of) the gamma poles are skipped without updating the
        // smallest-term tracker: sin(pi k) evaluates to ~1e-16 rather than 0,
        // and treating such a pseudo-zero as "the smallest term so far" would
        // truncate the expansion after its first term.
        let mut sum = 0.0f64;
        let mut smallest = f64::INFINITY;
        let mut zk = 1.0f64;
        for k in 1..=20 {
            zk /= z;
            let term = -zk * recip_gamma(1.0 - beta * k as f64);
            if term.abs() <= f64::EPSILON * sum.abs() {
                continue;
            }
            if term.abs() >= smallest {
                break;
            }
            smallest = term.abs();
            sum += term;
        }
        sum
    }
}

/// Integrand amplitude of the Zolotarev representation of the one-sided
/// stable density.
fn zolotarev_a(beta: f64, phi: f64) -> f64 {
    if phi <= 0.0 {
        // limit phi -> 0+
        return beta.powf(beta / (1.0 - beta)) * (1.0 - beta);
    }
    (beta * phi).sin().powf(beta / (1.0 - beta)) * ((1.0 - beta) * phi).sin()
        / phi.sin().powf(1.0 / (1.0 - beta))
}

fn zolotarev_density(beta: f64, t: f64) -> f64 {
    let pre = (beta / (1.0 - beta)) * t.powf(-1.0 / (1.0 - beta)) / std::f64::consts::PI;
    let eps = t.powf(-beta / (1.0 - beta));
    let q = quad::integrate(
        |phi: f64| {
            let a = zolotarev_a(beta, phi);
            let w = eps * a;
            if w > 700.0 {
                0.0
            } else {
                a * (-w).exp()
            }
        },
        0.0,
        std::f64::consts::PI,
        1e-300,
        1e-11,
    );
    (pre * q.value).max(0.0)
}

/// Density g_beta(t) of the positive stable law with Laplace transform
/// exp(-xi^beta). Closed form at beta = 1/2, Zolotarev's single-integral
/// representation otherwise.
pub fn stable_density(beta: StableIndex, t: f64) -> f64 {
    debug_assert!(t > 0.0);
    let b = beta.get();
    if b == 0.5 {
        0.5 / std::f64::consts::PI.sqrt() * t.powf(-1.5) * (-0.25 / t).exp()
    } else {
        zolotarev_density(b, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn inv<F: Fn(f64) -> f64>(f: F, t: f64) -> f64 {
        invert(f, t, InversionConfig::default()).unwrap()
    }

    #[test]
    fn weights_small_orders() {
        // order 4 weights are the classic (-2, 26, -48, 24)
        let w = stehfest_weights(4).unwrap();
        assert_eq!(w, vec![-2.0, 26.0, -48.0, 24.0]);
        // each order's weights sum to ~0 (inverse of the zero transform)
        for order in [4usize, 8, 12, 14, 16, 20] {
            let s: f64 = stehfest_weights(order).unwrap().iter().sum();
            let scale: f64 = stehfest_weights(order)
                .unwrap()
                .iter()
                .map(|v| v.abs())
                .sum();
            assert!(s.abs() / scale < 1e-12, "order {order}: sum {s}");
        }
        assert!(stehfest_weights(5).is_err());
        assert!(stehfest_weights(22).is_err());
    }

    #[test]
    fn invert_exponential_pair() {
        // order-14 Gaver-Stehfest has an intrinsic truncation error of
        // ~9.5e-7 for this pair (~6 significant digits)
        let v = inv(|xi| 1.0 / (xi + 1.0), 1.0);
        assert!((v - (-1.0f64).exp()).abs() < 2e-6, "got {v}");
    }

    #[test]
    fn invert_power_pair() {
        // L^{-1}[xi^{-1/2}](t) = 1/sqrt(pi t)
        let v = inv(|xi: f64| xi.powf(-0.5), 1.0);
        assert!((v - 0.5641895835477563).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn invert_mittag_leffler_pair() {
        // L[E_{1/2}(-t^{1/2})](xi) = xi^{-1/2} / (xi^{1/2} + 1);
        // E_{1/2}(-1) = e * erfc(1)
        let v = inv(|xi: f64| xi.powf(-0.5) / (xi.powf(0.5) + 1.0), 1.0);
        assert!((v - 0.4275835761558070).abs() < 1e-5, "got {v}");
    }

    #[test]
    fn invert_rejects_bad_input() {
        assert!(matches!(
            invert(|xi| 1.0 / xi, 0.0, InversionConfig::default()),
            Err(LaplaceError::NonPositiveTime(_))
        ));
        assert!(matches!(
            invert(|_| f64::NAN, 1.0, InversionConfig::default()),
            Err(LaplaceError::NonFiniteTransform(_))
        ));
    }

    fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        let (la, lb) = (a.ln(), b.ln());
        (0..n)
            .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn forward_exponential() {
        let ts = log_grid(1e-6, 50.0, 10_000);
        let vals: Vec<f64> = ts.iter().map(|&t| (-t).exp()).collect();
        let f = GridFunction::new(ts, vals).unwrap();
        // exponential decay is faster than any power law; a large
        // tail exponent makes the fitted power-law contribution negligible
        let tv = forward_transform(&f, 2.0, 8.0);
        assert!((tv.value - 1.0 / 3.0).abs() < 1e-6, "got {}", tv.value);
        assert!(!tv.accuracy_warning);
    }

    #[test]
    fn forward_constant_one() {
        let ts = log_grid(1e-6, 50.0, 4_000);
        let vals = vec![1.0; ts.len()];
        let f = GridFunction::new(ts, vals).unwrap();
        for xi in [0.5, 1.0, 3.0] {
            let tv = forward_transform(&f, xi, 0.5);
            assert!((tv.value - 1.0 / xi).abs() < 1e-8, "xi={xi}: {}", tv.value);
        }
    }

    #[test]
    fn forward_mittag_leffler_grid() {
        let ts = log_grid(1e-6, 200.0, 12_000);
        let vals: Vec<f64> = ts
            .iter()
            .map(|&t| mittag_leffler(0.5, -t.powf(0.5)))
            .collect();
        let f = GridFunction::new(ts, vals).unwrap();
        // E_{1/2}(-sqrt(t)) ~ t^{-1/2}/Gamma(1/2) for large t
        let tv = forward_transform(&f, 1.0, 0.5);
        assert!((tv.value - 0.5).abs() < 1e-3, "got {}", tv.value);
    }

    #[test]
    fn forward_round_trip() {
        // tabulate f(t) = 1/(1+t), transform numerically, invert, compare
        let ts = log_grid(1e-7, 1e4, 20_000);
        let vals: Vec<f64> = ts.iter().map(|&t| 1.0 / (1.0 + t)).collect();
        let f = GridFunction::new(ts, vals).unwrap();
        for t in [0.3, 1.0, 3.0] {
            let v = invert(
                |xi| forward_transform(&f, xi, 1.0).value,
                t,
                InversionConfig::default(),
            )
            .unwrap();
            let exact = 1.0 / (1.0 + t);
            assert!((v - exact).abs() / exact < 1e-3, "t={t}: {v} vs {exact}");
        }
    }

    #[test]
    fn grid_function_validation() {
        assert!(GridFunction::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(GridFunction::new(vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(GridFunction::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(GridFunction::new(vec![1.0, 2.0], vec![1.0, 0.5]).is_ok());
    }

    #[test]
    fn mittag_leffler_special_values() {
        assert_eq!(mittag_leffler(0.3, 0.0), 1.0);
        // E_1(z) = e^z
        assert!((mittag_leffler(1.0, -1.0) - (-1.0f64).exp()).abs() < 1e-12);
        // E_{1/2}(-1) = e * erfc(1), E_{1/2}(-1/2) = e^{1/4} erfc(1/2)
        assert!((mittag_leffler(0.5, -1.0) - 0.4275835761558070).abs() < 1e-8);
        assert!((mittag_leffler(0.5, -0.5) - 0.6156903441929259).abs() < 1e-10);
    }

    #[test]
    fn mittag_leffler_regime_overlap() {
        // E_{1/2}(z) = e^{z^2} erfc(-z) for z < 0; references frozen from a
        // high-precision evaluation of that identity. Near the series/
        // asymptotic switch at z = -5 the alternating series cancels down
        // from terms of size ~1e9, leaving ~1e-5 absolute accuracy; away
        // from the switch both regimes are much tighter.
        let cases: &[(f64, f64, f64)] = &[
            (-3.0, 0.17900115118138995, 1e-10),
            (-4.9, 0.11287909055975876, 1e-5),
            (-5.0, 0.11070463773306863, 1e-5),
            (-5.1, 0.10861102631393279, 1e-8),
            (-8.0, 0.069985166200880928, 1e-10),
            (-20.0, 0.028174348741051319, 1e-12),
        ];
        for &(z, exact, tol) in cases {
            let v = mittag_leffler(0.5, z);
            assert!((v - exact).abs() < tol, "z={z}: {v} vs {exact}");
        }
    }

    #[test]
    fn mittag_leffler_completely_monotone() {
        let mut prev = 1.0;
        let mut z = 0.0;
        while z > -50.0 {
            z -= 0.25;
            let v = mittag_leffler(0.5, z);
            assert!(v > 0.0 && v < prev, "z={z}: {v} prev {prev}");
            prev = v;
        }
    }

    #[test]
    fn stable_density_half_closed_form() {
        let b = StableIndex::new(0.5).unwrap();
        let v = stable_density(b, 1.0);
        assert!((v - 0.2196956447338612).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn zolotarev_matches_half_closed_form() {
        for &t in &[0.01f64, 0.1, 1.0, 10.0, 100.0] {
            let exact = 0.5 / std::f64::consts::PI.sqrt() * t.powf(-1.5) * (-0.25 / t).exp();
            let z = zolotarev_density(0.5, t);
            assert!(
                (z - exact).abs() <= 1e-8 * exact.max(1e-30),
                "t={t}: {z} vs {exact}"
            );
        }
    }

    #[test]
    fn stable_density_normalization_and_transform() {
        // the density has a t^{-beta-1} tail, so plain truncation converges
        // hopelessly slowly; close the integral with the series tail
        // int_T^inf g = sum_k (-1)^{k+1} Gamma(beta k) sin(pi beta k)/(pi k!) T^{-beta k}
        let tail = |beta: f64, big_t: f64| -> f64 {
            (1..=4)
                .map(|k| {
                    let kk = k as f64;
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign * gamma(beta * kk) * (std::f64::consts::PI * beta * kk).sin()
                        / (std::f64::consts::PI * fact(k))
                        * big_t.powf(-beta * kk)
                })
                .sum()
        };
        fn fact(k: usize) -> f64 {
            (1..=k).map(|i| i as f64).product()
        }
        for &beta in &[0.3, 0.7] {
            let b = StableIndex::new(beta).unwrap();
            let big_t = 1e5;
            let body = quad::integrate(|t| stable_density(b, t), 1e-12, big_t, 1e-10, 1e-8);
            let total = body.value + tail(beta, big_t);
            assert!((total - 1.0).abs() < 1e-6, "beta={beta}: {total}");
            let lt = quad::integrate(
                |t| (-t).exp() * stable_density(b, t),
                1e-12,
                200.0,
                1e-10,
                1e-8,
            );
            assert!(
                (lt.value - (-1.0f64).exp()).abs() < 1e-6,
                "beta={beta}: {}",
                lt.value
            );
        }
    }
}
