use crate::error::{Error, Result};

/// Upper end of the ε range for which the k-fold composition result is
/// stated. Larger values are accepted with a warning.
pub const COMPOSITION_EPSILON_MAX: f64 = 0.9;

/// An (ε, δ) budget plus the noise multiplier applied to sampled noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
    noise_scale: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        Self::with_noise_scale(epsilon, delta, 1.0)
    }

    pub fn with_noise_scale(epsilon: f64, delta: f64, noise_scale: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter {
                name: "epsilon",
                reason: "must be positive and finite",
            });
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Parameter {
                name: "delta",
                reason: "must lie in [0, 1)",
            });
        }
        if !(noise_scale > 0.0 && noise_scale.is_finite()) {
            return Err(Error::Parameter {
                name: "noise_scale",
                reason: "must be positive and finite",
            });
        }
        Ok(Self {
            epsilon,
            delta,
            noise_scale,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }
}

/// Gaussian-mechanism standard deviation for a K-item round with L2
/// sensitivity √K: `σ = √(2K ln(1.25/δ)) / ε`.
pub fn gaussian_sigma(budget: &PrivacyBudget, k: usize) -> Result<f64> {
    if !(budget.delta > 0.0) {
        return Err(Error::Parameter {
            name: "delta",
            reason: "the Gaussian mechanism needs delta in (0, 1)",
        });
    }
    check_k(k)?;
    Ok(libm::sqrt(2.0 * k as f64 * libm::log(1.25 / budget.delta)) / budget.epsilon)
}

/// Per-observation Laplace budget under K-fold composition:
/// `ε' = ε / √(4K ln(e + ε/δ))`.
pub fn composed_laplace_epsilon(budget: &PrivacyBudget, k: usize) -> Result<f64> {
    if !(budget.delta > 0.0) {
        return Err(Error::Parameter {
            name: "delta",
            reason: "composition needs delta in (0, 1]",
        });
    }
    check_k(k)?;
    if budget.epsilon > COMPOSITION_EPSILON_MAX {
        log::warn!(
            "epsilon {} exceeds {} where the composition bound is stated",
            budget.epsilon,
            COMPOSITION_EPSILON_MAX
        );
    }
    let e = core::f64::consts::E;
    Ok(budget.epsilon / libm::sqrt(4.0 * k as f64 * libm::log(e + budget.epsilon / budget.delta)))
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Parameter {
            name: "K",
            reason: "must be at least 1",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values evaluated with 40-digit arithmetic.
    #[test]
    fn sigma_matches_high_precision() {
        let cases = [
            (1.0, 1e-3, 4, 7.552959065318093888508382370863348),
            (0.2, 1e-3, 4, 37.76479532659046944254191185431674),
            (0.5, 1e-5, 16, 38.75844210084311537006913726068475),
        ];
        for (eps, delta, k, want) in cases {
            let got = gaussian_sigma(&PrivacyBudget::new(eps, delta).unwrap(), k).unwrap();
            assert!(rel(got, want) <= 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn sigma_closed_form_special_case() {
        let delta = 1.25 / (core::f64::consts::E * core::f64::consts::E);
        let got = gaussian_sigma(&PrivacyBudget::new(1.0, delta).unwrap(), 1).unwrap();
        assert!((got - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn sigma_halves_when_epsilon_doubles() {
        let a = gaussian_sigma(&PrivacyBudget::new(0.7, 1e-4).unwrap(), 3).unwrap();
        let b = gaussian_sigma(&PrivacyBudget::new(1.4, 1e-4).unwrap(), 3).unwrap();
        assert_eq!(a, 2.0 * b);
    }

    #[test]
    fn sigma_rejects_pure_dp() {
        assert!(gaussian_sigma(&PrivacyBudget::new(1.0, 0.0).unwrap(), 4).is_err());
        assert!(PrivacyBudget::new(1.0, 1.0).is_err());
        assert!(PrivacyBudget::new(0.0, 0.1).is_err());
        assert!(PrivacyBudget::with_noise_scale(1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn composed_epsilon_matches_high_precision() {
        let cases = [
            (1.0, 1e-3, 4, 0.09510124877449031296120119878046911),
            (0.5, 1e-2, 1, 0.1255510871349562197195014578499913),
            (2.0, 1e-3, 16, 0.09067104687103422116527404934671760),
        ];
        for (eps, delta, k, want) in cases {
            let got = composed_laplace_epsilon(&PrivacyBudget::new(eps, delta).unwrap(), k).unwrap();
            assert!(rel(got, want) <= 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn composed_epsilon_properties() {
        for &(eps, delta) in &[(0.1, 0.5), (0.9, 1e-6), (2.0, 1e-3)] {
            let b = PrivacyBudget::new(eps, delta).unwrap();
            for k in [1usize, 2, 5, 20] {
                let e1 = composed_laplace_epsilon(&b, k).unwrap();
                assert!(e1 < eps / (2.0 * libm::sqrt(k as f64)));
                let e4 = composed_laplace_epsilon(&b, 4 * k).unwrap();
                assert!(rel(e1, 2.0 * e4) <= 1e-15);
            }
        }
        assert!(composed_laplace_epsilon(&PrivacyBudget::new(1.0, 0.0).unwrap(), 4).is_err());
    }
}
