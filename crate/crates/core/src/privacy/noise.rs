use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// One draw from Laplace(0, `scale`) by inverse-CDF transform.
pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Parameter {
            name: "scale",
            reason: "must be positive and finite",
        });
    }
    Ok(laplace_unchecked(scale, rng))
}

pub(crate) fn laplace_unchecked<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    // u in (-1/2, 1/2); u = -1/2 would map to -inf.
    let mut r: f64 = rng.random();
    while r == 0.0 {
        r = rng.random();
    }
    let u = r - 0.5;
    let magnitude = -scale * libm::log(1.0 - 2.0 * u.abs());
    if u < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

/// One draw from N(0, `sigma`²).
pub fn gaussian_sample<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter {
            name: "sigma",
            reason: "must be positive and finite",
        });
    }
    Ok(gaussian_unchecked(sigma, rng))
}

pub(crate) fn gaussian_unchecked<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}
