//! Float helpers that work on both `std` and `no_std` builds.
//!
//! On `std` builds these forward to the intrinsic methods; without `std`
//! they fall back to `libm`. Everything numeric in the crate goes through
//! this module so the two builds differ only in last-ulp rounding of the
//! transcendental functions.

#[cfg(feature = "std")]
pub(crate) fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(not(feature = "std"))]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[cfg(feature = "std")]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    x.powf(y)
}

#[cfg(not(feature = "std"))]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[cfg(feature = "std")]
pub(crate) fn exp(x: f64) -> f64 {
    x.exp()
}

#[cfg(not(feature = "std"))]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[cfg(feature = "std")]
pub(crate) fn abs(x: f64) -> f64 {
    x.abs()
}

#[cfg(not(feature = "std"))]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[cfg(feature = "std")]
pub(crate) fn floor(x: f64) -> f64 {
    x.floor()
}

#[cfg(not(feature = "std"))]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `d^q` for a non-negative base, with the two exponents that dominate the
/// hot paths special-cased so they are exact and cheap.
pub(crate) fn pow_q(d: f64, q: f64) -> f64 {
    if q == 2.0 {
        d * d
    } else if q == 1.0 {
        d
    } else {
        powf(d, q)
    }
}

/// `d^q` given the squared distance `d²`. At `q = 2` the squared distance
/// is returned untouched, so squared-Euclidean costs of exact inputs stay
/// exact instead of passing through a square root and back.
pub(crate) fn pow_q_from_sq(sq: f64, q: f64) -> f64 {
    if q == 2.0 {
        sq
    } else if q == 1.0 {
        sqrt(sq)
    } else {
        powf(sq, 0.5 * q)
    }
}

/// Euclidean norm of a 2-vector without intermediate overflow concerns
/// (coordinates here are grid values, nowhere near the overflow range).
pub(crate) fn norm2(dx: f64, dy: f64) -> f64 {
    sqrt(dx * dx + dy * dy)
}
