//! Floating-point abstraction: every solver in this crate is generic over
//! [`Scalar`], instantiated as `f32` or `f64` (aliases at the crate root).

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

/// Scalar type the numerical core is generic over.
///
/// Bundles the arithmetic traits the solvers need plus the random draws used
/// by posterior sampling, so downstream signatures stay free of `rand_distr`
/// bounds.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + std::iter::Sum<Self>
    + std::fmt::Debug
    + std::fmt::Display
    + serde::Serialize
    + serde::de::DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Uniform draw in `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Gamma(shape, 1) draw. `shape` must be strictly positive.
    fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self) -> Self;

    /// Beta(alpha, beta) draw. Both parameters must be strictly positive.
    fn sample_beta<R: Rng + ?Sized>(rng: &mut R, alpha: Self, beta: Self) -> Self;

    fn of_f64(x: f64) -> Self {
        Self::from_f64(x).expect("f64 value not representable in scalar type")
    }

    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize value not representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64()
            .expect("scalar value not representable as f64")
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }

            fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self) -> Self {
                Gamma::<$t>::new(shape, 1.0)
                    .expect("gamma shape must be positive")
                    .sample(rng)
            }

            fn sample_beta<R: Rng + ?Sized>(rng: &mut R, alpha: Self, beta: Self) -> Self {
                Beta::<$t>::new(alpha, beta)
                    .expect("beta parameters must be positive")
                    .sample(rng)
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Tolerance for checking that a probability vector of length `n` sums to 1.
///
/// 1e-9 for `f64` (comfortably above accumulation error at these sizes),
/// relaxed proportionally to the epsilon of narrower scalar types.
pub(crate) fn prob_sum_tolerance<S: Scalar>(n: usize) -> S {
    let accum = S::epsilon() * S::of_usize(32 * n.max(1));
    S::of_f64(1e-9).max(accum)
}

/// Tolerance for checking that a weight vector of length `n` sums to 1.
pub(crate) fn weight_sum_tolerance<S: Scalar>(n: usize) -> S {
    let accum = S::epsilon() * S::of_usize(32 * n.max(1));
    S::of_f64(1e-12).max(accum)
}
