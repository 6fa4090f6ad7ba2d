//! Fast, backward-stable transforms between spherical harmonic expansions and
//! bivariate Fourier series.
//!
//! The change of basis runs in two stages. First, expansions in normalized
//! associated Legendre functions of every order are re-expanded in orders zero
//! and one through chains of analytically known Givens rotations, optionally
//! compressed by an interpolative-decomposition butterfly factorization.
//! Second, the order-0/1 expansions are converted to cosine and sine series
//! with hierarchical off-diagonal low-rank (HODLR) operators built from
//! barycentric Chebyshev interpolation of the Λ-function kernels.
//!
//! The top-level entry point is [`transform::SphPlan`]:
//!
//! ```
//! use harmonium::coeffs::{CoeffKind, CoeffMatrix};
//! use harmonium::transform::{PlanMode, SphPlan};
//!
//! let n = 15;
//! let plan = SphPlan::new(n, f64::EPSILON, PlanMode::DenseGivens).unwrap();
//! let mut f = CoeffMatrix::zeros(n, CoeffKind::SphericalHarmonic);
//! f.set(0, 0, 1.0);
//! let g = plan.sph2fourier(&f).unwrap();
//! assert!((g.get(0, 0) - 0.5f64.sqrt()).abs() < 1e-15);
//! let back = plan.fourier2sph(&g).unwrap();
//! assert!((back.get(0, 0) - 1.0).abs() < 1e-14);
//! ```

pub mod butterfly;
pub mod cheblegendre;
pub mod coeffs;
pub mod error;
pub mod fp;
pub mod givens;
pub mod idfact;
pub mod lambda;
pub mod mat;
pub mod transform;

pub(crate) mod wire;

pub use error::{Error, Result};
