//! Numerical core for rigidity-style estimates on high-rank groups:
//! spherical-function asymptotics on `S^{n-1}`, Schatten-norm bounds for
//! sphere-averaging operators, singular-value certificates along Weyl-chamber
//! paths, congruence Cayley/Schreier graph spectra, and Poincare-type
//! obstructions to coarse embeddings.

// Float guards are written `!(x > 0.0)` rather than `x <= 0.0` throughout:
// the negated form is also true for NaN, so a NaN argument is rejected
// instead of slipping past the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banach;
pub mod congruence;
pub mod embedding;
pub mod error;
pub mod gegenbauer;
pub mod graph;
pub mod quad;
pub mod rng;
pub mod schatten;
pub mod spectral;
pub mod sphere_oracle;
pub mod weyl;

pub use banach::{
    bm_small, john_check_l1_ball, mvee_centered, BanachProfile, CenteredEllipsoid,
    JohnEllipsoidCheck, MVEE_ITERATION_CAP,
};
pub use congruence::{
    enumerate_group, is_prime, reduce_mod, sl_order, GeneratingSet, GroupTable, ModMatrix,
    ENUMERATION_CAP,
};
pub use embedding::{
    embed_optimize, halfmass_check, mu_operator_norm, poincare_check, random_lipschitz_embedding,
    shrink_to_half, EmbedOptimizeResult, GeneratorMeasure, HalfMassCheck, MeasureAtom,
    PoincareCheck, VertexEmbedding, MAX_SQUARINGS, MEAN_ZERO_TOL,
};
pub use error::{Error, Result};
pub use gegenbauer::{
    decay_fit, lipschitz_fit, multiplicity, normalization_constant, phi, phi_checked,
    phi_derivative, phi_derivative_quadrature, phi_quadrature, DecayFit, PhiJetSeries, PhiSeries,
    PhiValue, QuadValue, SphereDim, SphericalFunctionTable, TableRow,
};
pub use graph::{cayley_build, schreier_build, Arrow, CayleyGraph, SchreierAction};
pub use quad::{adaptive_complex, GaussLegendre};
pub use rng::SplitMix64;
pub use schatten::{
    holder_fit, multiplier_coeff_norm, oscillation_bound, raw_diff_power_sum, raw_power_sum,
    schatten_diff, schatten_norm, spectral_operator, HolderConstants, MultiplierCoefficients,
    OscillationCheck, SchattenResult, SpectralOperator,
};
pub use spectral::{
    cheeger_exact, dense_eigenpairs, dense_spectrum, diameter_lower_bound, expander_report,
    lambda2, spectral_report, spectrum_topk, spectrum_topk_capped, topk_eigenpairs,
    CertifiedEigenvalue, FamilyReport, NormalizedAdjacency, SpectralReport, CHEEGER_EXACT_CAP,
    DENSE_SPECTRUM_CAP,
};
pub use sphere_oracle::{dense_sphere_oracle, eigenvalue_clusters, sphere_basis_dim};
pub use weyl::{
    epsilon_decay, kak2_forward, kak2_solve, path_schedule, step_bound, telescoped_sum,
    weyl_diagonal, PathSchedule, StepBound, WeylDiagonal,
};
