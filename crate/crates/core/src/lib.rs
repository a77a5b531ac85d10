//! Deterministic sparse bipartite layer masks with certified regularity.
//!
//! Base matrices are unions of wrap-around diagonals on `2^k x 2^k` grids.
//! They can be combined through block bijections, densified, tiled to
//! rectangular shapes and permuted, and every result can be checked for
//! (ε, δ)-regularity exactly (small sides) or by seeded sampling.

pub mod compose;
pub mod error;
pub mod io;
pub mod mask;
pub mod matrix;
pub mod parallel;
pub mod rational;
pub mod verify;
pub mod xnet;

pub use compose::{
    build_layer, build_network, ccat, layer_seed, permute, vcat, BuiltLayer, Concatenated, LayerSpec, NetworkSpec,
    PermutedMask,
};
pub use error::{Error, Result};
pub use io::{export_mask, import_mask, Format};
pub use mask::{BinaryMask, EdgeLabel};
pub use matrix::{add, block_bijection, densify_to, full_diagonal, generate_base, BaseMatrixSpec, BlockBijection};
pub use rational::{parse_rational, ratio, Rational};
pub use verify::{
    check_expander_sr_conditions, check_super_regular, delta_star, epsilon_star_exact, epsilon_star_sampled,
    regularity_report, spectral_gap, ExpanderBridgeReport, Method, RegularityReport, SpectralReport, Strategy,
    SubsetWitness, SuperRegularCheck, VerifyOptions, Violation,
};
pub use xnet::{compare, generate_expander, ComparisonReport, ExpanderSpec};
