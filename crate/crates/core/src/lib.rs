//! Minimax sliding-window denoising of finite-alphabet sequences observed
//! through a discrete memoryless channel that is only known to belong to a
//! finite uncertainty set.
//!
//! The pipeline estimates `(2k+1)`-window statistics of the noisy sequence
//! ([`empirical`]), discards channels that cannot have produced them
//! ([`feasibility`]), solves a linear program for the sliding-window rule
//! with the smallest worst-case expected loss ([`minimax`]) and applies it
//! ([`pipeline`]). [`evaluation`] measures losses against known
//! source/channel pairs and [`oracle`] holds brute-force references.

pub mod empirical;
pub mod error;
pub mod evaluation;
pub mod feasibility;
pub mod lp;
pub mod minimax;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod source;
pub mod tensor;
pub mod window;

pub use empirical::{empirical_joint, l_inf_distance, ContextKey, EmpiricalStats};
pub use error::{Error, Result};
pub use evaluation::{
    benchmark_mu, conditional_expected_loss, realized_loss, worst_case_loss, EvalReport,
};
pub use feasibility::{
    b_l_modulus, bsc_cover, induced_input, is_feasible, phi_k, trim, trim_law, FeasibilityVerdict,
    TrimmedSet,
};
pub use minimax::{
    dude_rule, f_k_context_loss, g_k_expected_loss, j_k_worst_case, solve_minimax, MinimaxSolution,
};
pub use model::{
    bsc, channel_distance, hamming_loss, rho, Alphabet, Channel, ChannelSet, JointDistribution,
    LossMatrix, ProbVector, Symbol, WindowedDenoiser,
};
pub use pipeline::{
    apply_denoiser, default_window_order, denoise, denoise_feasible, ApplyMode, DenoiseResult,
    PipelineConfig, Reconstruction,
};
pub use source::{SourceChannelPair, SourceModel};
pub use window::WindowShape;
