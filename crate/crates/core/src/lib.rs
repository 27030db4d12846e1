//! Oracle performance frontiers of multi-model language-model pools.
//!
//! Given per-(model, text) summed cross-entropy, this crate computes the
//! oracle ensemble loss of any subset of a model pool, extracts Pareto
//! frontiers over (aggregated parameter budget, loss), and fits the
//! saturating power law `L(P) = A * P^(-alpha) + L_inf` to them.
//!
//! Data-parallel loops run on rayon when the default `parallel` feature is
//! enabled; see [`Exec`].

pub mod data;
pub mod diversity;
pub mod enumeration;
pub mod error;
pub mod exec;
pub mod fitting;
pub mod oracle;
pub mod pareto;
pub mod plot;
pub mod report;
pub mod synth;

pub use data::{load_loss_matrix, mean_token_length, LossCell, LossMatrix, ModelMeta};
pub use diversity::{pairwise_frontiers_and_fits, partition_pairs, PairPartition, PairwiseReport};
pub use enumeration::{
    brute_force_enumerate, enumerate_pruned, EnumerationOptions, Generation, PrunedEnumeration,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use fitting::{fit_scaling_law, initialize_params, predict, FitConfig, ScalingFit};
pub use oracle::{
    build_min_vector, extend_min_vector, oracle_loss, single_model_loss, EnsembleEval,
    MinLossVector,
};
pub use pareto::{merge_frontiers, pareto_front, Dominance, EnsembleKey, Frontier, FrontierPoint};
pub use plot::emit_svg_plot;
pub use report::{cmd_run, Mode, RunConfig};
pub use synth::{synth_curve_points, synth_pool, SynthConfig};
