//! Fussell-Vesely importance of fault-tree basic events, computed exactly
//! from minimal cut sets and estimated by graph-convolutional surrogates
//! trained on dependency graphs built with interpretive structural modeling.
//!
//! | module | contents |
//! |---|---|
//! | [`ftree`] | fault-tree model, text format, parameter → unavailability |
//! | [`quant`] | minimal cut sets, top probability, FV importance, enumeration oracle |
//! | [`ism`] | SSIM ingestion, reachability closure, levels, DAG skeleton, DOT |
//! | [`datagen`] | seeded perturbation, lognormal sampling, labelled JSONL datasets |
//! | [`neural`] | dense matrices, GCN and MLP regressors, training, metrics |
//! | [`structlearn`] | median binarization, BDeu score, hill-climb structure search |
//! | [`cli`] | the `fvkit` command surface |

pub mod datagen;
pub mod ftree;
pub mod ism;
pub mod neural;
pub mod quant;
pub mod cli;
pub mod report;
pub mod structlearn;

pub use ftree::{parse_fault_tree, FaultTree, FtreeError, ReliabilityParam};
pub use quant::{brute_force_fv, fv_importance, minimal_cut_sets, top_probability, FvResult, Method};
