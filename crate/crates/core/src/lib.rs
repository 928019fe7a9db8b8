//! Counterfactual fairness auditing for tabular predictors.
//!
//! The crate is organised as a pipeline:
//!
//! - [`dataset`]: schema-typed CSV loading, dataset recipes, encoding and splitting.
//! - [`causal`]: weighted DAGs, DirectLiNGAM discovery and graph queries.
//! - [`scm`]: linear structural causal models, counterfactuals, and a one-factor
//!   latent model fitted by EM.
//! - [`models`]: feature regimes (unfair / unaware / counterfactual) and the
//!   linear, logistic and MLP predictors trained under them.
//! - [`metrics`]: distribution distances, ROC-based and density-based fairness
//!   metrics, KDE curves and performance scores.
//! - [`audit`]: the end-to-end run driven by a JSON config, and report emission.
//!
//! [`synth`] holds the generators for the bundled synthetic fixtures.

pub mod audit;
pub mod causal;
pub mod dataset;
pub(crate) mod linalg;
pub mod metrics;
pub mod models;
pub mod scm;
pub mod synth;

pub use audit::{run_audit, AuditConfig, AuditError, FairnessReport};
pub use causal::{direct_lingam, WeightedDag};
pub use dataset::{encode, load_dataset, split, Dataset, EncodedMatrix};
pub use scm::{fit_latent_scm, fit_scm, LatentScm, Scm};
