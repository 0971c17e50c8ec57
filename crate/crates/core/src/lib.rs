//! Trainable reranking for retrieval-augmented question answering.
//!
//! A small MLP enhances query and document embeddings; it is trained so that
//! cosine similarity in the enhanced space orders documents by how much they
//! help a frozen generator answer, using precomputed generator logits as weak
//! supervision.

pub mod dataset;
pub mod enhancer;
pub mod error;
pub mod linalg;
pub mod losses;
pub mod metrics;
pub mod optimizer;
pub mod pipeline;
pub mod policy;
pub mod store;
pub mod synth;

pub use dataset::{Corpus, DatasetError, LogitRecord, QueryRecord, Split, SplitManifest};
pub use enhancer::{load_params, save_params, EnhancerDims, EnhancerParams};
pub use error::{Error, Result};
pub use metrics::{MetricsReport, QueryJudgment, QueryMetrics};
pub use optimizer::{OptConfig, OptState};
pub use pipeline::{evaluate, train, Checkpoint, Evaluation, TrainConfig, TrainHistory};
pub use policy::{PolicyConfig, QuestionType};
pub use store::{DocRecord, Modality, RankedList, Scorer, VectorStore};
pub use synth::{synth_generate, SyntheticConfig};
