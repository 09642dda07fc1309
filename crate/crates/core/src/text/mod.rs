//! Review corpora: text normalization, hashed bigram features, star
//! rewards, splits and round construction.

mod corpus;
mod hashing;
mod io;
mod preprocess;
mod synthetic;

pub use corpus::{
    featurize, make_rounds, single_pass_rounds, split_dataset, star_reward, test_error, DatasetSplit, Document, Review,
    DEFAULT_DOMAIN,
};
pub use hashing::{bigram_hash_features, DEFAULT_HASH_DIM, MIN_HASH_DIM};
pub use io::{
    load_documents, load_reviews, read_documents, read_reviews, save_documents, save_reviews, write_documents,
    write_reviews,
};
pub use preprocess::{preprocess_text, tokenize, ABBREVIATIONS};
pub use synthetic::{SyntheticCorpus, STAR_WEIGHTS};
