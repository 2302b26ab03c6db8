pub mod cli;
pub mod corpus;
pub mod lexicon;
pub mod metrics;
pub mod models;
pub mod neural;
pub mod pipeline;
