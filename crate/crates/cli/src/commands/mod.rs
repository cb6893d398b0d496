pub mod estimate;
pub mod ingest;
pub mod simulate;
pub mod spectrum;
