//! Dataset assembly: generator mix, export formats, throughput benchmark.

pub mod bench;
pub mod config;
pub mod export;
pub mod mix;

pub use bench::{benchmark_throughput, BenchReport};
pub use config::{ConfigError, GeneratorMixConfig, GeneratorOption};
pub use export::{export_dataset, read_dataset, ExportCaps, Exporter, Format, Manifest, StoredRecord};
pub use mix::{generate_record, generate_records, BatchSpec, DatasetRecord, MixSampler};
