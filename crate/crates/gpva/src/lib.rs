//! Service, storage and command-line front end for the `gpva-core`
//! verification engine.
//!
//! - [`config`]: TOML configuration with `GPVA_*` environment overrides.
//! - [`kb_handle`]: the live knowledge base, swapped atomically on reload.
//! - [`store`]: per-case append-only audit logs with snapshots.
//! - [`engine`]: parallel verification shared by the CLI and the API.
//! - [`metrics`]: throughput against the manual per-item baseline.
//! - [`service`]: case operations independent of transport.
//! - [`api`]: the HTTP API.
//! - [`cli`]: the `gpva` command.

pub mod api;
pub mod cli;
pub mod config;
pub mod engine;
pub mod kb_handle;
pub mod metrics;
pub mod service;
pub mod store;

pub use config::ServiceConfig;
pub use engine::Verifier;
pub use service::{Service, ServiceError};
