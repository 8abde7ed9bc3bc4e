// std::time::Instant panics on wasm32-unknown-unknown.
pub(crate) use web_time::Instant;
