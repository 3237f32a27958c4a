//! Criterion benchmarks for shardprice; see `benches/`.
