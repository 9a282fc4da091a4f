// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Seed derivation and per-run random streams.
//!
//! A run is identified by `(master_seed, run_index)`. The run seed is
//! `splitmix64(master_seed ^ splitmix64(run_index))`, which depends on nothing
//! but those two integers, so batches reproduce exactly at any worker count.
//! Every concern inside a run draws from its own ChaCha8 stream so changing
//! one part of a scenario (say, enabling random frames) does not shift the
//! draws seen by another (say, the scheduler).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for run number `run_index` of a batch.
pub fn derive_run_seed(master_seed: u64, run_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(run_index))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Schedule = 1,
    Placement = 2,
    Frames = 3,
    Perception = 4,
    Motion = 5,
    Compute = 6,
}

pub fn stream(run_seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(which as u64);
    rng
}

/// All streams used by one simulation run.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub schedule: SimRng,
    pub placement: SimRng,
    pub frames: SimRng,
    pub perception: SimRng,
    pub motion: SimRng,
    pub compute: SimRng,
}

impl RunStreams {
    pub fn new(run_seed: u64) -> Self {
        Self {
            schedule: stream(run_seed, Stream::Schedule),
            placement: stream(run_seed, Stream::Placement),
            frames: stream(run_seed, Stream::Frames),
            perception: stream(run_seed, Stream::Perception),
            motion: stream(run_seed, Stream::Motion),
            compute: stream(run_seed, Stream::Compute),
        }
    }
}
