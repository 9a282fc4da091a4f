// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Monte-Carlo simulation of oblivious mobile robots running
//! Look-Compute-Move cycles, with practical termination detection.

pub mod algorithms;
pub mod error_models;
pub mod geometry;
pub mod harness;
pub mod report;
pub mod rng;
pub mod robot;
pub mod scheduler;
pub mod termination;
