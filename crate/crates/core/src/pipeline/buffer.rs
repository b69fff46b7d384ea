use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Sequencer channels served by one buffer.
pub const CHANNELS: usize = 512;
/// Per-channel capacity in bytes.
pub const CHANNEL_CAPACITY_BYTES: usize = 2508;
/// SRAM read or write energy per bit, in femtojoules.
const SRAM_FJ_PER_BIT: f64 = 2.5;

/// Per-channel FIFO of raw samples in on-chip SRAM.
#[derive(Clone, Debug)]
pub struct SignalBuffer {
    queues: Vec<VecDeque<f32>>,
    sample_bytes: usize,
    capacity_bytes: usize,
    energy_fj: f64,
}

impl SignalBuffer {
    /// A buffer of `CHANNELS` queues storing `sample_bytes` per sample.
    pub fn new(sample_bytes: usize) -> Result<Self> {
        Self::with_capacity(CHANNELS, CHANNEL_CAPACITY_BYTES, sample_bytes)
    }

    pub fn with_capacity(
        channels: usize,
        capacity_bytes: usize,
        sample_bytes: usize,
    ) -> Result<Self> {
        if sample_bytes == 0 || sample_bytes > capacity_bytes {
            return Err(Error::param(
                "sample_bytes",
                "must be in 1..=channel capacity",
            ));
        }
        Ok(SignalBuffer {
            queues: vec![VecDeque::new(); channels],
            sample_bytes,
            capacity_bytes,
            energy_fj: 0.0,
        })
    }

    pub fn channels(&self) -> usize {
        self.queues.len()
    }

    /// Samples a channel can hold.
    pub fn channel_capacity_samples(&self) -> usize {
        self.capacity_bytes / self.sample_bytes
    }

    pub fn total_capacity_bytes(&self) -> usize {
        self.capacity_bytes * self.queues.len()
    }

    fn queue(&mut self, channel: usize) -> Result<&mut VecDeque<f32>> {
        self.queues
            .get_mut(channel)
            .ok_or(Error::BadChannel(channel))
    }

    /// Append samples to a channel. Nothing is written if they do not fit.
    pub fn ingest(&mut self, channel: usize, samples: &[f32]) -> Result<()> {
        let cap = self.capacity_bytes;
        let width = self.sample_bytes;
        let q = self.queue(channel)?;
        let used = q.len() * width;
        let requested = samples.len() * width;
        if used + requested > cap {
            return Err(Error::BufferOverflow {
                channel,
                requested,
                free: cap - used,
            });
        }
        q.extend(samples);
        self.energy_fj += (requested * 8) as f64 * SRAM_FJ_PER_BIT;
        Ok(())
    }

    /// Remove up to `n` of the oldest samples from a channel.
    pub fn drain(&mut self, channel: usize, n: usize) -> Result<Vec<f32>> {
        let q = self.queue(channel)?;
        let n = n.min(q.len());
        let out: Vec<f32> = q.drain(..n).collect();
        self.energy_fj += (out.len() * self.sample_bytes * 8) as f64 * SRAM_FJ_PER_BIT;
        Ok(out)
    }

    pub fn occupancy_bytes(&self, channel: usize) -> Result<usize> {
        let q = self.queues.get(channel).ok_or(Error::BadChannel(channel))?;
        Ok(q.len() * self.sample_bytes)
    }

    pub fn total_occupancy_bytes(&self) -> usize {
        self.queues.iter().map(|q| q.len()).sum::<usize>() * self.sample_bytes
    }

    /// Accumulated SRAM read and write energy in joules.
    pub fn energy_j(&self) -> f64 {
        self.energy_fj * 1e-15
    }
}
