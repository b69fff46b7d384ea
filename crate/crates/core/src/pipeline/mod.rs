//! Signal-to-sequence data path: synthetic reads, per-channel buffering,
//! chunking and stitching, accuracy and data-reduction metrics, file I/O.

mod align;
mod buffer;
mod chunk;
pub mod io;
mod pore;
mod report;

pub use align::{aligned_accuracy, aligned_accuracy_with, AlignScoring, Alignment};
pub use buffer::{SignalBuffer, CHANNELS, CHANNEL_CAPACITY_BYTES};
pub use chunk::{chunk, stitch, Chunk, ChunkCall, ChunkPlan};
pub use pore::{random_sequence, synth_squiggle, Dwell, PoreModel, SquiggleRead};
pub use report::{
    data_reduction_report, DataReductionReport, DatasetSizes, ReadSizes, StorageOverhead,
    StorageRatio, TABLE_ONE, TABLE_ONE_TOTAL,
};
