//! How much smaller called bases are than the raw signal, and what
//! chunking and buffering cost on the way.

use cimba::basecall::TOY_CHUNK_PLAN;
use cimba::pipeline::{
    chunk, data_reduction_report, synth_squiggle, ChunkPlan, Dwell, PoreModel, ReadSizes,
    SignalBuffer, TABLE_ONE, TABLE_ONE_TOTAL,
};

fn main() -> cimba::Result<()> {
    let pore = PoreModel {
        dwell: Dwell::fixed(10),
        ..PoreModel::toy()
    };
    let seq = "ACGTTGCAACGGATC".repeat(40);
    let read = synth_squiggle(&seq, &pore, 3)?;
    let sizes = [ReadSizes {
        raw_samples: read.samples.len(),
        called_bases: seq.len(),
    }];
    let r = data_reduction_report(&sizes, 4.0, 1.0, &[]);
    println!(
        "{} samples -> {} bases: {:?}x less to send",
        read.samples.len(),
        seq.len(),
        r.communication_ratio
    );

    for d in TABLE_ONE.iter().chain([&TABLE_ONE_TOTAL]) {
        println!(
            "{:<18} raw/called {:>5.1}x  fast5/fastq {:>4.1}x",
            d.name,
            d.communication_ratio(),
            d.storage_ratio()
        );
    }

    let plan = ChunkPlan::default();
    println!(
        "chunks of {} with overlap {}: {:.0}% of samples processed twice",
        plan.chunk_size,
        plan.overlap,
        plan.duplicated_fraction() * 100.0
    );
    let chunks = chunk(&read.samples, &TOY_CHUNK_PLAN);
    println!("toy plan cuts this read into {} chunks", chunks.len());

    let buffer = SignalBuffer::new(2)?;
    println!(
        "{} channels x {} samples = {} bytes of signal buffer",
        buffer.channels(),
        buffer.channel_capacity_samples(),
        buffer.total_capacity_bytes()
    );
    Ok(())
}
