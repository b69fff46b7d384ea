use cimba::config::{ExperimentConfig, NetworkSource, PoreSpec};
use cimba::decoder::{DecoderChoice, LaParams};
use cimba::pipeline::io::{
    decode_raw, encode_raw, format_fasta, parse_fasta, FastaRecord, RawRecord,
};
use cimba::pipeline::{
    chunk, data_reduction_report, synth_squiggle, ChunkPlan, Dwell, PoreModel, ReadSizes,
    SignalBuffer,
};
use proptest::prelude::*;
use std::path::Path;

#[test]
fn default_plan_duplicates_a_quarter() {
    assert_eq!(ChunkPlan::default().duplicated_fraction(), 0.25);
}

#[test]
fn fixed_dwell_float_samples_reduce_forty_fold() {
    let pore = PoreModel {
        dwell: Dwell::fixed(10),
        ..PoreModel::toy()
    };
    let seq = "ACGTTGCAAC".repeat(30);
    let read = synth_squiggle(&seq, &pore, 1).unwrap();
    let sizes = [ReadSizes {
        raw_samples: read.samples.len(),
        called_bases: seq.len(),
    }];
    let r = data_reduction_report(&sizes, 4.0, 1.0, &[]);
    assert_eq!(r.communication_ratio, Some(40.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chunks_cover_the_read(len in 1usize..20_000, size in 10usize..5000, frac in 0.0f64..0.9) {
        let plan = ChunkPlan::new(size, (size as f64 * frac) as usize).unwrap();
        let read: Vec<f32> = (0..len).map(|i| i as f32).collect();
        let chunks = chunk(&read, &plan);
        prop_assert_eq!(chunks[0].start, 0);
        prop_assert_eq!(chunks.last().unwrap().end(), len);
        for c in &chunks {
            prop_assert_eq!(c.samples.len(), size);
            prop_assert_eq!(&c.samples[..c.valid_len], &read[c.start..c.end()]);
            prop_assert!(c.samples[c.valid_len..].iter().all(|&v| v == 0.0));
        }
        for w in chunks.windows(2) {
            prop_assert_eq!(w[1].start - w[0].start, plan.stride());
        }
    }

    #[test]
    fn buffer_never_exceeds_capacity(pushes in prop::collection::vec((0usize..4, 0usize..400), 1..60)) {
        let mut buf = SignalBuffer::with_capacity(4, 1000, 2).unwrap();
        for (ch, n) in pushes {
            let before = buf.occupancy_bytes(ch).unwrap();
            let ok = buf.ingest(ch, &vec![0.5; n]).is_ok();
            prop_assert_eq!(ok, before + 2 * n <= 1000);
            prop_assert!(buf.occupancy_bytes(ch).unwrap() <= 1000);
            if !ok {
                prop_assert_eq!(buf.occupancy_bytes(ch).unwrap(), before);
                buf.drain(ch, n).unwrap();
            }
        }
    }

    #[test]
    fn raw_and_fasta_round_trip(
        raw in prop::collection::vec((any::<u32>(), prop::collection::vec(-1e3f32..1e3, 0..50)), 0..6),
        seqs in prop::collection::vec("[ACGT]{1,200}", 1..5),
    ) {
        let records: Vec<RawRecord> = raw.into_iter().map(|(channel, samples)| RawRecord { channel, samples }).collect();
        prop_assert_eq!(decode_raw(&encode_raw(&records), Path::new("mem")).unwrap(), records);
        let fasta: Vec<FastaRecord> = seqs
            .into_iter()
            .enumerate()
            .map(|(i, sequence)| FastaRecord { id: format!("r{i}"), sequence })
            .collect();
        prop_assert_eq!(parse_fasta(&format_fasta(&fasta), Path::new("mem")).unwrap(), fasta);
    }

    #[test]
    fn config_round_trips(
        seed: u64,
        tokens in 1usize..10_000,
        l_tp in 1usize..8,
        l_mlp in 1usize..8,
        noise in 0.0f32..1.0,
        toy: bool,
    ) {
        let mut cfg = ExperimentConfig { seed, ..Default::default() };
        cfg.sim.tokens = tokens;
        let la = LaParams::new(l_tp, l_mlp).unwrap();
        cfg.decoder = DecoderChoice::LookAround(la);
        cfg.costs.decode.cycles = la.cost().latency_cycles as u64;
        cfg.pipeline.pore = PoreSpec::Toy { noise_std: noise };
        if toy {
            cfg.network = NetworkSource::Toy;
        }
        let text = cfg.to_json().unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json().unwrap(), text);
    }
}
