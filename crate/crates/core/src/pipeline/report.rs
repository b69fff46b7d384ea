use serde::Serialize;

/// Sizes of one read: raw samples in, called bases out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReadSizes {
    pub raw_samples: usize,
    pub called_bases: usize,
}

/// A storage container modelled as a size multiplier on raw and called data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StorageOverhead {
    pub name: String,
    pub raw_factor: f64,
    pub called_factor: f64,
}

impl StorageOverhead {
    /// FAST5 for raw signal versus FASTQ for calls, with factors taken from
    /// the dataset totals below.
    pub fn fast5_vs_fastq() -> Self {
        let t = TABLE_ONE_TOTAL;
        StorageOverhead {
            name: "fast5/fastq".into(),
            raw_factor: t.fast5_gb / t.raw_gb,
            called_factor: t.fastq_gb / t.string_gb,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StorageRatio {
    pub name: String,
    pub ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DataReductionReport {
    pub reads: usize,
    pub raw_bytes: f64,
    pub called_bytes: f64,
    /// `None` when there is nothing to compare.
    pub communication_ratio: Option<f64>,
    pub storage: Vec<StorageRatio>,
}

/// Communication and storage reduction from calling on-device.
pub fn data_reduction_report(
    reads: &[ReadSizes],
    raw_bytes_per_sample: f64,
    bytes_per_base: f64,
    containers: &[StorageOverhead],
) -> DataReductionReport {
    if reads.is_empty() {
        return DataReductionReport::default();
    }
    let raw: usize = reads.iter().map(|r| r.raw_samples).sum();
    let called: usize = reads.iter().map(|r| r.called_bases).sum();
    let raw_bytes = raw as f64 * raw_bytes_per_sample;
    let called_bytes = called as f64 * bytes_per_base;
    let ratio = (called_bytes > 0.0).then(|| raw_bytes / called_bytes);
    DataReductionReport {
        reads: reads.len(),
        raw_bytes,
        called_bytes,
        communication_ratio: ratio,
        storage: containers
            .iter()
            .filter_map(|c| {
                ratio.map(|r| StorageRatio {
                    name: c.name.clone(),
                    ratio: r * c.raw_factor / c.called_factor,
                })
            })
            .collect(),
    }
}

/// Per-dataset sizes in gigabytes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DatasetSizes {
    pub name: &'static str,
    pub reads: u32,
    pub raw_gb: f64,
    pub string_gb: f64,
    pub fast5_gb: f64,
    pub pod5_gb: f64,
    pub fastq_gb: f64,
}

impl DatasetSizes {
    pub fn communication_ratio(&self) -> f64 {
        self.raw_gb / self.string_gb
    }

    pub fn storage_ratio(&self) -> f64 {
        self.fast5_gb / self.fastq_gb
    }
}

const fn row(
    name: &'static str,
    reads: u32,
    raw_gb: f64,
    string_gb: f64,
    fast5_gb: f64,
    pod5_gb: f64,
    fastq_gb: f64,
) -> DatasetSizes {
    DatasetSizes {
        name,
        reads,
        raw_gb,
        string_gb,
        fast5_gb,
        pod5_gb,
        fastq_gb,
    }
}

/// Nine bacterial read sets.
pub const TABLE_ONE: [DatasetSizes; 9] = [
    row("Acinetobacter", 4_467, 4.80, 0.11, 1.5, 0.97, 0.35),
    row("Haemophilus", 8_669, 5.79, 0.07, 1.8, 1.2, 0.36),
    row("Klebsiella INF032", 15_154, 18.86, 0.52, 6.1, 4.1, 1.5),
    row("Klebsiella INF042", 11_278, 22.53, 0.51, 7.0, 4.6, 1.7),
    row("Klebsiella KSB2", 15_178, 16.76, 0.38, 5.3, 3.5, 1.3),
    row("Klebsiella NUH29", 11_047, 12.25, 0.23, 3.9, 2.5, 0.844),
    row("Serratia", 16_847, 5.59, 0.13, 2.0, 1.3, 0.44),
    row("Staphylococcus", 16_742, 9.04, 0.23, 2.9, 1.9, 0.68),
    row("Stenotrophomonas", 16_010, 22.60, 0.46, 7.2, 4.7, 1.6),
];

/// Totals row as reported with the datasets. It does not equal the column sums exactly.
pub const TABLE_ONE_TOTAL: DatasetSizes = row("Total", 115_392, 118.6, 2.7, 37.6, 24.77, 8.6);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_float_samples_per_base() {
        let reads = [
            ReadSizes {
                raw_samples: 10_000,
                called_bases: 1000,
            },
            ReadSizes {
                raw_samples: 500,
                called_bases: 50,
            },
        ];
        let r = data_reduction_report(&reads, 4.0, 1.0, &[]);
        assert_eq!(r.communication_ratio, Some(40.0));
    }

    #[test]
    fn totals_row() {
        let t = TABLE_ONE_TOTAL;
        assert!((t.communication_ratio() - 43.93).abs() < 0.01);
        assert!((t.storage_ratio() - 4.372).abs() < 0.001);
        let reads: u32 = TABLE_ONE.iter().map(|d| d.reads).sum();
        assert_eq!(reads, t.reads);
    }

    #[test]
    fn empty_report() {
        let r = data_reduction_report(&[], 4.0, 1.0, &[StorageOverhead::fast5_vs_fastq()]);
        assert_eq!(r, DataReductionReport::default());
    }

    #[test]
    fn storage_ratio_from_container_factors() {
        let reads = [ReadSizes {
            raw_samples: 1186,
            called_bases: 27,
        }];
        let r = data_reduction_report(&reads, 1.0, 1.0, &[StorageOverhead::fast5_vs_fastq()]);
        assert!((r.storage[0].ratio - 37.6 / 8.6).abs() < 1e-9);
    }
}
