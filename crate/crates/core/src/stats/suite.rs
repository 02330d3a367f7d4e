//! Suite driver aggregating the eleven tests over many sequences into the
//! summary report layout: one row per test with total runs, average
//! p-value, pass and fail counts, and pass percentage, plus grand totals.

use super::bitseq::BitSequence;
use super::nist::{self, CusumMode, StatsError, TestResult};

/// Suite geometry and per-test parameters. Defaults: 16 sequences of
/// 2^20 bits at alpha = 0.01, block-frequency M = 128, template length 9
/// (non-overlapping uses the first standard aperiodic template, eight
/// blocks per sequence), overlapping M = 1032 / K = 5, linear complexity
/// M = 500, serial and approximate entropy m = 2.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub sequences: usize,
    pub bits_per_sequence: usize,
    pub alpha: f64,
    pub block_frequency_m: usize,
    pub template_m: usize,
    pub non_overlapping_blocks: usize,
    pub overlapping_block: usize,
    pub overlapping_k: usize,
    pub linear_complexity_m: usize,
    pub serial_m: usize,
    pub approximate_entropy_m: usize,
    pub cusum_mode: CusumMode,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            sequences: 16,
            bits_per_sequence: 1 << 20,
            alpha: 0.01,
            block_frequency_m: 128,
            template_m: 9,
            non_overlapping_blocks: 8,
            overlapping_block: 1032,
            overlapping_k: 5,
            linear_complexity_m: 500,
            serial_m: 2,
            approximate_entropy_m: 2,
            cusum_mode: CusumMode::Forward,
        }
    }
}

/// Minimum sequence lengths at which each test is run rather than skipped.
fn minimum_bits(cfg: &SuiteConfig) -> [(&'static str, usize); 11] {
    [
        (nist::NAME_MONOBIT, 100),
        (nist::NAME_BLOCK_FREQUENCY, cfg.block_frequency_m.max(100)),
        (nist::NAME_RUNS, 100),
        (nist::NAME_LONGEST_RUN, 128),
        (nist::NAME_DFT, 1000),
        (
            nist::NAME_NON_OVERLAPPING,
            cfg.non_overlapping_blocks * cfg.template_m * 8,
        ),
        (nist::NAME_OVERLAPPING, cfg.overlapping_block),
        (nist::NAME_LINEAR_COMPLEXITY, cfg.linear_complexity_m),
        (nist::NAME_SERIAL, 1 << (cfg.serial_m + 1)),
        (
            nist::NAME_APPROXIMATE_ENTROPY,
            1 << (cfg.approximate_entropy_m + 2),
        ),
        (nist::NAME_CUMULATIVE_SUMS, 100),
    ]
}

/// One aggregate row of the report.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteRow {
    pub name: &'static str,
    pub total: usize,
    pub average_p: f64,
    pub pass: usize,
    pub fail: usize,
}

impl SuiteRow {
    pub fn pass_percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.pass as f64 / self.total as f64
        }
    }
}

/// Full suite outcome: rows in the report's fixed order plus totals.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub alpha: f64,
    pub sequences: usize,
    pub bits_per_sequence: usize,
    pub rows: Vec<SuiteRow>,
    pub skipped: Vec<(&'static str, String)>,
}

impl SuiteReport {
    pub fn total_tests(&self) -> usize {
        self.rows.iter().map(|r| r.total).sum()
    }

    pub fn total_pass(&self) -> usize {
        self.rows.iter().map(|r| r.pass).sum()
    }

    pub fn total_fail(&self) -> usize {
        self.rows.iter().map(|r| r.fail).sum()
    }

    pub fn pass_rate_percent(&self) -> f64 {
        if self.total_tests() == 0 {
            0.0
        } else {
            100.0 * self.total_pass() as f64 / self.total_tests() as f64
        }
    }

    /// Grand average over every emitted p-value.
    pub fn grand_average_p(&self) -> f64 {
        let weight: usize = self.rows.iter().map(|r| r.total).sum();
        if weight == 0 {
            return 0.0;
        }
        self.rows
            .iter()
            .map(|r| r.average_p * r.total as f64)
            .sum::<f64>()
            / weight as f64
    }

    pub fn row(&self, name: &str) -> Option<&SuiteRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Human-readable delimited table mirroring the summary layout.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "NIST SP800-22 subset | sequences={} bits/sequence={} alpha={}\n",
            self.sequences, self.bits_per_sequence, self.alpha
        ));
        out.push_str(
            "Test Case Name | Total Tests | Average P-Values | Pass | Fail | Pass %\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{} | {} | {:.4} | {} | {} | {:.2}\n",
                r.name,
                r.total,
                r.average_p,
                r.pass,
                r.fail,
                r.pass_percent()
            ));
        }
        out.push_str(&format!(
            "Total | {} | {:.4} | {} | {} | {:.2}\n",
            self.total_tests(),
            self.grand_average_p(),
            self.total_pass(),
            self.total_fail(),
            self.pass_rate_percent()
        ));
        for (name, reason) in &self.skipped {
            out.push_str(&format!("skipped: {name}: {reason}\n"));
        }
        out
    }

    /// Machine-readable tab-separated record file, same columns.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from(
            "# nist-suite v1\n",
        );
        out.push_str(&format!(
            "# sequences={}\tbits_per_sequence={}\talpha={}\n",
            self.sequences, self.bits_per_sequence, self.alpha
        ));
        out.push_str("test_case_name\ttotal_tests\taverage_p_values\tpass\tfail\tpass_percent\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{:.6}\t{}\t{}\t{:.2}\n",
                r.name,
                r.total,
                r.average_p,
                r.pass,
                r.fail,
                r.pass_percent()
            ));
        }
        out.push_str(&format!(
            "Total\t{}\t{:.6}\t{}\t{}\t{:.2}\n",
            self.total_tests(),
            self.grand_average_p(),
            self.total_pass(),
            self.total_fail(),
            self.pass_rate_percent()
        ));
        out
    }
}

// report rows keep the summary table's published ordering
const ROW_ORDER: [&str; 11] = [
    nist::NAME_APPROXIMATE_ENTROPY,
    nist::NAME_BLOCK_FREQUENCY,
    nist::NAME_CUMULATIVE_SUMS,
    nist::NAME_DFT,
    nist::NAME_MONOBIT,
    nist::NAME_LINEAR_COMPLEXITY,
    nist::NAME_LONGEST_RUN,
    nist::NAME_NON_OVERLAPPING,
    nist::NAME_OVERLAPPING,
    nist::NAME_RUNS,
    nist::NAME_SERIAL,
];

fn run_all(seq: &BitSequence, cfg: &SuiteConfig) -> Vec<Result<TestResult, StatsError>> {
    let template = nist::aperiodic_templates(cfg.template_m)
        .into_iter()
        .next()
        .expect("aperiodic set never empty");
    let block = seq.len() / cfg.non_overlapping_blocks.max(1);
    vec![
        nist::frequency_monobit(seq),
        nist::block_frequency(seq, cfg.block_frequency_m),
        nist::runs(seq),
        nist::longest_run_of_ones(seq),
        nist::dft_spectral(seq),
        nist::non_overlapping_template(seq, &template, block.max(cfg.template_m)),
        nist::overlapping_template_with(
            seq,
            cfg.template_m,
            cfg.overlapping_block,
            cfg.overlapping_k,
        ),
        nist::linear_complexity(seq, cfg.linear_complexity_m),
        nist::serial(seq, cfg.serial_m),
        nist::approximate_entropy(seq, cfg.approximate_entropy_m),
        nist::cumulative_sums(seq, cfg.cusum_mode),
    ]
}

/// Run the enabled tests over `cfg.sequences` sequences pulled from the
/// generator (called with the sequence index) and aggregate. A test whose
/// minimum length exceeds the sequences is skipped, not failed.
pub fn run_suite(
    mut stream: impl FnMut(usize) -> BitSequence,
    cfg: &SuiteConfig,
) -> SuiteReport {
    let minima = minimum_bits(cfg);
    let enabled: Vec<&'static str> = minima
        .iter()
        .filter(|(_, need)| *need <= cfg.bits_per_sequence)
        .map(|(name, _)| *name)
        .collect();
    let skipped: Vec<(&'static str, String)> = minima
        .iter()
        .filter(|(_, need)| *need > cfg.bits_per_sequence)
        .map(|(name, need)| {
            (
                *name,
                format!(
                    "needs {need} bits, sequences carry {}",
                    cfg.bits_per_sequence
                ),
            )
        })
        .collect();

    struct Agg {
        p_sum: f64,
        p_count: usize,
        pass: usize,
        fail: usize,
    }
    let mut agg: std::collections::HashMap<&'static str, Agg> = enabled
        .iter()
        .map(|&n| {
            (
                n,
                Agg {
                    p_sum: 0.0,
                    p_count: 0,
                    pass: 0,
                    fail: 0,
                },
            )
        })
        .collect();

    for i in 0..cfg.sequences {
        let seq = stream(i);
        assert_eq!(
            seq.len(),
            cfg.bits_per_sequence,
            "generator must honor the configured sequence length"
        );
        for result in run_all(&seq, cfg) {
            let Ok(r) = result else {
                continue;
            };
            let Some(a) = agg.get_mut(r.name) else {
                continue;
            };
            for &p in &r.p_values {
                a.p_sum += p;
                a.p_count += 1;
            }
            if r.pass(cfg.alpha) {
                a.pass += 1;
            } else {
                a.fail += 1;
            }
        }
    }

    let rows = ROW_ORDER
        .iter()
        .filter_map(|&name| {
            let a = agg.get(name)?;
            Some(SuiteRow {
                name,
                total: a.pass + a.fail,
                average_p: if a.p_count == 0 {
                    0.0
                } else {
                    a.p_sum / a.p_count as f64
                },
                pass: a.pass,
                fail: a.fail,
            })
        })
        .collect();

    SuiteReport {
        alpha: cfg.alpha,
        sequences: cfg.sequences,
        bits_per_sequence: cfg.bits_per_sequence,
        rows,
        skipped,
    }
}
