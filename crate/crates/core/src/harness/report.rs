use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::FRAMES_PER_SECOND;
use crate::measures::MeasureKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellCoords {
    Duration { train_frames: usize, test_frames: usize },
    Phonetic { selector: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub coords: CellCoords,
    pub measure: MeasureKind,
    /// `None` when the cell has no tests.
    pub global_accuracy: Option<f64>,
    pub per_speaker_mean_accuracy: Option<f64>,
    pub n_tests: usize,
    /// Fewer tests than the protocol's reporting minimum.
    pub below_min_tests: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    Duration,
    Phonetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub protocol: Protocol,
    pub seed: u64,
    pub config_hash: String,
    pub cells: Vec<ReportCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

fn seconds(frames: usize) -> String {
    format!("{}", frames as f64 / FRAMES_PER_SECOND as f64)
}

fn full(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn short(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.1}")).unwrap_or_else(|| "-".into())
}

fn measure_label(m: MeasureKind) -> &'static str {
    match m {
        MeasureKind::MuG => "μ_G",
        MeasureKind::MuGc => "μ_Gc",
        MeasureKind::MuSc => "μ_Sc",
    }
}

impl ExperimentReport {
    pub fn new(protocol: Protocol, seed: u64, config_hash: String) -> Self {
        Self {
            protocol,
            seed,
            config_hash,
            cells: Vec::new(),
        }
    }

    pub fn cell(&self, coords: &CellCoords, measure: MeasureKind) -> Option<&ReportCell> {
        self.cells.iter().find(|c| c.coords == *coords && c.measure == measure)
    }

    pub fn duration_cell(&self, train_frames: usize, test_frames: usize, measure: MeasureKind) -> Option<&ReportCell> {
        self.cell(
            &CellCoords::Duration {
                train_frames,
                test_frames,
            },
            measure,
        )
    }

    /// Duration cells sorted by training length (longest first), test length
    /// (longest first) and measure. Phonetic cells keep selector order.
    pub fn sort_cells(&mut self) {
        if self.protocol == Protocol::Duration {
            self.cells.sort_by(|a, b| {
                let key = |c: &ReportCell| match c.coords {
                    CellCoords::Duration {
                        train_frames,
                        test_frames,
                    } => (usize::MAX - train_frames, usize::MAX - test_frames, c.measure),
                    CellCoords::Phonetic { .. } => (0, 0, c.measure),
                };
                key(a).cmp(&key(b))
            });
        }
    }

    pub fn emit(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Markdown => self.to_markdown(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.protocol {
            Protocol::Duration => {
                out.push_str("train_s,test_s,measure,global_accuracy,per_speaker_mean_accuracy,n_tests\n");
                for c in &self.cells {
                    if let CellCoords::Duration {
                        train_frames,
                        test_frames,
                    } = c.coords
                    {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{}",
                            seconds(train_frames),
                            seconds(test_frames),
                            c.measure,
                            full(c.global_accuracy),
                            full(c.per_speaker_mean_accuracy),
                            c.n_tests
                        );
                    }
                }
            }
            Protocol::Phonetic => {
                out.push_str("selector,measure,global_accuracy,per_speaker_mean_accuracy,n_tests,below_min_tests\n");
                for c in &self.cells {
                    if let CellCoords::Phonetic { selector } = &c.coords {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{}",
                            selector,
                            c.measure,
                            full(c.global_accuracy),
                            full(c.per_speaker_mean_accuracy),
                            c.n_tests,
                            c.below_min_tests
                        );
                    }
                }
            }
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        match self.protocol {
            Protocol::Duration => {
                out.push_str("| Train | Test | Measure | I (%) | M (%) | Tests |\n");
                out.push_str("|---|---|---|---|---|---|\n");
                for c in &self.cells {
                    if let CellCoords::Duration {
                        train_frames,
                        test_frames,
                    } = c.coords
                    {
                        let _ = writeln!(
                            out,
                            "| {} s | {} s | {} | {} | {} | ({}) |",
                            seconds(train_frames),
                            seconds(test_frames),
                            measure_label(c.measure),
                            short(c.global_accuracy),
                            short(c.per_speaker_mean_accuracy),
                            c.n_tests
                        );
                    }
                }
            }
            Protocol::Phonetic => {
                out.push_str("| Selector | Measure | I (%) | M (%) | Tests |\n");
                out.push_str("|---|---|---|---|---|\n");
                for c in &self.cells {
                    if let CellCoords::Phonetic { selector } = &c.coords {
                        let flag = if c.below_min_tests { " *" } else { "" };
                        let _ = writeln!(
                            out,
                            "| {} | {} | {} | {} | ({}){} |",
                            selector,
                            measure_label(c.measure),
                            short(c.global_accuracy),
                            short(c.per_speaker_mean_accuracy),
                            c.n_tests,
                            flag
                        );
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(train: usize, test: usize, m: MeasureKind, acc: f64, n: usize) -> ReportCell {
        ReportCell {
            coords: CellCoords::Duration {
                train_frames: train,
                test_frames: test,
            },
            measure: m,
            global_accuracy: Some(acc),
            per_speaker_mean_accuracy: Some(acc),
            n_tests: n,
            below_min_tests: false,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = ExperimentReport::new(Protocol::Duration, 1, "h".into());
        assert_eq!(r.to_csv().lines().count(), 1);
        assert_eq!(r.to_markdown().lines().count(), 2);
        let r = ExperimentReport::new(Protocol::Phonetic, 1, "h".into());
        assert_eq!(r.to_csv().lines().count(), 1);
    }

    #[test]
    fn markdown_formatting_fixture() {
        let mut r = ExperimentReport::new(Protocol::Duration, 1, "h".into());
        r.cells.push(cell(1500, 100, MeasureKind::MuG, 87.5, 1340));
        let md = r.to_markdown();
        let row = md.lines().nth(2).unwrap();
        assert!(row.contains("87.5") && row.contains("(1340)"), "{row}");
        assert!(row.starts_with("| 15 s | 1 s | μ_G"));
        assert_eq!(md, r.to_markdown());
    }

    #[test]
    fn ordering() {
        let mut r = ExperimentReport::new(Protocol::Duration, 1, "h".into());
        r.cells.push(cell(200, 100, MeasureKind::MuSc, 1.0, 1));
        r.cells.push(cell(1500, 100, MeasureKind::MuGc, 1.0, 1));
        r.cells.push(cell(1500, 1000, MeasureKind::MuG, 1.0, 1));
        r.cells.push(cell(1500, 100, MeasureKind::MuG, 1.0, 1));
        r.sort_cells();
        let order: Vec<_> = r
            .to_csv()
            .lines()
            .skip(1)
            .map(|l| l.split(',').take(3).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(order, ["15,10,mu_g", "15,1,mu_g", "15,1,mu_gc", "2,1,mu_sc"]);
    }

    #[test]
    fn empty_cells_and_formats() {
        let mut r = ExperimentReport::new(Protocol::Phonetic, 1, "h".into());
        r.cells.push(ReportCell {
            coords: CellCoords::Phonetic {
                selector: "Fricatives".into(),
            },
            measure: MeasureKind::MuG,
            global_accuracy: None,
            per_speaker_mean_accuracy: None,
            n_tests: 0,
            below_min_tests: true,
        });
        assert_eq!(r.to_csv().lines().nth(1), Some("Fricatives,mu_g,,,0,true"));
        assert!(r.to_markdown().contains("| Fricatives | μ_G | - | - | (0) * |"));
        assert!(matches!("xml".parse::<ReportFormat>(), Err(Error::UnknownFormat(_))));
    }
}
