//! Experiment protocols over a corpus of speakers.
//!
//! Both protocols start from the same per-speaker stream: the speaker's
//! sentences in a seeded random order, concatenated without removing
//! silences. The first `train` frames of that stream build the reference
//! model; tests come strictly from the frames after it.

mod metrics;
mod report;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, SpeakerData};
use crate::error::{Error, Result};
use crate::frames::{seconds_to_frames, FrameSequence};
use crate::identification::SpeakerRegistry;
use crate::measures::{Measure, MeasureKind, ScConvention};
use crate::model::{FactorizeOptions, FactorizedModel, GaussianModel, ModelAccumulator};
use crate::phonetic::{
    assemble_tests, expand_kernels, select_frames, PhonemeTaxonomy, Segment, TestAssembly, CLASS_NAMES, KERNEL_CONTEXT,
};
use crate::synth::derive_seed;

pub use metrics::{compute_metrics, Metrics};
pub use report::{CellCoords, ExperimentReport, Protocol, ReportCell, ReportFormat};

/// A speaker's sentences in shuffled order, concatenated.
#[derive(Debug, Clone)]
pub struct SpeakerStream {
    pub speaker_id: String,
    pub features: FrameSequence,
    /// `(sentence index in the corpus, first frame in the stream)` in stream order.
    pub layout: Vec<(usize, usize)>,
}

/// Concatenates the speaker's sentences in an order drawn from `seed`.
/// Speaker `index` gets its own derived stream so that adding or removing
/// other speakers does not change its order.
pub fn shuffled_stream(speaker: &SpeakerData, index: usize, seed: u64) -> Result<SpeakerStream> {
    let mut order: Vec<usize> = (0..speaker.sentences.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index as u64));
    order.shuffle(&mut rng);
    let dim = speaker.sentences.first().map(|s| s.features.dim()).unwrap_or(1);
    let mut features = FrameSequence::with_capacity(dim, speaker.total_frames());
    let mut layout = Vec::with_capacity(order.len());
    for i in order {
        layout.push((i, features.len()));
        features.append(&speaker.sentences[i].features)?;
    }
    Ok(SpeakerStream {
        speaker_id: speaker.id.clone(),
        features,
        layout,
    })
}

fn config_hash<T: Serialize>(cfg: &T) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    Sha256::digest(json.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Accumulators over consecutive fixed-size blocks of a stream, so that any
/// block-aligned span is pooled with `merge` instead of re-reading frames.
struct BlockSums {
    block: usize,
    sums: Vec<ModelAccumulator>,
}

impl BlockSums {
    fn new(frames: &FrameSequence, block: usize) -> Result<Self> {
        let sums = (0..frames.len() / block)
            .map(|b| {
                let mut acc = ModelAccumulator::new(frames.dim());
                for t in b * block..(b + 1) * block {
                    acc.accumulate(frames.frame(t))?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { block, sums })
    }

    fn model(&self, start: usize, end: usize, opts: FactorizeOptions) -> Result<GaussianModel> {
        debug_assert!(start.is_multiple_of(self.block) && end.is_multiple_of(self.block));
        let mut acc = self.sums[start / self.block].clone();
        for b in &self.sums[start / self.block + 1..end / self.block] {
            acc.absorb(b)?;
        }
        acc.finalize_with(opts)
    }
}

fn build_registry<'a>(
    ids: impl Iterator<Item = &'a str>,
    blocks: &[BlockSums],
    train_frames: usize,
    opts: FactorizeOptions,
) -> Result<SpeakerRegistry> {
    let mut reg = SpeakerRegistry::with_options(opts);
    for (id, b) in ids.zip(blocks) {
        reg.register(id, b.model(0, train_frames, opts)?)?;
    }
    Ok(reg)
}

/// Per-measure outcome lists `(speaker, correct)`.
type Outcomes = Vec<Vec<(String, bool)>>;

fn score_test(
    registry: &SpeakerRegistry,
    speaker_id: &str,
    test: &FactorizedModel,
    measures: &[Measure],
    outcomes: &mut Outcomes,
) -> Result<()> {
    for (m, out) in measures.iter().zip(outcomes.iter_mut()) {
        let sheet = registry.identify_factorized(speaker_id, test, *m)?;
        out.push((speaker_id.to_string(), sheet.decision == speaker_id));
    }
    Ok(())
}

fn cell_from(
    coords: CellCoords,
    measure: MeasureKind,
    outcomes: &[(String, bool)],
    min_tests: usize,
) -> Result<ReportCell> {
    let metrics = if outcomes.is_empty() {
        None
    } else {
        Some(compute_metrics(outcomes)?)
    };
    Ok(ReportCell {
        coords,
        measure,
        global_accuracy: metrics.map(|m| m.global_accuracy),
        per_speaker_mean_accuracy: metrics.map(|m| m.per_speaker_mean_accuracy),
        n_tests: outcomes.len(),
        below_min_tests: outcomes.len() < min_tests,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DurationProtocolConfig {
    pub train_seconds: Vec<f64>,
    pub test_seconds: Vec<f64>,
    pub max_tests_per_speaker: usize,
    pub measures: Vec<MeasureKind>,
    pub sc_convention: ScConvention,
    pub diagonal_loading: bool,
}

impl Default for DurationProtocolConfig {
    fn default() -> Self {
        Self {
            train_seconds: vec![15.0, 10.0, 6.0, 3.0, 2.0],
            test_seconds: vec![10.0, 6.0, 3.0, 2.0, 1.0],
            max_tests_per_speaker: 20,
            measures: MeasureKind::ALL.to_vec(),
            sc_convention: ScConvention::Decomposition,
            diagonal_loading: true,
        }
    }
}

impl DurationProtocolConfig {
    fn frames(list: &[f64], what: &str) -> Result<Vec<usize>> {
        if list.is_empty() {
            return Err(Error::Config(format!("no {what} durations")));
        }
        list.iter()
            .map(|&s| {
                let f = seconds_to_frames(s);
                if s > 0.0 && f > 0 {
                    Ok(f)
                } else {
                    Err(Error::Config(format!("{what} duration {s} s is not positive")))
                }
            })
            .collect()
    }

    pub fn train_frames(&self) -> Result<Vec<usize>> {
        Self::frames(&self.train_seconds, "training")
    }

    pub fn test_frames(&self) -> Result<Vec<usize>> {
        Self::frames(&self.test_seconds, "test")
    }
}

fn measures_for(kinds: &[MeasureKind], conv: ScConvention) -> Vec<Measure> {
    kinds.iter().map(|&k| Measure::with_convention(k, conv)).collect()
}

/// Training/test duration grid: one cell per (train, test, measure).
pub fn run_duration_experiment(corpus: &Corpus, cfg: &DurationProtocolConfig, seed: u64) -> Result<ExperimentReport> {
    let n_spk = corpus.speakers.len();
    if n_spk < 2 {
        return Err(Error::TooFewSpeakers(n_spk));
    }
    let train_list = cfg.train_frames()?;
    let test_list = cfg.test_frames()?;
    let opts = FactorizeOptions {
        diagonal_loading: cfg.diagonal_loading,
    };
    let measures = measures_for(&cfg.measures, cfg.sc_convention);

    let streams = corpus
        .speakers
        .iter()
        .enumerate()
        .map(|(k, s)| shuffled_stream(s, k, seed))
        .collect::<Result<Vec<_>>>()?;
    let needed = train_list.iter().max().unwrap() + test_list.iter().max().unwrap();
    for s in &streams {
        if s.features.len() < needed {
            return Err(Error::InsufficientMaterial {
                speaker: s.speaker_id.clone(),
                available: s.features.len(),
                needed,
                what: "longest training plus one longest test".into(),
            });
        }
    }

    let block = train_list.iter().chain(&test_list).fold(0, |g, &f| gcd(g, f));
    let blocks = streams
        .iter()
        .map(|s| BlockSums::new(&s.features, block))
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new(Protocol::Duration, seed, config_hash(cfg));
    for &train in &train_list {
        let registry = build_registry(streams.iter().map(|s| s.speaker_id.as_str()), &blocks, train, opts)?;
        for &test in &test_list {
            let mut outcomes: Outcomes = vec![Vec::new(); measures.len()];
            for (s, b) in streams.iter().zip(&blocks) {
                let available = s.features.len() - train;
                let n_tests = (available / test).min(cfg.max_tests_per_speaker);
                for j in 0..n_tests {
                    let start = train + j * test;
                    assert!(start >= train, "test overlaps training material");
                    let model = b.model(start, start + test, opts)?;
                    let test_model = FactorizedModel::with_options(model, opts)?;
                    score_test(&registry, &s.speaker_id, &test_model, &measures, &mut outcomes)?;
                }
            }
            for (m, out) in measures.iter().zip(&outcomes) {
                report.cells.push(cell_from(
                    CellCoords::Duration {
                        train_frames: train,
                        test_frames: test,
                    },
                    m.kind,
                    out,
                    0,
                )?);
            }
        }
    }
    report.sort_cells();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhoneticProtocolConfig {
    pub train_seconds: f64,
    /// Frames per test.
    pub test_len: usize,
    /// Class names or phoneme labels, reported in this order.
    pub selectors: Vec<String>,
    pub measures: Vec<MeasureKind>,
    pub sc_convention: ScConvention,
    /// Cells with fewer tests are flagged.
    pub min_tests: usize,
    pub pre_frames: usize,
    pub post_frames: usize,
    pub diagonal_loading: bool,
}

impl Default for PhoneticProtocolConfig {
    fn default() -> Self {
        Self {
            train_seconds: 15.0,
            test_len: 100,
            selectors: CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
            measures: MeasureKind::ALL.to_vec(),
            sc_convention: ScConvention::Decomposition,
            min_tests: 40,
            pre_frames: KERNEL_CONTEXT,
            post_frames: KERNEL_CONTEXT,
            diagonal_loading: true,
        }
    }
}

/// Training frames and per-selector test assemblies for every speaker.
#[derive(Debug, Clone)]
pub struct PhoneticMaterial {
    pub train: Vec<(String, FrameSequence)>,
    /// Speaker-major, selector-minor.
    pub assemblies: Vec<TestAssembly>,
}

/// Expanded segments of the stream lying entirely after the training part.
/// Segments whose kernel starts inside the training part are dropped; the
/// leading context of the others is clipped at the boundary.
fn test_segments(
    speaker: &SpeakerData,
    stream: &SpeakerStream,
    train_frames: usize,
    cfg: &PhoneticProtocolConfig,
) -> Result<Vec<Segment>> {
    let mut segments = Vec::new();
    for &(idx, offset) in &stream.layout {
        let sentence = &speaker.sentences[idx];
        let len = sentence.features.len();
        if offset + len <= train_frames {
            continue;
        }
        let track = sentence.alignment.as_ref().ok_or_else(|| Error::MissingAlignment {
            speaker: speaker.id.clone(),
            sentence: idx,
        })?;
        let expanded = expand_kernels(track, cfg.pre_frames, cfg.post_frames, len)?;
        for (entry, seg) in track.entries.iter().zip(expanded) {
            if offset + entry.start < train_frames {
                continue;
            }
            segments.push(Segment {
                label: seg.label,
                start: (offset + seg.start).max(train_frames),
                end: offset + seg.end,
            });
        }
    }
    Ok(segments)
}

pub fn prepare_phonetic_material(
    corpus: &Corpus,
    cfg: &PhoneticProtocolConfig,
    taxonomy: &PhonemeTaxonomy,
    seed: u64,
) -> Result<PhoneticMaterial> {
    if cfg.test_len == 0 {
        return Err(Error::Config("test_len must be at least 1".into()));
    }
    for sel in &cfg.selectors {
        taxonomy.resolve(sel)?;
    }
    let train_frames = seconds_to_frames(cfg.train_seconds);
    if train_frames < 2 {
        return Err(Error::Config("training duration too short".into()));
    }
    let mut train = Vec::with_capacity(corpus.speakers.len());
    let mut assemblies = Vec::new();
    for (k, speaker) in corpus.speakers.iter().enumerate() {
        let stream = shuffled_stream(speaker, k, seed)?;
        if stream.features.len() < train_frames {
            return Err(Error::InsufficientMaterial {
                speaker: speaker.id.clone(),
                available: stream.features.len(),
                needed: train_frames,
                what: "training".into(),
            });
        }
        let segments = test_segments(speaker, &stream, train_frames, cfg)?;
        assert!(
            segments.iter().all(|s| s.start >= train_frames),
            "test segment overlaps training material"
        );
        for sel in &cfg.selectors {
            let selected = select_frames(&stream.features, &segments, sel, taxonomy)?;
            assemblies.push(TestAssembly {
                speaker_id: speaker.id.clone(),
                selector: sel.clone(),
                tests: assemble_tests(&selected, cfg.test_len),
            });
        }
        train.push((speaker.id.clone(), stream.features.slice(0, train_frames)));
    }
    Ok(PhoneticMaterial { train, assemblies })
}

/// Phonetically biased tests against references trained on unselected speech.
pub fn run_phonetic_experiment(
    corpus: &Corpus,
    cfg: &PhoneticProtocolConfig,
    taxonomy: &PhonemeTaxonomy,
    seed: u64,
) -> Result<ExperimentReport> {
    let n_spk = corpus.speakers.len();
    if n_spk < 2 {
        return Err(Error::TooFewSpeakers(n_spk));
    }
    let material = prepare_phonetic_material(corpus, cfg, taxonomy, seed)?;
    run_phonetic_on_material(&material, cfg, seed)
}

/// Scores prepared material; split out so callers can inspect the assemblies.
pub fn run_phonetic_on_material(
    material: &PhoneticMaterial,
    cfg: &PhoneticProtocolConfig,
    seed: u64,
) -> Result<ExperimentReport> {
    let opts = FactorizeOptions {
        diagonal_loading: cfg.diagonal_loading,
    };
    let measures = measures_for(&cfg.measures, cfg.sc_convention);
    let mut registry = SpeakerRegistry::with_options(opts);
    for (id, frames) in &material.train {
        registry.register(id.clone(), ModelAccumulator::from_frames(frames).finalize_with(opts)?)?;
    }
    let mut report = ExperimentReport::new(Protocol::Phonetic, seed, config_hash(cfg));
    for sel in &cfg.selectors {
        let mut outcomes: Outcomes = vec![Vec::new(); measures.len()];
        for asm in material.assemblies.iter().filter(|a| a.selector == *sel) {
            for test in &asm.tests {
                let model = ModelAccumulator::from_frames(test).finalize_with(opts)?;
                let test_model = FactorizedModel::with_options(model, opts)?;
                score_test(&registry, &asm.speaker_id, &test_model, &measures, &mut outcomes)?;
            }
        }
        for (m, out) in measures.iter().zip(&outcomes) {
            report.cells.push(cell_from(
                CellCoords::Phonetic { selector: sel.clone() },
                m.kind,
                out,
                cfg.min_tests,
            )?);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_corpus, SynthCorpusConfig};

    fn corpus(n: usize, frames: usize, seed: u64) -> Corpus {
        let cfg = SynthCorpusConfig {
            n_speakers: n,
            p: 4,
            separation: 6.0,
            frames_per_speaker: frames,
            sentence_len_frames: 150,
            seed,
            ..Default::default()
        };
        synth_corpus(&cfg).unwrap().1
    }

    fn small_duration_cfg() -> DurationProtocolConfig {
        DurationProtocolConfig {
            train_seconds: vec![3.0, 1.0],
            test_seconds: vec![2.0, 1.0],
            max_tests_per_speaker: 5,
            ..Default::default()
        }
    }

    #[test]
    fn stream_is_a_permutation_of_sentences() {
        let c = corpus(2, 1000, 1);
        let s = shuffled_stream(&c.speakers[0], 0, 99).unwrap();
        assert_eq!(s.features.len(), 1000);
        let mut idx: Vec<usize> = s.layout.iter().map(|l| l.0).collect();
        idx.sort();
        assert_eq!(idx, (0..c.speakers[0].sentences.len()).collect::<Vec<_>>());
        let (i, off) = s.layout[1];
        assert_eq!(s.features.frame(off), c.speakers[0].sentences[i].features.frame(0));
    }

    #[test]
    fn duration_grid_shape_and_caps() {
        let c = corpus(3, 1000, 2);
        let r = run_duration_experiment(&c, &small_duration_cfg(), 5).unwrap();
        assert_eq!(r.cells.len(), 2 * 2 * 3);
        // train 3 s leaves 700 frames: 3 tests of 2 s per speaker
        assert_eq!(r.duration_cell(300, 200, MeasureKind::MuG).unwrap().n_tests, 9);
        // capped at 5 per speaker
        assert_eq!(r.duration_cell(100, 100, MeasureKind::MuG).unwrap().n_tests, 15);
    }

    #[test]
    fn duration_errors() {
        let c = corpus(1, 1000, 2);
        assert!(matches!(
            run_duration_experiment(&c, &small_duration_cfg(), 0),
            Err(Error::TooFewSpeakers(1))
        ));
        let c = corpus(2, 400, 2);
        assert!(matches!(
            run_duration_experiment(&c, &small_duration_cfg(), 0),
            Err(Error::InsufficientMaterial { .. })
        ));
        let bad = DurationProtocolConfig {
            test_seconds: vec![0.0],
            ..small_duration_cfg()
        };
        assert!(matches!(
            run_duration_experiment(&corpus(2, 1000, 2), &bad, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn phonetic_segments_avoid_training() {
        let c = corpus(2, 3000, 3);
        let cfg = PhoneticProtocolConfig {
            train_seconds: 10.0,
            ..Default::default()
        };
        let m = prepare_phonetic_material(&c, &cfg, &PhonemeTaxonomy::french(), 1).unwrap();
        assert_eq!(m.train[0].1.len(), 1000);
        assert_eq!(m.assemblies.len(), 2 * CLASS_NAMES.len());
        for a in &m.assemblies {
            assert!(a.tests.iter().all(|t| t.len() == 100));
        }
    }

    #[test]
    fn phonetic_errors() {
        let tax = PhonemeTaxonomy::french();
        let mut c = corpus(2, 3000, 3);
        let cfg = PhoneticProtocolConfig {
            train_seconds: 10.0,
            selectors: vec!["Bogus".into()],
            ..Default::default()
        };
        assert!(matches!(
            run_phonetic_experiment(&c, &cfg, &tax, 0),
            Err(Error::UnknownSelector(_))
        ));
        for s in &mut c.speakers[1].sentences {
            s.alignment = None;
        }
        let cfg = PhoneticProtocolConfig {
            train_seconds: 10.0,
            ..Default::default()
        };
        assert!(matches!(
            run_phonetic_experiment(&c, &cfg, &tax, 0),
            Err(Error::MissingAlignment { .. })
        ));
    }
}
