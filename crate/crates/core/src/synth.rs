//! Seeded synthetic Gaussian speakers.
//!
//! Each speaker has a base mean and covariance in feature space and a mean
//! offset per phone label. Frames are drawn directly as feature vectors, so
//! the true parameters are known and every measure has a closed-form target.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusManifest, ManifestSentence, ManifestSpeaker, Sentence, SpeakerData};
use crate::error::{Error, Result};
use crate::frames::FrameSequence;
use crate::measures::Measure;
use crate::model::{FactorizedModel, GaussianModel};
use crate::phonetic::{AlignmentEntry, AlignmentTrack, PhonemeTaxonomy};

/// Label used for sentence-initial and sentence-final silence.
pub const SILENCE: &str = "sil";

/// Mixes a run seed with a stream index into an independent seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrueSpeaker {
    pub id: String,
    pub base_mean: DVector<f64>,
    pub base_cov: DMatrix<f64>,
    pub class_offsets: BTreeMap<String, DVector<f64>>,
    chol: DMatrix<f64>,
}

impl TrueSpeaker {
    pub fn new(
        id: impl Into<String>,
        base_mean: DVector<f64>,
        base_cov: DMatrix<f64>,
        class_offsets: BTreeMap<String, DVector<f64>>,
    ) -> Result<Self> {
        let p = base_mean.len();
        if base_cov.nrows() != p || base_cov.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: base_cov.nrows(),
            });
        }
        if let Some(o) = class_offsets.values().find(|o| o.len() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: o.len(),
            });
        }
        let chol = nalgebra::Cholesky::new(base_cov.clone())
            .ok_or(Error::NotPositiveDefinite)?
            .l();
        Ok(Self {
            id: id.into(),
            base_mean,
            base_cov,
            class_offsets,
            chol,
        })
    }

    pub fn dim(&self) -> usize {
        self.base_mean.len()
    }

    /// Base parameters as a model with a nominal frame count.
    pub fn true_model(&self, count: usize) -> GaussianModel {
        GaussianModel {
            mean: self.base_mean.clone(),
            cov: self.base_cov.clone(),
            count,
        }
    }

    fn sample_into<R: Rng>(&self, mean: &DVector<f64>, rng: &mut R, out: &mut [f64]) {
        let p = self.dim();
        let z: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        for i in 0..p {
            let mut v = mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                v += self.chol[(i, j)] * zj;
            }
            out[i] = v;
        }
    }

    /// Draws `n` frames from the base Gaussian.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> FrameSequence {
        let p = self.dim();
        let mut data = vec![0.0; n * p];
        for row in data.chunks_exact_mut(p) {
            self.sample_into(&self.base_mean, rng, row);
        }
        FrameSequence::from_flat(p, data).expect("p divides buffer")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthCorpusConfig {
    pub n_speakers: usize,
    pub p: usize,
    /// Norm of every speaker's base mean (directions are uniform).
    pub separation: f64,
    /// Per-dimension standard deviation of the per-label mean offsets.
    pub class_spread: f64,
    /// Weight of the speaker-specific part of the covariance factor; 0 gives
    /// every speaker the same covariance.
    pub cov_spread: f64,
    pub frames_per_speaker: usize,
    pub sentence_len_frames: usize,
    /// Shortest and longest phone run, in frames.
    pub run_len: (usize, usize),
    /// Silence frames at each end of a sentence.
    pub silence_frames: usize,
    pub seed: u64,
}

impl Default for SynthCorpusConfig {
    fn default() -> Self {
        Self {
            n_speakers: 20,
            p: 24,
            separation: 0.3,
            class_spread: 0.0,
            cov_spread: 0.15,
            frames_per_speaker: 6000,
            sentence_len_frames: 300,
            run_len: (3, 12),
            silence_frames: 5,
            seed: 0,
        }
    }
}

impl SynthCorpusConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_speakers == 0 || self.p == 0 || self.frames_per_speaker == 0 {
            return fail("n_speakers, p and frames_per_speaker must be at least 1");
        }
        if self.sentence_len_frames <= 2 * self.silence_frames {
            return fail("sentence_len_frames must exceed the two silence margins");
        }
        if self.run_len.0 == 0 || self.run_len.0 > self.run_len.1 {
            return fail("run_len must satisfy 1 <= min <= max");
        }
        if !(self.separation >= 0.0 && self.class_spread >= 0.0 && self.cov_spread >= 0.0) {
            return fail("separation, class_spread and cov_spread must be non-negative");
        }
        Ok(())
    }
}

/// Labels every synthetic speaker has offsets for: the taxonomy's phonemes
/// plus silence.
pub fn synth_labels(taxonomy: &PhonemeTaxonomy) -> Vec<String> {
    let mut labels: Vec<String> = taxonomy.phonemes().iter().cloned().collect();
    labels.push(SILENCE.to_string());
    labels
}

fn gaussian_matrix<R: Rng>(rng: &mut R, p: usize) -> DMatrix<f64> {
    let scale = 1.0 / (p as f64).sqrt();
    DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal) * scale)
}

fn gaussian_vector<R: Rng>(rng: &mut R, p: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal) * scale)
}

/// Draws the speakers for `cfg`. Covariances are `A·Aᵀ + I` rescaled to unit
/// average variance, where `A` mixes a factor shared by all speakers with a
/// speaker-specific one.
pub fn sample_speakers(cfg: &SynthCorpusConfig, taxonomy: &PhonemeTaxonomy) -> Result<Vec<TrueSpeaker>> {
    cfg.validate()?;
    let p = cfg.p;
    let labels = synth_labels(taxonomy);
    let mut shared_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, u64::MAX));
    let shared = gaussian_matrix(&mut shared_rng, p);
    (0..cfg.n_speakers)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, k as u64));
            let direction = gaussian_vector(&mut rng, p, 1.0);
            let base_mean = direction.normalize() * cfg.separation;
            let a = &shared + gaussian_matrix(&mut rng, p) * cfg.cov_spread;
            let mut cov = &a * a.transpose() + DMatrix::identity(p, p);
            cov *= p as f64 / cov.trace();
            let offsets = labels
                .iter()
                .map(|l| (l.clone(), gaussian_vector(&mut rng, p, cfg.class_spread)))
                .collect();
            TrueSpeaker::new(format!("spk{k:03}"), base_mean, cov, offsets)
        })
        .collect()
}

/// Draws one frame per entry of `labels` from `N(base_mean + offset, base_cov)`
/// and returns the alignment whose kernels are exactly the label runs.
pub fn generate_labeled_frames<R: Rng>(
    speaker: &TrueSpeaker,
    sentence_id: &str,
    labels: &[&str],
    rng: &mut R,
) -> Result<(FrameSequence, AlignmentTrack)> {
    let p = speaker.dim();
    let mut data = vec![0.0; labels.len() * p];
    let mut entries: Vec<AlignmentEntry> = Vec::new();
    let mut mean = speaker.base_mean.clone();
    for (t, (&label, row)) in labels.iter().zip(data.chunks_exact_mut(p)).enumerate() {
        let offset = speaker
            .class_offsets
            .get(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        match entries.last_mut() {
            Some(e) if e.label == label => e.end = t,
            _ => {
                mean = &speaker.base_mean + offset;
                entries.push(AlignmentEntry {
                    label: label.to_string(),
                    start: t,
                    end: t,
                })
            }
        }
        speaker.sample_into(&mean, rng, row);
    }
    Ok((
        FrameSequence::from_flat(p, data)?,
        AlignmentTrack {
            sentence_id: sentence_id.to_string(),
            entries,
        },
    ))
}

/// Random phone-run label sequence of exactly `len` frames framed by silence.
pub fn random_label_sequence<'a, R: Rng>(
    phones: &'a [String],
    len: usize,
    run_len: (usize, usize),
    silence: usize,
    rng: &mut R,
) -> Vec<&'a str> {
    let mut out: Vec<&str> = vec![SILENCE; silence.min(len)];
    let body_end = len.saturating_sub(silence);
    let mut prev: Option<&str> = None;
    while out.len() < body_end {
        let phone = loop {
            let c = phones.choose(rng).expect("phone inventory is non-empty").as_str();
            if Some(c) != prev || phones.len() == 1 {
                break c;
            }
        };
        prev = Some(phone);
        let run = rng.random_range(run_len.0..=run_len.1).min(body_end - out.len());
        out.extend(std::iter::repeat_n(phone, run));
    }
    out.resize(len, SILENCE);
    out
}

/// Generates a labeled corpus from already-sampled speakers.
pub fn generate_corpus(
    speakers: &[TrueSpeaker],
    cfg: &SynthCorpusConfig,
    taxonomy: &PhonemeTaxonomy,
) -> Result<Corpus> {
    cfg.validate()?;
    let phones: Vec<String> = taxonomy.phonemes().iter().cloned().collect();
    let speakers = speakers
        .iter()
        .enumerate()
        .map(|(k, spk)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed ^ 0x5eed_f4a3, k as u64));
            let mut sentences = Vec::new();
            let mut remaining = cfg.frames_per_speaker;
            while remaining > 0 {
                let len = remaining.min(cfg.sentence_len_frames);
                let labels = random_label_sequence(&phones, len, cfg.run_len, cfg.silence_frames, &mut rng);
                let sid = format!("{}_s{:03}", spk.id, sentences.len());
                let (features, track) = generate_labeled_frames(spk, &sid, &labels, &mut rng)?;
                sentences.push(Sentence {
                    id: sid,
                    features,
                    alignment: Some(track),
                });
                remaining -= len;
            }
            Ok(SpeakerData {
                id: spk.id.clone(),
                sentences,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus { speakers })
}

/// Samples speakers and generates their corpus in one step.
pub fn synth_corpus(cfg: &SynthCorpusConfig) -> Result<(Vec<TrueSpeaker>, Corpus)> {
    let taxonomy = PhonemeTaxonomy::french();
    let speakers = sample_speakers(cfg, &taxonomy)?;
    let corpus = generate_corpus(&speakers, cfg, &taxonomy)?;
    Ok((speakers, corpus))
}

/// The measure evaluated on the true base parameters with equal weights.
pub fn true_measure(a: &TrueSpeaker, b: &TrueSpeaker, measure: Measure) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let x = FactorizedModel::new(a.true_model(1))?;
    let y = FactorizedModel::new(b.true_model(1))?;
    measure.evaluate(&x, &y)
}

/// Writes feature CSVs, alignment files and a manifest under `dir`.
pub fn write_corpus(corpus: &Corpus, seed: u64, dir: &Path) -> Result<CorpusManifest> {
    let mut speakers = Vec::with_capacity(corpus.speakers.len());
    for spk in &corpus.speakers {
        let sub = dir.join(&spk.id);
        fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        let mut sentences = Vec::with_capacity(spk.sentences.len());
        for s in &spk.sentences {
            let feat = Path::new(&spk.id).join(format!("{}.csv", s.id));
            s.features.write_csv(dir.join(&feat))?;
            let alignment = match &s.alignment {
                Some(track) => {
                    let ali = Path::new(&spk.id).join(format!("{}.ali", s.id));
                    track.write(dir.join(&ali))?;
                    Some(ali)
                }
                None => None,
            };
            sentences.push(ManifestSentence {
                audio: None,
                features: Some(feat),
                alignment,
            });
        }
        speakers.push(ManifestSpeaker {
            id: spk.id.clone(),
            sentences,
        });
    }
    let manifest = CorpusManifest {
        seed,
        frontend: Default::default(),
        speakers,
    };
    manifest.save(dir.join("manifest.json"))?;
    Ok(manifest)
}
