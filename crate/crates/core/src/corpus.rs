//! In-memory corpora and the JSON manifest that describes one on disk.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::FrameSequence;
use crate::frontend::{load_wav, FeatureExtractor, FrontendConfig};
use crate::phonetic::{parse_alignment, AlignmentTrack};

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub id: String,
    pub features: FrameSequence,
    pub alignment: Option<AlignmentTrack>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerData {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

impl SpeakerData {
    pub fn total_frames(&self) -> usize {
        self.sentences.iter().map(|s| s.features.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub speakers: Vec<SpeakerData>,
}

impl Corpus {
    pub fn dim(&self) -> Option<usize> {
        self.speakers
            .iter()
            .flat_map(|s| &s.sentences)
            .map(|s| s.features.dim())
            .next()
    }
}

/// One sentence of a manifest: either a WAV file or a precomputed feature
/// CSV, plus an optional alignment file. Relative paths are resolved against
/// the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSentence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSpeaker {
    pub id: String,
    pub sentences: Vec<ManifestSentence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub frontend: FrontendConfig,
    pub speakers: Vec<ManifestSpeaker>,
}

impl CorpusManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    /// Reads every referenced file, running the front-end on WAV inputs.
    pub fn load_corpus(&self, base_dir: &Path) -> Result<Corpus> {
        let mut extractor: Option<FeatureExtractor> = None;
        let resolve = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }
        };
        let mut speakers = Vec::with_capacity(self.speakers.len());
        for spk in &self.speakers {
            let mut sentences = Vec::with_capacity(spk.sentences.len());
            for (i, s) in spk.sentences.iter().enumerate() {
                let (features, id) = match (&s.audio, &s.features) {
                    (Some(a), None) => {
                        if extractor.is_none() {
                            extractor = Some(FeatureExtractor::new(self.frontend.clone())?);
                        }
                        let buf = load_wav(resolve(a))?;
                        (extractor.as_ref().unwrap().extract(&buf)?, stem(a))
                    }
                    (None, Some(f)) => (FrameSequence::read_csv(resolve(f))?, stem(f)),
                    _ => {
                        return Err(Error::Config(format!(
                            "speaker {:?} sentence {i}: exactly one of audio/features is required",
                            spk.id
                        )))
                    }
                };
                let alignment = s.alignment.as_ref().map(|p| parse_alignment(resolve(p))).transpose()?;
                sentences.push(Sentence {
                    id,
                    features,
                    alignment,
                });
            }
            speakers.push(SpeakerData {
                id: spk.id.clone(),
                sentences,
            });
        }
        Ok(Corpus { speakers })
    }
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Loads a manifest and its corpus; relative paths resolve next to the manifest.
pub fn load_manifest_corpus(path: impl AsRef<Path>) -> Result<(CorpusManifest, Corpus)> {
    let path = path.as_ref();
    let manifest = CorpusManifest::load(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let corpus = manifest.load_corpus(base)?;
    Ok((manifest, corpus))
}
