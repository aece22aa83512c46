use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentEntry {
    pub label: String,
    /// First kernel frame.
    pub start: usize,
    /// Last kernel frame, inclusive.
    pub end: usize,
}

/// Phone kernels of one sentence, sorted and non-overlapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignmentTrack {
    pub sentence_id: String,
    pub entries: Vec<AlignmentEntry>,
}

/// A kernel widened by a few frames on each side. Segments may overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub label: String,
    pub start: usize,
    /// Inclusive.
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl AlignmentTrack {
    /// Parses `sentence_id label start end` lines. Blank lines and text after
    /// `#` are ignored. All lines must name the same sentence.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: origin.to_string(),
            line,
            msg,
        };
        let mut sentence_id: Option<String> = None;
        let mut rows: Vec<(usize, AlignmentEntry)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(err(lineno, format!("expected 4 fields, found {}", fields.len())));
            }
            let frame = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| err(lineno, format!("invalid frame index {s:?}")))
            };
            let (start, end) = (frame(fields[2])?, frame(fields[3])?);
            if start > end {
                return Err(err(lineno, format!("reversed kernel [{start}, {end}]")));
            }
            match &sentence_id {
                None => sentence_id = Some(fields[0].to_string()),
                Some(s) if s != fields[0] => {
                    return Err(err(lineno, format!("sentence id {:?} differs from {s:?}", fields[0])))
                }
                _ => {}
            }
            rows.push((
                lineno,
                AlignmentEntry {
                    label: fields[1].to_string(),
                    start,
                    end,
                },
            ));
        }
        rows.sort_by_key(|(_, e)| (e.start, e.end));
        for w in rows.windows(2) {
            if w[1].1.start <= w[0].1.end {
                return Err(err(
                    w[1].0,
                    format!(
                        "kernel [{}, {}] overlaps [{}, {}]",
                        w[1].1.start, w[1].1.end, w[0].1.start, w[0].1.end
                    ),
                ));
            }
        }
        Ok(Self {
            sentence_id: sentence_id.unwrap_or_default(),
            entries: rows.into_iter().map(|(_, e)| e).collect(),
        })
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{} {} {} {}\n", self.sentence_id, e.label, e.start, e.end))
            .collect()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

pub fn parse_alignment(path: impl AsRef<Path>) -> Result<AlignmentTrack> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    AlignmentTrack::parse(&text, &path.display().to_string())
}

/// Widens each kernel by `pre` frames before and `post` after, clipped to
/// `[0, track_len)`.
pub fn expand_kernels(track: &AlignmentTrack, pre: usize, post: usize, track_len: usize) -> Result<Vec<Segment>> {
    track
        .entries
        .iter()
        .map(|e| {
            if e.end >= track_len {
                return Err(Error::KernelOutOfBounds {
                    label: e.label.clone(),
                    start: e.start,
                    end: e.end,
                    track_len,
                });
            }
            Ok(Segment {
                label: e.label.clone(),
                start: e.start.saturating_sub(pre),
                end: (e.end + post).min(track_len - 1),
            })
        })
        .collect()
}
