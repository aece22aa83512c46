//! Phone alignments, phoneme classes, and assembly of phonetically biased
//! fixed-length tests.

mod alignment;
mod taxonomy;

pub use alignment::{expand_kernels, parse_alignment, AlignmentEntry, AlignmentTrack, Segment};
pub use taxonomy::*;

use crate::error::{Error, Result};
use crate::frames::FrameSequence;

/// Frames added on each side of a kernel.
pub const KERNEL_CONTEXT: usize = 5;

/// Concatenates, in segment order, every segment whose label matches
/// `selector`. Frames covered by two matching segments are emitted twice.
pub fn select_frames(
    features: &FrameSequence,
    segments: &[Segment],
    selector: &str,
    taxonomy: &PhonemeTaxonomy,
) -> Result<FrameSequence> {
    let sel = taxonomy.resolve(selector)?;
    let mut out = FrameSequence::new(features.dim());
    for seg in segments.iter().filter(|s| sel.matches(&s.label)) {
        if seg.end >= features.len() {
            return Err(Error::KernelOutOfBounds {
                label: seg.label.clone(),
                start: seg.start,
                end: seg.end,
                track_len: features.len(),
            });
        }
        out.extend_from_range(features, seg.start, seg.end + 1)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestAssembly {
    pub speaker_id: String,
    pub selector: String,
    pub tests: Vec<FrameSequence>,
}

/// Cuts `seq` into consecutive blocks of exactly `test_len` frames; the
/// remainder is dropped.
pub fn assemble_tests(seq: &FrameSequence, test_len: usize) -> Vec<FrameSequence> {
    assert!(test_len >= 1, "test length must be at least one frame");
    (0..seq.len() / test_len)
        .map(|k| seq.slice(k * test_len, (k + 1) * test_len))
        .collect()
}
