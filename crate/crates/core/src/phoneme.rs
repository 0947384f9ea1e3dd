//! Phoneme annotations and the articulatory deformation categories they map
//! onto.
//!
//! Labels use the bracketed ASCII notation verbatim (`"[i:]"`, `"[3:]"`,
//! `"[@]"`, ...). Any label outside the category table, such as the bilabial
//! `"[p]"`, produces no measurable canal deformation and is excluded.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Jaw/tongue gesture group shared by phonemes with similar canal impact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeformationCategory {
    TongueForwardJawSlight,
    TongueLowerJawWide,
    TongueBackRaiseJawSlight,
    TongueBackJawModerate,
    TongueRaisedFricativeJawWide,
    TongueRaisedJawSlight,
    TongueFricativeJawSlight,
}

impl DeformationCategory {
    pub const ALL: [DeformationCategory; 7] = [
        DeformationCategory::TongueForwardJawSlight,
        DeformationCategory::TongueLowerJawWide,
        DeformationCategory::TongueBackRaiseJawSlight,
        DeformationCategory::TongueBackJawModerate,
        DeformationCategory::TongueRaisedFricativeJawWide,
        DeformationCategory::TongueRaisedJawSlight,
        DeformationCategory::TongueFricativeJawSlight,
    ];

    /// 1-based category number (`C1` .. `C7`).
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(index: usize) -> Option<Self> {
        index.checked_sub(1).and_then(|i| Self::ALL.get(i).copied())
    }

    pub fn code(self) -> &'static str {
        ["C1", "C2", "C3", "C4", "C5", "C6", "C7"][self as usize]
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::TongueForwardJawSlight => "tongue forward, jaw open slightly",
            Self::TongueLowerJawWide => "tongue lower, jaw open widely",
            Self::TongueBackRaiseJawSlight => "tongue back and raised, jaw open slightly",
            Self::TongueBackJawModerate => "tongue back, jaw open moderately",
            Self::TongueRaisedFricativeJawWide => "tongue raised and fricative, jaw open widely",
            Self::TongueRaisedJawSlight => "tongue raised, jaw open slightly",
            Self::TongueFricativeJawSlight => "tongue fricative, jaw open slightly",
        }
    }

    pub fn phonemes(self) -> &'static [&'static str] {
        CATEGORY_TABLE[self as usize]
    }
}

impl fmt::Display for DeformationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for DeformationCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.strip_prefix('C')
            .and_then(|d| d.parse::<usize>().ok())
            .and_then(Self::from_index)
            .ok_or_else(|| Error::Validation(format!("unknown deformation category {s:?}")))
    }
}

const CATEGORY_TABLE: [&[&str]; 7] = [
    &["[i:]", "[I]", "[I@]", "[eI]", "[@]", "[e@]", "[3:]"],
    &["[æ]", "[ai]", "[6]", "[A]", "[O:]", "[au]"],
    &["[U]", "[u:]", "[U@]"],
    &["[oU]", "[OI]", "[e]", "[2]"],
    &["[tS]", "[tr]", "[ts]", "[dZ]", "[dr]", "[dz]"],
    &["[f]", "[s]", "[S]", "[h]", "[v]", "[z]", "[Z]", "[r]"],
    &["[T]", "[D]", "[l]"],
];

/// Table lookup; `None` marks an excluded phoneme.
pub fn categorize_phoneme(label: &str) -> Option<DeformationCategory> {
    DeformationCategory::ALL
        .into_iter()
        .find(|c| c.phonemes().contains(&label))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeSegment {
    pub label: String,
    pub start: f64,
    pub end: f64,
}

impl PhonemeSegment {
    pub fn new(label: impl Into<String>, start: f64, end: f64) -> Result<Self> {
        let label = label.into();
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(Error::Validation(format!(
                "phoneme label {label:?} must be non-empty without whitespace"
            )));
        }
        if !(start.is_finite() && end.is_finite() && start >= 0.0 && start < end) {
            return Err(Error::Validation(format!(
                "segment {label} needs 0 <= start < end, got [{start}, {end})"
            )));
        }
        Ok(Self { label, start, end })
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Parses `start<TAB>end<TAB>label` lines; `#` lines and blank lines are
/// skipped. Output is sorted by start time and checked for overlap.
pub fn parse_annotations(text: &str) -> Result<Vec<PhonemeSegment>> {
    let mut segments = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let time = |s: &str, what: &str| {
            s.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid {what} time {s:?}"),
            })
        };
        let start = time(fields[0], "start")?;
        let end = time(fields[1], "end")?;
        let seg = PhonemeSegment::new(fields[2].trim(), start, end).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        segments.push((line_no, seg));
    }
    segments.sort_by(|a, b| a.1.start.total_cmp(&b.1.start));
    for pair in segments.windows(2) {
        let ((_, a), (line, b)) = (&pair[0], &pair[1]);
        if b.start < a.end {
            return Err(Error::Validation(format!(
                "segment {} [{}, {}) at line {line} overlaps {} [{}, {})",
                b.label, b.start, b.end, a.label, a.start, a.end
            )));
        }
    }
    Ok(segments.into_iter().map(|(_, s)| s).collect())
}

pub fn format_annotations(segments: &[PhonemeSegment]) -> String {
    let mut out = String::from("# start\tend\tlabel\n");
    for s in segments {
        out.push_str(&format!("{:.6}\t{:.6}\t{}\n", s.start, s.end, s.label));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategorizedSegment {
    pub segment: PhonemeSegment,
    pub category: DeformationCategory,
    /// Indices into the frame list, each frame lying fully inside the segment.
    pub frames: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Alignment {
    pub segments: Vec<CategorizedSegment>,
    pub dropped_excluded: usize,
    /// Categorized segments too short to contain a whole frame.
    pub dropped_uncovered: usize,
}

/// Assigns every frame `[s, s + period)` that lies fully inside an annotated
/// segment to it. Frames straddling a boundary belong to no segment.
pub fn align_segments(
    segments: &[PhonemeSegment],
    frame_starts: &[usize],
    period: usize,
    sample_rate: u32,
) -> Alignment {
    let fs = sample_rate as f64;
    let tol = 1e-9;
    let mut out = Alignment::default();
    for seg in segments {
        let Some(category) = categorize_phoneme(&seg.label) else {
            out.dropped_excluded += 1;
            continue;
        };
        let lo = seg.start * fs - tol;
        let hi = seg.end * fs + tol;
        let frames: Vec<usize> = frame_starts
            .iter()
            .enumerate()
            .filter(|(_, &s)| s as f64 >= lo && (s + period) as f64 <= hi)
            .map(|(i, _)| i)
            .collect();
        if frames.is_empty() {
            out.dropped_uncovered += 1;
            continue;
        }
        out.segments.push(CategorizedSegment {
            segment: seg.clone(),
            category,
            frames,
        });
    }
    out
}

/// Maximal runs of frames that intersect no annotated segment (of any label),
/// keeping only runs of at least `min_frames`.
pub fn silent_frame_runs(
    segments: &[PhonemeSegment],
    frame_starts: &[usize],
    period: usize,
    sample_rate: u32,
    min_frames: usize,
) -> Vec<Vec<usize>> {
    let fs = sample_rate as f64;
    let touches_speech = |s: usize| {
        let (a, b) = (s as f64, (s + period) as f64);
        segments
            .iter()
            .any(|seg| a < seg.end * fs && b > seg.start * fs)
    };
    let mut runs = Vec::new();
    let mut current = Vec::new();
    for (i, &s) in frame_starts.iter().enumerate() {
        if touches_speech(s) {
            if current.len() >= min_frames.max(1) {
                runs.push(std::mem::take(&mut current));
            }
            current.clear();
        } else {
            current.push(i);
        }
    }
    if current.len() >= min_frames.max(1) {
        runs.push(current);
    }
    runs
}

#[cfg(test)]
mod tests {
    use super::*;
    use DeformationCategory as C;

    #[test]
    fn table_lookups() {
        assert_eq!(categorize_phoneme("[i:]"), Some(C::TongueForwardJawSlight));
        assert_eq!(categorize_phoneme("[A]"), Some(C::TongueLowerJawWide));
        assert_eq!(categorize_phoneme("[O:]"), Some(C::TongueLowerJawWide));
        assert_eq!(categorize_phoneme("[p]"), None);
        assert_eq!(categorize_phoneme("[e]"), Some(C::TongueBackJawModerate));
        assert_eq!(categorize_phoneme("[e@]"), Some(C::TongueForwardJawSlight));
        assert_eq!(categorize_phoneme("i:"), None);
    }

    #[test]
    fn category_codes_round_trip() {
        for c in C::ALL {
            assert_eq!(c.code().parse::<C>().unwrap(), c);
            assert_eq!(C::from_index(c.index()), Some(c));
        }
        assert!("C8".parse::<C>().is_err());
        assert!("STATIC".parse::<C>().is_err());
    }

    #[test]
    fn parse_single_line() {
        let segs = parse_annotations("0.000\t0.120\t[i:]").unwrap();
        assert_eq!(segs, vec![PhonemeSegment::new("[i:]", 0.0, 0.12).unwrap()]);
    }

    #[test]
    fn parse_empty_and_comments() {
        assert!(parse_annotations("").unwrap().is_empty());
        assert!(parse_annotations("# header\n\n").unwrap().is_empty());
    }

    #[test]
    fn parse_sorts_and_rejects_overlap() {
        let segs = parse_annotations("0.200\t0.300\t[A]\n0.000\t0.100\t[s]\n").unwrap();
        assert_eq!(segs[0].label, "[s]");
        let err = parse_annotations("0.000\t0.150\t[A]\n0.100\t0.200\t[s]\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_annotations("# c\n0.000\t0.100\t[A]\n0.1 0.2 [s]\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_annotations("0.000\tabc\t[A]\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_annotations("0.300\t0.100\t[A]\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn format_then_parse() {
        let segs = vec![
            PhonemeSegment::new("[i:]", 0.0, 0.125).unwrap(),
            PhonemeSegment::new("[tS]", 0.2, 0.35).unwrap(),
        ];
        assert_eq!(parse_annotations(&format_annotations(&segs)).unwrap(), segs);
    }

    #[test]
    fn align_interval_arithmetic() {
        // 12 ms frames at 48 kHz = 576 samples
        let starts: Vec<usize> = (0..20).map(|i| i * 576).collect();
        let seg = PhonemeSegment::new("[i:]", 0.0, 0.1).unwrap();
        let a = align_segments(&[seg], &starts, 576, 48_000);
        assert_eq!(a.segments.len(), 1);
        assert_eq!(a.segments[0].frames, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn align_drops_short_and_excluded() {
        let starts: Vec<usize> = (0..20).map(|i| i * 576).collect();
        let segs = vec![
            PhonemeSegment::new("[A]", 0.0, 0.011).unwrap(),
            PhonemeSegment::new("[p]", 0.05, 0.2).unwrap(),
        ];
        let a = align_segments(&segs, &starts, 576, 48_000);
        assert!(a.segments.is_empty());
        assert_eq!(a.dropped_uncovered, 1);
        assert_eq!(a.dropped_excluded, 1);
    }

    #[test]
    fn silent_runs_skip_speech() {
        let starts: Vec<usize> = (0..10).map(|i| i * 576).collect();
        // speech covers 0.05 .. 0.07 s, touching frames 4 and 5
        let segs = vec![PhonemeSegment::new("[p]", 0.05, 0.07).unwrap()];
        let runs = silent_frame_runs(&segs, &starts, 576, 48_000, 3);
        assert_eq!(runs, vec![vec![0, 1, 2, 3], vec![6, 7, 8, 9]]);
    }
}
