use proptest::prelude::*;

use eardynamic::phoneme::{
    align_segments, categorize_phoneme, format_annotations, parse_annotations, DeformationCategory,
    PhonemeSegment,
};

fn all_labels() -> Vec<&'static str> {
    DeformationCategory::ALL
        .iter()
        .flat_map(|c| c.phonemes().iter().copied())
        .collect()
}

fn label() -> impl Strategy<Value = String> {
    let mut known: Vec<String> = all_labels().into_iter().map(String::from).collect();
    known.extend(["[p]", "[b]", "[m]"].map(String::from));
    prop::sample::select(known)
}

/// Non-overlapping segments on a microsecond grid, in time order.
fn segments() -> impl Strategy<Value = Vec<PhonemeSegment>> {
    prop::collection::vec((label(), 0u64..50_000, 1u64..300_000), 0..12).prop_map(|items| {
        let mut t = 0u64;
        items
            .into_iter()
            .map(|(label, gap, len)| {
                let start = t + gap;
                t = start + len;
                PhonemeSegment::new(label, start as f64 / 1e6, t as f64 / 1e6).unwrap()
            })
            .collect()
    })
}

#[test]
fn same_row_examples() {
    assert_eq!(
        categorize_phoneme("[i:]"),
        Some(DeformationCategory::TongueForwardJawSlight)
    );
    assert_eq!(categorize_phoneme("[A]"), categorize_phoneme("[O:]"));
    assert_eq!(
        categorize_phoneme("[A]"),
        Some(DeformationCategory::TongueLowerJawWide)
    );
    assert_eq!(categorize_phoneme("[p]"), None);
}

#[test]
fn twelve_ms_frames_in_a_100_ms_segment() {
    let seg = PhonemeSegment::new("[i:]", 0.0, 0.1).unwrap();
    let starts: Vec<usize> = (0..10).map(|i| i * 576).collect();
    let a = align_segments(&[seg], &starts, 576, 48_000);
    assert_eq!(a.segments[0].frames, (0..8).collect::<Vec<_>>());
}

proptest! {
    #[test]
    fn categorize_is_total_and_matches_the_table(s in "\\PC{0,8}", pick in prop::sample::select(all_labels())) {
        let a = categorize_phoneme(&s);
        prop_assert_eq!(a, categorize_phoneme(&s));
        prop_assert_eq!(a.is_some(), all_labels().contains(&s.as_str()));
        let c = categorize_phoneme(pick).unwrap();
        prop_assert!(c.phonemes().contains(&pick));
    }

    #[test]
    fn align_gives_each_frame_at_most_one_segment(
        segs in segments(),
        period in 100usize..800,
        offset in 0usize..500,
    ) {
        let fs = 48_000u32;
        let end = segs.last().map_or(1.0, |s| s.end) + 0.05;
        let starts: Vec<usize> = (0..)
            .map(|i| offset + i * period)
            .take_while(|s| (*s as f64) < end * fs as f64)
            .collect();
        let a = align_segments(&segs, &starts, period, fs);
        let mut owner = vec![None; starts.len()];
        for (k, cs) in a.segments.iter().enumerate() {
            prop_assert!(!cs.frames.is_empty());
            prop_assert_eq!(Some(cs.category), categorize_phoneme(&cs.segment.label));
            for &f in &cs.frames {
                prop_assert!(owner[f].is_none(), "frame {} assigned twice", f);
                owner[f] = Some(k);
                let (s, e) = (starts[f] as f64 / fs as f64, (starts[f] + period) as f64 / fs as f64);
                prop_assert!(s >= cs.segment.start - 1e-9 && e <= cs.segment.end + 1e-9);
            }
        }
        let excluded = segs.iter().filter(|s| categorize_phoneme(&s.label).is_none()).count();
        prop_assert_eq!(a.dropped_excluded, excluded);
        prop_assert_eq!(a.segments.len() + a.dropped_excluded + a.dropped_uncovered, segs.len());
    }

    #[test]
    fn annotation_text_round_trips(segs in segments()) {
        let text = format_annotations(&segs);
        prop_assert_eq!(parse_annotations(&text).unwrap(), segs);
    }
}
