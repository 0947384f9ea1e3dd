//! Recording + annotations + IMU trace to keyed channel-response features.

use crate::auth::{select_template_key, TemplateKey};
use crate::channel::{
    to_feature, ChannelEstimator, ChannelResponse, FeatureVector, DEFAULT_REGULARIZATION,
};
use crate::dsp::{
    frame_chirp_periods, synthesize_probe, BandSplitConfig, BandSplitter, ProbeConfig, ProbeSignal,
    Recording,
};
use crate::error::{Error, Result};
use crate::motion::{classify_posture, ImuSample, MotionState};
use crate::phoneme::{align_segments, silent_frame_runs, DeformationCategory, PhonemeSegment};

/// Shortest silent run of frames accepted as a static window.
pub const MIN_STATIC_FRAMES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub probe: ProbeConfig,
    pub band_split: BandSplitConfig,
    pub regularization: f64,
    pub min_static_frames: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            probe: ProbeConfig::default(),
            band_split: BandSplitConfig::default(),
            regularization: DEFAULT_REGULARIZATION,
            min_static_frames: MIN_STATIC_FRAMES,
        }
    }
}

/// Feature of one annotated segment (`category: Some`) or one silent window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFeature {
    pub category: Option<DeformationCategory>,
    pub start: f64,
    pub frames: usize,
    pub feature: FeatureVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionAnalysis {
    /// Phoneme windows in annotation order.
    pub phonemes: Vec<WindowFeature>,
    /// Silent windows in time order.
    pub silent: Vec<WindowFeature>,
    pub dropped_excluded: usize,
    pub dropped_uncovered: usize,
}

impl SessionAnalysis {
    /// Phoneme windows when any exist, otherwise the silent windows.
    pub fn evidence(&self) -> &[WindowFeature] {
        if self.phonemes.is_empty() {
            &self.silent
        } else {
            &self.phonemes
        }
    }
}

#[derive(Debug)]
pub struct Pipeline {
    config: PipelineConfig,
    probe: ProbeSignal,
    splitter: BandSplitter,
    estimator: ChannelEstimator,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        let probe = synthesize_probe(config.probe)?;
        let splitter = BandSplitter::new(config.band_split, config.probe.sample_rate)?;
        let estimator = ChannelEstimator::new(&probe, config.regularization)?;
        Ok(Self {
            config,
            probe,
            splitter,
            estimator,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn probe(&self) -> &ProbeSignal {
        &self.probe
    }

    pub fn estimator(&self) -> &ChannelEstimator {
        &self.estimator
    }

    /// Band split, framing, per-frame estimation and segment averaging. Each
    /// window's feature comes from the mean complex response over its frames.
    pub fn analyze(
        &self,
        rec: &Recording,
        annotations: &[PhonemeSegment],
    ) -> Result<SessionAnalysis> {
        let (inaudible, _audible) = self.splitter.split(rec)?;
        let frames = frame_chirp_periods(&inaudible, &self.probe)?;
        let starts: Vec<usize> = frames.iter().map(|f| f.start).collect();
        let responses = frames
            .iter()
            .map(|f| self.estimator.estimate(f.samples))
            .collect::<Result<Vec<_>>>()?;
        let period = self.probe.period_len();
        let fs = rec.sample_rate;

        let window = |category, start, idx: &[usize]| -> Result<WindowFeature> {
            let picked: Vec<ChannelResponse> = idx.iter().map(|&i| responses[i].clone()).collect();
            Ok(WindowFeature {
                category,
                start,
                frames: idx.len(),
                feature: to_feature(&ChannelResponse::average(&picked)?)?,
            })
        };

        let alignment = align_segments(annotations, &starts, period, fs);
        let phonemes = alignment
            .segments
            .iter()
            .map(|s| window(Some(s.category), s.segment.start, &s.frames))
            .collect::<Result<Vec<_>>>()?;
        let silent = silent_frame_runs(
            annotations,
            &starts,
            period,
            fs,
            self.config.min_static_frames,
        )
        .iter()
        .map(|run| window(None, starts[run[0]] as f64 / fs as f64, run))
        .collect::<Result<Vec<_>>>()?;
        Ok(SessionAnalysis {
            phonemes,
            silent,
            dropped_excluded: alignment.dropped_excluded,
            dropped_uncovered: alignment.dropped_uncovered,
        })
    }
}

/// Template keys for the evidence windows of one session.
pub fn keyed_features(
    windows: &[WindowFeature],
    state: MotionState,
) -> Result<Vec<(TemplateKey, FeatureVector)>> {
    windows
        .iter()
        .map(|w| {
            Ok((
                select_template_key(state, w.category.is_some(), w.category)?,
                w.feature.clone(),
            ))
        })
        .collect()
}

/// Full authentication front end. Evidence is checked before the IMU trace,
/// so a session with nothing to score reports no-evidence even when its trace
/// is also unusable.
pub fn session_features(
    pipeline: &Pipeline,
    rec: &Recording,
    annotations: &[PhonemeSegment],
    imu: &[ImuSample],
) -> Result<(MotionState, Vec<(TemplateKey, FeatureVector)>)> {
    let analysis = pipeline.analyze(rec, annotations)?;
    if analysis.evidence().is_empty() {
        return Err(Error::NoEvidence(format!(
            "no usable phoneme segment or silent window ({} excluded, {} too short)",
            analysis.dropped_excluded, analysis.dropped_uncovered
        )));
    }
    let state = classify_posture(imu)?;
    Ok((state, keyed_features(analysis.evidence(), state)?))
}
