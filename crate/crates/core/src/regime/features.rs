use super::RegimeError;
use crate::tsa::{
    choose_delay, choose_dimension, densest_cell, embed, embed_channels, first_return_times,
    lyapunov_rosenstein_embedded, lyapunov_wolf_embedded, mean_period, power_spectrum, recurrence_from_embedding,
    rqa_summary, spectral_peak_count, Embedding, FitWindow, RosensteinOptions, TsaError, WolfOptions,
};
use crate::TimeSeries;

/// Shortest series accepted by [`extract_features`].
pub const MIN_FEATURE_LEN: usize = 10_000;

/// State-space reconstruction fed to the Lyapunov and recurrence analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trajectory {
    /// Delay embedding of `<X>` with AMI delay and FNN dimension.
    ScalarDelay,
    /// `<X>` and `<P>` side by side, each delay-embedded in the given
    /// dimension with the AMI delay of `<X>`.
    PhasePlane(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub trajectory: Trajectory,
    /// Steps each Rosenstein neighbour pair is followed.
    pub horizon: usize,
    /// Width of the slope differences used to find the linear region, in
    /// mean periods.
    pub smoothing_periods: f64,
    /// Manual Rosenstein fit window.
    pub fit: Option<FitWindow>,
    pub wolf_evolve_steps: usize,
    /// Wolf replacement threshold as a fraction of the attractor extent.
    pub wolf_replace_threshold: f64,
    pub peak_prominence: f64,
    pub rqa_epsilon_fraction: f64,
    pub rqa_l_min: usize,
    /// Leading samples used for the recurrence analysis.
    pub rqa_points: usize,
    pub return_cell_size: f64,
    pub ks_level: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            trajectory: Trajectory::ScalarDelay,
            horizon: 1000,
            smoothing_periods: 1.0,
            fit: None,
            wolf_evolve_steps: 10,
            wolf_replace_threshold: 0.02,
            peak_prominence: 0.05,
            rqa_epsilon_fraction: 0.1,
            rqa_l_min: 2,
            rqa_points: 3000,
            return_cell_size: 1e-3,
            ks_level: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    /// Rosenstein estimate of λ_max.
    pub lambda_max: f64,
    pub lambda_wolf: f64,
    /// `|λ_Wolf - λ_Rosenstein| / |λ_Rosenstein|`.
    pub lambda_agreement: f64,
    pub peak_count: usize,
    pub diag_spacing_clusters: usize,
    pub determinism: f64,
    pub ks_exponential_pass: bool,
    /// Set when a feature the classifier relies on is missing.
    pub partial: bool,
    /// One message per failed sub-analysis.
    pub failures: Vec<String>,
}

fn relative_gap(reference: f64, other: f64) -> f64 {
    let gap = (other - reference).abs();
    if gap == 0.0 {
        0.0
    } else {
        gap / reference.abs()
    }
}

fn reconstruct(
    x: &TimeSeries,
    p: Option<&TimeSeries>,
    trajectory: Trajectory,
    m: usize,
    delay: usize,
) -> Result<Embedding, TsaError> {
    match (trajectory, p) {
        (Trajectory::ScalarDelay, _) => embed(x, m, delay),
        (Trajectory::PhasePlane(dim), Some(p)) => embed_channels(&[x, p], dim, delay),
        (Trajectory::PhasePlane(_), None) => {
            Err(TsaError::Parameter("phase-plane trajectory needs the momentum series".into()))
        }
    }
}

/// Run the analysis pipeline on `<X>` (and `<P>` for phase-plane
/// reconstructions). Sub-analyses that fail are listed in `failures`; a
/// failure in one the classifier needs also sets `partial`.
pub fn extract_features(
    x: &TimeSeries,
    p: Option<&TimeSeries>,
    cfg: &FeatureConfig,
) -> Result<FeatureVector, RegimeError> {
    if x.len() < MIN_FEATURE_LEN {
        return Err(TsaError::TooShort { len: x.len(), needed: MIN_FEATURE_LEN }.into());
    }
    if let Some(p) = p {
        if p.len() != x.len() || p.dt() != x.dt() {
            return Err(RegimeError::Parameter("position and momentum series differ in sampling".into()));
        }
    }
    let mut failures = Vec::new();
    let mut partial = false;
    let mut fail = |what: &str, e: &dyn std::fmt::Display, essential: bool| {
        failures.push(format!("{what}: {e}"));
        partial |= essential;
    };

    let peak_count = match power_spectrum(x).and_then(|s| spectral_peak_count(&s, cfg.peak_prominence)) {
        Ok(c) => c,
        Err(e) => {
            fail("spectrum", &e, true);
            0
        }
    };

    let ks_exponential_pass =
        match densest_cell(x, cfg.return_cell_size).and_then(|c| first_return_times(x, c, cfg.return_cell_size)) {
            Ok(r) => r.exponential_accepted(cfg.ks_level),
            Err(e) => {
                fail("return times", &e, false);
                false
            }
        };

    let geometry = choose_delay(x).and_then(|d| Ok((d, choose_dimension(x, d)?, mean_period(x)?)));
    let (mut lambda_max, mut lambda_wolf, mut lambda_agreement) = (f64::NAN, f64::NAN, f64::NAN);
    let (mut determinism, mut diag_spacing_clusters) = (f64::NAN, 0);
    match geometry {
        Err(e) => fail("embedding", &e, true),
        Ok((delay, m, period)) => {
            let theiler = (period.round() as usize).max(1);
            let lyap = reconstruct(x, p, cfg.trajectory, m, delay).and_then(|emb| {
                let mut ros = RosensteinOptions::new(theiler, cfg.horizon);
                ros.smoothing = ((cfg.smoothing_periods * period).round() as usize).max(1);
                ros.min_fit_len = ros.smoothing.max(3);
                ros.fit = cfg.fit;
                let r = lyapunov_rosenstein_embedded(&emb, x.dt(), &ros)?;
                let wolf = WolfOptions::new(theiler, cfg.wolf_evolve_steps, cfg.wolf_replace_threshold);
                let w = lyapunov_wolf_embedded(&emb, x.dt(), &wolf)?;
                Ok((r.lambda_max, w.lambda_max))
            });
            match lyap {
                Ok((r, w)) => {
                    lambda_max = r;
                    lambda_wolf = w;
                    lambda_agreement = relative_gap(r, w);
                }
                Err(e) => fail("lyapunov", &e, true),
            }

            let head = x.head(cfg.rqa_points);
            let p_head = p.map(|p| p.head(cfg.rqa_points));
            let rqa = reconstruct(&head, p_head.as_ref(), cfg.trajectory, m, delay)
                .and_then(|emb| recurrence_from_embedding(&emb, cfg.rqa_epsilon_fraction))
                .and_then(|rm| rqa_summary(&rm, cfg.rqa_l_min));
            match rqa {
                Ok(s) => {
                    determinism = s.determinism;
                    diag_spacing_clusters = s.distinct_spacing_clusters;
                }
                Err(e) => fail("recurrence", &e, true),
            }
        }
    }

    Ok(FeatureVector {
        lambda_max,
        lambda_wolf,
        lambda_agreement,
        peak_count,
        diag_spacing_clusters,
        determinism,
        ks_exponential_pass,
        partial,
        failures,
    })
}
