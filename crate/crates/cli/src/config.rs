//! Configuration documents: a single TOML format holding either a
//! portfolio (experiments sharing a budget) or a study (simulation
//! parameters), discriminated by the `kind` key. Unknown keys are
//! rejected with their path; semantic violations name the offending
//! experiment index.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use std::path::Path;

use powerplan::power::{ExperimentSpec, PilotEstimate, Portfolio};
use powerplan::sim::{Policy, PortfolioGenerator, StudyConfig};

/// A parsed, validated configuration document.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)] // parsed once, never stored in bulk
pub enum Document {
    Portfolio(PortfolioDoc),
    Study(StudyDoc),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioDoc {
    #[allow(dead_code)]
    kind: String,
    pub budget: f64,
    pub alpha: f64,
    pub experiments: Vec<ExperimentDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentDoc {
    pub sigma: Option<f64>,
    pub delta: f64,
    pub theta: Option<f64>,
    pub pilot_s: Option<f64>,
    pub pilot_epsilon: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyDoc {
    #[allow(dead_code)]
    kind: String,
    /// which built-in study the parameters apply to (required only for
    /// `simulate custom`)
    pub study: Option<String>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub budget: Option<f64>,
    pub alpha: Option<f64>,
    pub epsilon: Option<u32>,
    pub m: Option<usize>,
    pub sigma_range: Option<[f64; 2]>,
    pub delta_range: Option<[f64; 2]>,
    pub n_grid: Option<Vec<f64>>,
    pub ratio_grid: Option<Vec<f64>>,
    pub gamma_grid: Option<Vec<f64>>,
    pub delta_grid: Option<Vec<f64>>,
    pub epsilon_set: Option<Vec<u32>>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub policies: Option<Vec<String>>,
    pub objective: Option<String>,
}

/// Parse and validate a document. This is the single preflight path:
/// `validate` and every dispatching command run exactly this code.
pub fn parse_document(text: &str) -> Result<Document> {
    let value: toml::Table = toml::from_str(text).context("config is not well-formed TOML")?;
    let kind = value
        .get("kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| anyhow!("config needs a string `kind` key (\"portfolio\" or \"study\")"))?;
    match kind {
        "portfolio" => {
            let doc: PortfolioDoc =
                PortfolioDoc::deserialize(value).context("invalid portfolio document")?;
            validate_portfolio(&doc)?;
            Ok(Document::Portfolio(doc))
        }
        "study" => {
            let doc: StudyDoc = StudyDoc::deserialize(value).context("invalid study document")?;
            validate_study(&doc)?;
            Ok(Document::Study(doc))
        }
        other => bail!("unknown kind {other:?}; expected \"portfolio\" or \"study\""),
    }
}

pub fn load_document(path: &Path) -> Result<Document> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse_document(&text)
}

fn validate_portfolio(doc: &PortfolioDoc) -> Result<()> {
    if doc.experiments.is_empty() {
        bail!("portfolio needs at least one [[experiments]] entry");
    }
    if !(doc.budget.is_finite() && doc.budget > 0.0) {
        bail!("budget must be positive, got {}", doc.budget);
    }
    if !(doc.alpha > 0.0 && doc.alpha < 1.0) {
        bail!("alpha must lie in (0,1), got {}", doc.alpha);
    }
    for (i, e) in doc.experiments.iter().enumerate() {
        if !(e.delta.is_finite() && e.delta > 0.0) {
            bail!("experiment {i}: delta must be positive, got {}", e.delta);
        }
        if let Some(s) = e.sigma {
            if !(s.is_finite() && s > 0.0) {
                bail!("experiment {i}: sigma must be positive, got {s}");
            }
        }
        if let Some(s) = e.pilot_s {
            if !(s.is_finite() && s > 0.0) {
                bail!("experiment {i}: pilot_s must be positive, got {s}");
            }
        }
        if let Some(eps) = e.pilot_epsilon {
            if eps < 2 {
                bail!("experiment {i}: pilot size must be >= 2, got {eps}");
            }
        }
        // pilot_epsilon alone is allowed: the two-experiment analysis
        // needs a pilot size but no pilot estimate
        if e.pilot_s.is_some() && e.pilot_epsilon.is_none() {
            bail!("experiment {i}: pilot_s needs an accompanying pilot_epsilon");
        }
        if e.sigma.is_none() && e.pilot_s.is_none() {
            bail!("experiment {i}: needs sigma or a pilot estimate (pilot_s + pilot_epsilon)");
        }
    }
    Ok(())
}

fn validate_study(doc: &StudyDoc) -> Result<()> {
    if let Some(r) = doc.replicates {
        if r == 0 {
            bail!("replicates must be >= 1");
        }
    }
    for (name, range) in [("sigma_range", doc.sigma_range), ("delta_range", doc.delta_range)] {
        if let Some([lo, hi]) = range {
            if !(lo > 0.0 && hi >= lo) {
                bail!("{name} needs a positive lower bound and hi >= lo, got [{lo}, {hi}]");
            }
        }
    }
    if let Some(eps) = doc.epsilon {
        if eps < 2 {
            bail!("pilot size must be >= 2, got {eps}");
        }
    }
    if let Some(g) = doc.gamma {
        if !(g > 0.0 && g < 1.0) {
            bail!("gamma must lie in (0,1), got {g}");
        }
    }
    if let Some(p) = &doc.policies {
        for name in p {
            parse_policy(name)?;
        }
    }
    if let Some(o) = &doc.objective {
        if !matches!(o.as_str(), "tol" | "conf" | "exp") {
            bail!("objective must be one of tol|conf|exp, got {o:?}");
        }
    }
    if let Some(s) = &doc.study {
        known_study(s)?;
    }
    Ok(())
}

pub fn parse_policy(name: &str) -> Result<Policy> {
    match name {
        "naive" => Ok(Policy::Naive),
        "oracle_surrogate" => Ok(Policy::OracleSurrogate),
        "surrogate_s" => Ok(Policy::SurrogateS),
        other => bail!("unknown policy {other:?}; expected naive|oracle_surrogate|surrogate_s"),
    }
}

pub fn known_study(name: &str) -> Result<()> {
    match name {
        "fig1" | "fig2" | "fig3" | "fig4" | "fig5" | "fig6" => Ok(()),
        other => bail!("unknown study {other:?}; expected fig1..fig6"),
    }
}

impl PortfolioDoc {
    /// Build the core portfolio (validating again through the library).
    pub fn to_portfolio(&self) -> Result<Portfolio> {
        let experiments = self
            .experiments
            .iter()
            .map(|e| ExperimentSpec {
                sigma: e.sigma,
                pilot: match (e.pilot_s, e.pilot_epsilon) {
                    (Some(s), Some(eps)) => Some(PilotEstimate { s, epsilon: eps }),
                    _ => None,
                },
                delta_gap: e.delta,
                theta: e.theta,
            })
            .collect();
        Portfolio::new(experiments, self.budget, self.alpha).map_err(|e| anyhow!(e))
    }
}

impl StudyDoc {
    /// Merge this document over a base study configuration.
    pub fn apply_to(&self, mut cfg: StudyConfig) -> Result<StudyConfig> {
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(b) = self.budget {
            cfg.budget = b;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if self.m.is_some() || self.sigma_range.is_some() || self.delta_range.is_some() {
            let (mut m, mut sr, mut dr) = match &cfg.generator {
                PortfolioGenerator::Random { m, sigma_range, delta_range } => {
                    (*m, *sigma_range, *delta_range)
                }
                PortfolioGenerator::Fixed { sigmas, deltas } => {
                    (sigmas.len().max(1), (deltas[0], deltas[0]), (deltas[0], deltas[0]))
                }
            };
            if let Some(mm) = self.m {
                m = mm;
            }
            if let Some([lo, hi]) = self.sigma_range {
                sr = (lo, hi);
            }
            if let Some([lo, hi]) = self.delta_range {
                dr = (lo, hi);
            }
            cfg.generator = PortfolioGenerator::Random { m, sigma_range: sr, delta_range: dr };
        }
        if let Some(g) = &self.n_grid {
            cfg.grid = g.clone();
        }
        if let Some(g) = &self.ratio_grid {
            cfg.grid = g.clone();
        }
        if let Some(g) = &self.gamma_grid {
            cfg.gamma_grid = g.clone();
        }
        if let Some(g) = &self.delta_grid {
            cfg.delta_grid = g.clone();
        }
        if let Some(g) = &self.epsilon_set {
            cfg.epsilon_set = g.clone();
        }
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        if let Some(d) = self.delta {
            cfg.delta_tol = d;
        }
        if let Some(p) = &self.policies {
            cfg.policies = p.iter().map(|s| parse_policy(s)).collect::<Result<Vec<_>>>()?;
        }
        Ok(cfg)
    }
}
