//! Run configuration: flat `key = value` text grouped under one level
//! of `[section]` headers.  Unknown sections, unknown keys, and
//! duplicate keys are hard errors so a typo never silently falls back
//! to a default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::convergence::StudySettings;
use crate::error::{Error, Result};
use crate::manufactured::{self, ManufacturedProblem};
use crate::picard::PicardOptions;
use crate::system::{LaplacianMode, PressureGradientMode};

/// What a run computes.  Study-style kinds consume the whole spacing
/// list; single-solve kinds use its finest entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// Trigonometric periodic Stokes truth.
    StokesManufactured,
    /// Divergence-free quadratic velocity with linear pressure on the
    /// enclosed unit square; exact-reproduction regime.
    StokesPolynomial,
    Kovasznay,
    Cavity,
    InfsupStudy,
    /// Alias for a refinement study on the trigonometric truth.
    Converge,
}

impl ProblemKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "stokes-manufactured" => Ok(Self::StokesManufactured),
            "stokes-polynomial" => Ok(Self::StokesPolynomial),
            "kovasznay" => Ok(Self::Kovasznay),
            "cavity" => Ok(Self::Cavity),
            "infsup-study" => Ok(Self::InfsupStudy),
            "converge" => Ok(Self::Converge),
            other => Err(Error::Config(format!("unknown problem kind '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::StokesManufactured => "stokes-manufactured",
            Self::StokesPolynomial => "stokes-polynomial",
            Self::Kovasznay => "kovasznay",
            Self::Cavity => "cavity",
            Self::InfsupStudy => "infsup-study",
            Self::Converge => "converge",
        }
    }
}

/// `Auto` selects the composite viscous block on regular lattices and
/// the direct one whenever nodes are perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaplacianChoice {
    #[default]
    Auto,
    Composite,
    Direct,
}

/// Fully resolved run description; every field has a value after
/// parsing, so dumping it back out captures the defaults too.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: ProblemKind,
    pub reynolds: f64,
    /// Cavity centerline reference table; compared only when set.
    pub ghia_reference: Option<PathBuf>,
    /// Strictly descending spacings.
    pub hs: Vec<f64>,
    /// Reproduction degree m.
    pub degree: usize,
    /// Window radius in units of h.
    pub dilation: f64,
    /// Relative lattice jitter amplitude; 0 keeps regular nodes.
    pub perturbation: f64,
    pub seed: u64,
    pub laplacian: LaplacianChoice,
    pub gradient: PressureGradientMode,
    pub bc_weight: f64,
    /// Pressure smoothness tie weight on wall-bounded domains; 0 off.
    pub pressure_tie: f64,
    pub picard: PicardOptions,
    pub out_dir: PathBuf,
    pub centerline_samples: usize,
}

fn parse_fraction(s: &str) -> Result<f64> {
    let bad = || Error::Config(format!("cannot read number '{s}'"));
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| bad())?;
        let d: f64 = den.trim().parse().map_err(|_| bad())?;
        if d == 0.0 {
            return Err(Error::Config(format!("zero denominator in '{s}'")));
        }
        Ok(n / d)
    } else {
        s.trim().parse().map_err(|_| bad())
    }
}

/// Split raw text into (section, key) -> (value, line) with strict
/// duplicate detection.
fn tokenize(text: &str) -> Result<BTreeMap<(String, String), (String, usize)>> {
    let mut map = BTreeMap::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.split_once('#') {
            Some((head, _)) => head.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| {
                Error::Config(format!("line {lineno}: unterminated section header"))
            })?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {lineno}: expected 'key = value', got '{line}'"))
        })?;
        if section.is_empty() {
            return Err(Error::Config(format!(
                "line {lineno}: key outside any [section]"
            )));
        }
        let slot = (section.clone(), key.trim().to_string());
        if map
            .insert(slot.clone(), (value.trim().to_string(), lineno))
            .is_some()
        {
            return Err(Error::Config(format!(
                "line {lineno}: duplicate key '{}' in [{}]",
                slot.1, slot.0
            )));
        }
    }
    Ok(map)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = tokenize(text)?;
        let mut take = |section: &str, key: &str| -> Option<String> {
            map.remove(&(section.to_string(), key.to_string()))
                .map(|(v, _)| v)
        };

        let kind_text = take("problem", "kind")
            .ok_or_else(|| Error::Config("missing required key [problem] kind".into()))?;
        let kind = ProblemKind::parse(&kind_text)?;
        let reynolds = match take("problem", "reynolds") {
            Some(v) => parse_fraction(&v)?,
            None => 40.0,
        };
        let ghia_reference = match take("problem", "ghia_reference") {
            None => None,
            Some(v) if v == "none" => None,
            Some(v) => Some(PathBuf::from(v)),
        };

        let h_text = take("discretization", "h")
            .ok_or_else(|| Error::Config("missing required key [discretization] h".into()))?;
        let hs = h_text
            .split(',')
            .map(parse_fraction)
            .collect::<Result<Vec<f64>>>()?;
        let degree = match take("discretization", "degree") {
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("cannot read degree '{v}'")))?,
            None => 2,
        };
        let dilation = match take("discretization", "dilation") {
            Some(v) => parse_fraction(&v)?,
            None => 2.6,
        };
        let perturbation = match take("discretization", "perturbation") {
            Some(v) => parse_fraction(&v)?,
            None => 0.0,
        };
        let seed = match take("discretization", "seed") {
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("cannot read seed '{v}'")))?,
            None => 0,
        };

        let laplacian = match take("assembly", "laplacian").as_deref() {
            None | Some("auto") => LaplacianChoice::Auto,
            Some("composite") => LaplacianChoice::Composite,
            Some("direct") => LaplacianChoice::Direct,
            Some(other) => {
                return Err(Error::Config(format!("unknown laplacian mode '{other}'")))
            }
        };
        let gradient = match take("assembly", "gradient").as_deref() {
            None | Some("staggered") => PressureGradientMode::Staggered,
            Some("direct") => PressureGradientMode::Direct,
            Some(other) => {
                return Err(Error::Config(format!("unknown gradient mode '{other}'")))
            }
        };
        let bc_weight = match take("assembly", "bc_weight") {
            Some(v) => parse_fraction(&v)?,
            None => 1.0,
        };
        let pressure_tie = match take("assembly", "pressure_tie") {
            Some(v) => parse_fraction(&v)?,
            None => 0.0,
        };

        let defaults = PicardOptions::default();
        let picard = PicardOptions {
            tol: match take("solver", "picard_tol") {
                Some(v) => parse_fraction(&v)?,
                None => defaults.tol,
            },
            max_iter: match take("solver", "picard_max_iter") {
                Some(v) => v
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("cannot read picard_max_iter '{v}'")))?,
                None => defaults.max_iter,
            },
            relaxation: match take("solver", "relaxation") {
                Some(v) => parse_fraction(&v)?,
                None => defaults.relaxation,
            },
        };

        let out_dir = PathBuf::from(take("output", "dir").unwrap_or_else(|| "out".into()));
        let centerline_samples = match take("output", "centerline_samples") {
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("cannot read centerline_samples '{v}'")))?,
            None => 129,
        };

        if let Some(((section, key), (_, lineno))) = map.into_iter().next() {
            return Err(Error::Config(format!(
                "line {lineno}: unknown key '{key}' in [{section}]"
            )));
        }

        let config = Self {
            kind,
            reynolds,
            ghia_reference,
            hs,
            degree,
            dilation,
            perturbation,
            seed,
            laplacian,
            gradient,
            bc_weight,
            pressure_tie,
            picard,
            out_dir,
            centerline_samples,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.hs.is_empty() {
            return Err(Error::Config("spacing list h is empty".into()));
        }
        if self.hs.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::Config("all spacings must be positive".into()));
        }
        for w in self.hs.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::Config(format!(
                    "spacing list must strictly descend, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if self.degree == 0 {
            return Err(Error::Config("degree must be at least 1".into()));
        }
        if !(self.dilation > 0.0) {
            return Err(Error::Config("dilation ratio must be positive".into()));
        }
        if !(0.0..0.45).contains(&self.perturbation) {
            return Err(Error::Config(
                "perturbation amplitude must lie in [0, 0.45)".into(),
            ));
        }
        if !(self.reynolds > 0.0) {
            return Err(Error::Config("reynolds must be positive".into()));
        }
        if !(self.bc_weight > 0.0) {
            return Err(Error::Config("bc_weight must be positive".into()));
        }
        if !(self.pressure_tie >= 0.0) {
            return Err(Error::Config("pressure_tie must be non-negative".into()));
        }
        if !(self.picard.tol > 0.0) {
            return Err(Error::Config("picard_tol must be positive".into()));
        }
        if self.picard.max_iter == 0 {
            return Err(Error::Config("picard_max_iter must be at least 1".into()));
        }
        if !(self.picard.relaxation > 0.0 && self.picard.relaxation <= 1.0) {
            return Err(Error::Config("relaxation must lie in (0, 1]".into()));
        }
        if self.centerline_samples < 2 {
            return Err(Error::Config(
                "centerline_samples must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// Canonical dump including resolved defaults; parses back to an
    /// equal config, and the run manifest embeds it verbatim.
    pub fn resolved_text(&self) -> String {
        let hs: Vec<String> = self.hs.iter().map(|h| format!("{h}")).collect();
        let ghia = match &self.ghia_reference {
            Some(p) => p.display().to_string(),
            None => "none".into(),
        };
        let laplacian = match self.laplacian {
            LaplacianChoice::Auto => "auto",
            LaplacianChoice::Composite => "composite",
            LaplacianChoice::Direct => "direct",
        };
        let gradient = match self.gradient {
            PressureGradientMode::Staggered => "staggered",
            PressureGradientMode::Direct => "direct",
        };
        format!(
            "[problem]\n\
             kind = {}\n\
             reynolds = {}\n\
             ghia_reference = {}\n\
             \n\
             [discretization]\n\
             h = {}\n\
             degree = {}\n\
             dilation = {}\n\
             perturbation = {}\n\
             seed = {}\n\
             \n\
             [assembly]\n\
             laplacian = {}\n\
             gradient = {}\n\
             bc_weight = {}\n\
             pressure_tie = {}\n\
             \n\
             [solver]\n\
             picard_tol = {}\n\
             picard_max_iter = {}\n\
             relaxation = {}\n\
             \n\
             [output]\n\
             dir = {}\n\
             centerline_samples = {}\n",
            self.kind.name(),
            self.reynolds,
            ghia,
            hs.join(", "),
            self.degree,
            self.dilation,
            self.perturbation,
            self.seed,
            laplacian,
            gradient,
            self.bc_weight,
            self.pressure_tie,
            self.picard.tol,
            self.picard.max_iter,
            self.picard.relaxation,
            self.out_dir.display(),
            self.centerline_samples,
        )
    }

    /// Discretization and solver knobs in study form.
    pub fn study_settings(&self) -> StudySettings {
        StudySettings {
            degree: self.degree,
            dilation_ratio: self.dilation,
            perturbation: (self.perturbation > 0.0).then_some((self.perturbation, self.seed)),
            laplacian: match self.laplacian {
                LaplacianChoice::Auto => None,
                LaplacianChoice::Composite => Some(LaplacianMode::Composite),
                LaplacianChoice::Direct => Some(LaplacianMode::Direct),
            },
            pressure_gradient: self.gradient,
            bc_row_weight: self.bc_weight,
            pressure_tie: self.pressure_tie,
            picard: self.picard.clone(),
        }
    }

    /// The manufactured truth this run verifies against, when it has
    /// one.
    pub fn problem(&self) -> Option<ManufacturedProblem> {
        match self.kind {
            ProblemKind::StokesManufactured | ProblemKind::Converge => {
                Some(manufactured::trig_periodic())
            }
            ProblemKind::StokesPolynomial => Some(manufactured::polynomial_square()),
            ProblemKind::Kovasznay => Some(manufactured::kovasznay(self.reynolds)),
            ProblemKind::Cavity | ProblemKind::InfsupStudy => None,
        }
    }
}
