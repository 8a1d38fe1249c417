//! Flat `key = value` experiment configuration.
//!
//! One experiment per file. Blank lines and `#` comments are ignored, keys
//! may appear once, and unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::matgen::RankOne;
use crate::seqlab::{Horizon, Thresholds};
use crate::symbols::FourierSymbol;

use super::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Analyze,
    Interlace,
    Cuntz,
    Widom,
    Arveson,
    EssentialScan,
    Restrict,
    Stabilize,
    AlphaParity,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Analyze => "analyze",
            Experiment::Interlace => "interlace",
            Experiment::Cuntz => "cuntz",
            Experiment::Widom => "widom",
            Experiment::Arveson => "arveson",
            Experiment::EssentialScan => "essential-scan",
            Experiment::Restrict => "restrict",
            Experiment::Stabilize => "stabilize",
            Experiment::AlphaParity => "alpha-parity",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "analyze" => Experiment::Analyze,
            "interlace" => Experiment::Interlace,
            "cuntz" => Experiment::Cuntz,
            "widom" => Experiment::Widom,
            "arveson" => Experiment::Arveson,
            "essential-scan" => Experiment::EssentialScan,
            "restrict" => Experiment::Restrict,
            "stabilize" => Experiment::Stabilize,
            "alpha-parity" => Experiment::AlphaParity,
            other => return Err(format!("unknown experiment `{other}`")),
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which matrix sequence to build.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Toeplitz(FourierSymbol),
    ToeplitzCompact {
        symbol: FourierSymbol,
        compact: Vec<RankOne>,
        reflected: Vec<RankOne>,
    },
    Hankel(FourierSymbol),
    FiniteRank(Vec<RankOne>),
    DiagonalCompact(Vec<f64>),
    Identity,
    Zero,
    BlockFlip,
    Arveson,
    AlternatingDiagonal,
    GeometricDiagonal,
    CuntzDifference(usize),
    AlternatingWeight(Vec<RankOne>),
    Exf340 { levels: usize },
    RandomInterlace { levels: usize, bound: f64, seed: u64 },
}

/// Index map `j ↦ η(j)` for the restrict experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Restriction {
    Even,
    Odd,
    /// `η(j) = modulus·j + residue`.
    Residue { modulus: usize, residue: usize },
    /// `η(j) = base^j`.
    Power { base: usize },
    /// Subsequence chosen by the fractal extractor.
    Auto,
}

impl Restriction {
    pub fn map(self, j: usize) -> usize {
        match self {
            Restriction::Even => 2 * j,
            Restriction::Odd => 2 * j - 1,
            Restriction::Residue { modulus, residue } => modulus * j + residue,
            Restriction::Power { base } => base.pow(j as u32),
            Restriction::Auto => j,
        }
    }
}

impl FromStr for Restriction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| p.parse::<usize>().map_err(|e| format!("`{p}`: {e}"));
        match parts.as_slice() {
            ["even"] => Ok(Restriction::Even),
            ["odd"] => Ok(Restriction::Odd),
            ["auto"] => Ok(Restriction::Auto),
            ["mod", m, r] => {
                let (modulus, residue) = (num(m)?, num(r)?);
                if modulus == 0 {
                    return Err("modulus must be positive".into());
                }
                Ok(Restriction::Residue { modulus, residue })
            }
            ["power", b] => {
                let base = num(b)?;
                if base < 2 {
                    return Err("power base must be at least 2".into());
                }
                Ok(Restriction::Power { base })
            }
            _ => Err(format!(
                "expected even, odd, auto, mod:M:R or power:B, found `{s}`"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub generator: Option<Generator>,
    pub horizon: Horizon,
    pub thresholds: Thresholds,
    /// Hausdorff tolerance of the fractality detector and half-width of the
    /// counting window for the Arveson experiment.
    pub epsilon: f64,
    pub epsilons: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub restrict: Option<Restriction>,
    pub tolerance: f64,
    pub alpha: Option<usize>,
    pub cuntz_n: usize,
    pub words: Vec<Vec<usize>>,
    pub compact: Vec<RankOne>,
    pub seed: u64,
    pub degree: usize,
    pub count: usize,
    pub plot: bool,
    pub out: Option<PathBuf>,
    /// Declared outcomes, keyed by the part after `expect.`.
    pub expect: BTreeMap<String, String>,
}

const KEYS: &[&str] = &[
    "experiment",
    "generator",
    "symbol",
    "compact",
    "compact_reflected",
    "values",
    "cuntz_n",
    "levels",
    "bound",
    "n_min",
    "n_max",
    "step",
    "tau_zero",
    "tau_gap",
    "tau_stab",
    "tau_compact",
    "tail",
    "probe_depth",
    "decay_slope",
    "growth_min",
    "max_dim",
    "epsilon",
    "epsilons",
    "lambdas",
    "lambda_min",
    "lambda_max",
    "lambda_step",
    "restrict",
    "tolerance",
    "alpha",
    "word",
    "max_word_len",
    "seed",
    "degree",
    "count",
    "plot",
    "out",
];

const EXPECT_KEYS: &[&str] = &[
    "stability",
    "fredholm",
    "compact",
    "fractal",
    "point",
    "dichotomy",
    "odd",
    "even",
];

fn bad(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Raw key-value pairs with lookup helpers that name the key on failure.
struct Raw {
    map: BTreeMap<String, String>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad(
                    &format!("line {}", lineno + 1),
                    format!("expected `key = value`, found `{line}`"),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            let known = KEYS.contains(&key)
                || key
                    .strip_prefix("expect.")
                    .is_some_and(|k| EXPECT_KEYS.contains(&k));
            if !known {
                return Err(bad(key, "unknown key"));
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(bad(key, "duplicate key"));
            }
        }
        Ok(Self { map })
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.str(key)
            .map(|v| v.parse::<T>().map_err(|e| bad(key, format!("`{v}`: {e}"))))
            .transpose()
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| bad(key, "missing required key"))
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.or(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(bad(key, format!("must be positive, found {v}")))
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.str(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|e| bad(key, format!("`{s}`: {e}"))))
                    .collect()
            })
            .transpose()
    }
}

/// Parses `(a, b, c), (a, b, c), …`.
pub fn parse_triples(text: &str) -> Result<Vec<(f64, f64, f64)>, String> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| format!("expected `(` at `{rest}`"))?;
        let close = body.find(')').ok_or("missing `)`")?;
        let fields: Vec<&str> = body[..close].split(',').map(str::trim).collect();
        let [a, b, c] = fields.as_slice() else {
            return Err(format!("expected three fields in `({})`", &body[..close]));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
        out.push((num(a)?, num(b)?, num(c)?));
        rest = body[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err("trailing comma".into());
            }
        } else if !rest.is_empty() {
            return Err(format!("expected `,` at `{rest}`"));
        }
    }
    Ok(out)
}

/// `(k, re, im)` triples as a symbol; `k` must be an integer.
pub fn parse_symbol(text: &str) -> Result<FourierSymbol, String> {
    let triples = parse_triples(text)?
        .into_iter()
        .map(|(k, re, im)| Ok((integer(k)?, re, im)))
        .collect::<Result<Vec<_>, String>>()?;
    Ok(FourierSymbol::from_triples(&triples))
}

/// `(i, j, s)` triples as the rank-one terms `s·e_i e_j*`.
pub fn parse_compact(text: &str) -> Result<Vec<RankOne>, String> {
    parse_triples(text)?
        .into_iter()
        .map(|(i, j, s)| {
            let (i, j) = (integer(i)?, integer(j)?);
            if i < 0 || j < 0 {
                return Err(format!("negative index in ({i}, {j}, {s})"));
            }
            Ok(RankOne::unit(i as usize, j as usize, s))
        })
        .collect()
}

fn integer(x: f64) -> Result<i64, String> {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        Ok(x as i64)
    } else {
        Err(format!("`{x}` is not an integer"))
    }
}

fn symbol(raw: &Raw) -> Result<FourierSymbol, CliError> {
    let text = raw.str("symbol").ok_or_else(|| bad("symbol", "missing required key"))?;
    parse_symbol(text).map_err(|m| bad("symbol", m))
}

fn compact(raw: &Raw, key: &str) -> Result<Vec<RankOne>, CliError> {
    raw.str(key)
        .map(|t| parse_compact(t).map_err(|m| bad(key, m)))
        .transpose()
        .map(Option::unwrap_or_default)
}

fn generator(raw: &Raw, experiment: Experiment, n_max: usize) -> Result<Option<Generator>, CliError> {
    let default = match experiment {
        Experiment::Interlace => Some("exf340"),
        Experiment::Arveson => Some("arveson"),
        Experiment::AlphaParity => Some("alternating-weight"),
        _ => None,
    };
    let Some(name) = raw.str("generator").or(default) else {
        return match experiment {
            Experiment::Cuntz | Experiment::Widom => Ok(None),
            _ => Err(bad("generator", "missing required key")),
        };
    };
    let g = match name {
        "toeplitz" => Generator::Toeplitz(symbol(raw)?),
        "toeplitz-compact" => Generator::ToeplitzCompact {
            symbol: symbol(raw)?,
            compact: compact(raw, "compact")?,
            reflected: compact(raw, "compact_reflected")?,
        },
        "hankel" => Generator::Hankel(symbol(raw)?),
        "finite-rank" => Generator::FiniteRank(compact(raw, "compact")?),
        "diagonal-compact" => Generator::DiagonalCompact(raw.list("values")?.unwrap_or_default()),
        "identity" => Generator::Identity,
        "zero" => Generator::Zero,
        "block-flip" => Generator::BlockFlip,
        "arveson" => Generator::Arveson,
        "alternating-diagonal" => Generator::AlternatingDiagonal,
        "geometric-diagonal" => Generator::GeometricDiagonal,
        "cuntz-difference" => Generator::CuntzDifference(cuntz_n(raw)?),
        "alternating-weight" => Generator::AlternatingWeight(compact(raw, "compact")?),
        "exf340" => Generator::Exf340 {
            levels: raw.or("levels", n_max)?,
        },
        "random-interlace" => Generator::RandomInterlace {
            levels: raw.or("levels", n_max)?,
            bound: raw.positive("bound", 10.0)?,
            seed: raw.or("seed", 0)?,
        },
        other => return Err(bad("generator", format!("unknown generator `{other}`"))),
    };
    Ok(Some(g))
}

fn cuntz_n(raw: &Raw) -> Result<usize, CliError> {
    let n = raw.or("cuntz_n", 2usize)?;
    if n < 2 {
        return Err(bad("cuntz_n", format!("must be at least 2, found {n}")));
    }
    Ok(n)
}

fn words(raw: &Raw, big_n: usize) -> Result<Vec<Vec<usize>>, CliError> {
    if let Some(word) = raw.list::<usize>("word")? {
        if word.is_empty() || word.iter().any(|&i| i >= big_n) {
            return Err(bad("word", format!("letters must lie in [0, {big_n}) and be nonempty")));
        }
        return Ok(vec![word]);
    }
    let max_len: usize = raw.or("max_word_len", 3)?;
    if max_len == 0 {
        return Err(bad("max_word_len", "must be positive"));
    }
    let mut all = Vec::new();
    for k in 1..=max_len {
        for code in 0..big_n.pow(k as u32) {
            all.push((0..k).map(|p| code / big_n.pow(p as u32) % big_n).collect());
        }
    }
    Ok(all)
}

fn lambdas(raw: &Raw) -> Result<Vec<f64>, CliError> {
    if let Some(l) = raw.list("lambdas")? {
        return Ok(l);
    }
    let (Some(lo), Some(hi)) = (raw.get::<f64>("lambda_min")?, raw.get::<f64>("lambda_max")?) else {
        return Ok(vec![0.0]);
    };
    let step = raw.positive("lambda_step", 0.1)?;
    if hi < lo {
        return Err(bad("lambda_max", "must not be below lambda_min"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| lo + i as f64 * step).collect())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw = Raw::parse(text)?;
        let experiment: Experiment = raw.required("experiment")?;

        let n_min = raw.or("n_min", 1usize)?;
        let n_max = raw.required("n_max")?;
        let step = raw.or("step", 1usize)?;
        let horizon = Horizon::new(n_min, n_max, step).map_err(|e| bad("n_max", e.to_string()))?;

        let d = Thresholds::default();
        let thresholds = Thresholds {
            tau_zero: raw.positive("tau_zero", d.tau_zero)?,
            tau_gap: raw.positive("tau_gap", d.tau_gap)?,
            tau_stab: raw.positive("tau_stab", d.tau_stab)?,
            tau_compact: raw.positive("tau_compact", d.tau_compact)?,
            tail: raw.positive("tail", d.tail)?,
            probe_depth: raw.or("probe_depth", d.probe_depth)?,
            decay_slope: raw.or("decay_slope", d.decay_slope)?,
            growth_min: raw.or("growth_min", d.growth_min)?,
            max_dim: raw.or("max_dim", d.max_dim)?,
        };
        if thresholds.tail > 1.0 {
            return Err(bad("tail", "must not exceed 1"));
        }
        if thresholds.probe_depth == 0 {
            return Err(bad("probe_depth", "must be positive"));
        }

        let default_eps = if experiment == Experiment::Arveson { 1e-8 } else { 0.05 };
        let epsilon = raw.positive("epsilon", default_eps)?;
        let epsilons = raw.list::<f64>("epsilons")?.unwrap_or_else(|| vec![epsilon]);
        if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(bad("epsilons", "must be a nonempty list of positive numbers"));
        }

        let big_n = cuntz_n(&raw)?;
        let restrict = raw.get::<Restriction>("restrict")?;
        if experiment == Experiment::Restrict && restrict.is_none() {
            return Err(bad("restrict", "missing required key"));
        }

        let expect = raw
            .map
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("expect.").map(|k| (k.to_string(), v.clone())))
            .collect();

        Ok(Self {
            experiment,
            generator: generator(&raw, experiment, n_max)?,
            horizon,
            thresholds,
            epsilon,
            epsilons,
            lambdas: lambdas(&raw)?,
            restrict,
            tolerance: raw.positive("tolerance", 1e-6)?,
            alpha: raw.get("alpha")?,
            cuntz_n: big_n,
            words: words(&raw, big_n)?,
            compact: compact(&raw, "compact")?,
            seed: raw.or("seed", 0)?,
            degree: raw.or("degree", 8)?,
            count: raw.or("count", 1)?,
            plot: raw.or("plot", false)?,
            out: raw.get::<String>("out")?.map(PathBuf::from),
            expect,
        })
    }

    /// Lowers `n_max` to `cap`.
    pub fn cap_horizon(&mut self, cap: usize) -> Result<(), CliError> {
        if cap < self.horizon.n_min {
            return Err(bad(
                "--max-n",
                format!("cap {cap} is below n_min = {}", self.horizon.n_min),
            ));
        }
        self.horizon.n_max = self.horizon.n_max.min(cap);
        if let Some(Generator::Exf340 { levels } | Generator::RandomInterlace { levels, .. }) = &mut self.generator {
            *levels = (*levels).min(cap);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let cfg = ExperimentConfig::parse(
            "# stability of 2 + t\n\
             experiment = analyze\n\
             generator = toeplitz\n\
             symbol = (0, 2, 0), (1, 1, 0)\n\
             n_min = 32\n\
             n_max = 1024   # inclusive\n\
             step = 32\n\
             tau_zero = 1e-7\n\
             expect.stability = Stable\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, Experiment::Analyze);
        assert_eq!(
            cfg.generator,
            Some(Generator::Toeplitz(FourierSymbol::real([(0, 2.0), (1, 1.0)])))
        );
        assert_eq!(cfg.horizon, Horizon::new(32, 1024, 32).unwrap());
        assert_eq!(cfg.thresholds.tau_zero, 1e-7);
        assert_eq!(cfg.thresholds.tau_gap, 1e-3);
        assert_eq!(cfg.expect["stability"], "Stable");
    }

    fn key_of(text: &str) -> String {
        match ExperimentConfig::parse(text).unwrap_err() {
            CliError::Config { key, .. } => key,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert_eq!(key_of("experiment = analyze\nn_max = 4\nfoo = 1"), "foo");
        assert_eq!(key_of("experiment = analyze\nn_max = 4\nn_max = 5"), "n_max");
        assert_eq!(key_of("experiment = sing\nn_max = 4"), "experiment");
        assert_eq!(key_of("experiment = analyze\ngenerator = zero"), "n_max");
        assert_eq!(key_of("experiment = analyze\nn_max = 4"), "generator");
        assert_eq!(
            key_of("experiment = analyze\nn_max = 4\ngenerator = toeplitz"),
            "symbol"
        );
        assert_eq!(
            key_of("experiment = analyze\nn_max = 4\ngenerator = zero\ntau_gap = -1"),
            "tau_gap"
        );
        assert_eq!(
            key_of("experiment = analyze\nn_max = 4\nn_min = 5\ngenerator = zero"),
            "n_max"
        );
        assert_eq!(
            key_of("experiment = restrict\nn_max = 4\ngenerator = zero"),
            "restrict"
        );
        assert_eq!(key_of("experiment = cuntz\nn_max = 4\nword = 0, 2"), "word");
        assert_eq!(key_of("experiment = widom\nn_max = 4\nexpect.mood = happy"), "expect.mood");
        assert_eq!(key_of("experiment = widom\nn_max 4"), "line 2");
    }

    #[test]
    fn triple_literals() {
        assert_eq!(
            parse_triples("(1, 2.5, -3), (-2,0,1e-3)").unwrap(),
            vec![(1.0, 2.5, -3.0), (-2.0, 0.0, 1e-3)]
        );
        assert_eq!(parse_triples("").unwrap(), vec![]);
        assert!(parse_triples("(1, 2)").is_err());
        assert!(parse_triples("(1, 2, 3),").is_err());
        assert!(parse_triples("(1, 2, 3) (4, 5, 6)").is_err());
        assert!(parse_symbol("(0.5, 1, 0)").is_err());
        assert_eq!(parse_compact("(0, 0, -1)").unwrap(), vec![RankOne::unit(0, 0, -1.0)]);
        assert!(parse_compact("(-1, 0, 1)").is_err());
    }

    #[test]
    fn symbol_round_trips_through_display() {
        let a = FourierSymbol::from_triples(&[(-3, 0.25, -1.5), (0, 2.0, 0.0), (4, 0.0, 1e-7)]);
        assert_eq!(parse_symbol(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn restriction_literals() {
        assert_eq!("even".parse(), Ok(Restriction::Even));
        assert_eq!("mod:3:1".parse(), Ok(Restriction::Residue { modulus: 3, residue: 1 }));
        assert_eq!("power:2".parse(), Ok(Restriction::Power { base: 2 }));
        assert!("power:1".parse::<Restriction>().is_err());
        assert!("mod:0:1".parse::<Restriction>().is_err());
        assert_eq!(Restriction::Power { base: 3 }.map(4), 81);
        assert_eq!(Restriction::Odd.map(1), 1);
    }

    #[test]
    fn lambda_grid_and_words() {
        let cfg = ExperimentConfig::parse(
            "experiment = essential-scan\ngenerator = zero\nn_max = 10\n\
             lambda_min = -3\nlambda_max = 3\nlambda_step = 0.15",
        )
        .unwrap();
        assert_eq!(cfg.lambdas.len(), 41);
        assert!((cfg.lambdas[40] - 3.0).abs() < 1e-12);

        let cfg = ExperimentConfig::parse("experiment = cuntz\nn_max = 10\ncuntz_n = 3").unwrap();
        assert_eq!(cfg.words.len(), 3 + 9 + 27);
        assert_eq!(cfg.generator, None);
    }

    #[test]
    fn cap_lowers_horizon() {
        let mut cfg = ExperimentConfig::parse("experiment = interlace\nn_min = 4\nn_max = 40").unwrap();
        cfg.cap_horizon(20).unwrap();
        assert_eq!(cfg.horizon.n_max, 20);
        assert_eq!(cfg.generator, Some(Generator::Exf340 { levels: 20 }));
        assert!(cfg.cap_horizon(3).is_err());
    }
}
