use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Experiment, Generator, Restriction};
use super::report::{num, Reports};
use super::CliError;
use crate::error::Error;
use crate::identities::{cuntz_projection_check, cuntz_relations_check, widom_check, IdentityReport};
use crate::matgen::{
    cuntz_difference, exf340_tuples, interlace_chain, sequences, InterlaceChain, MatrixSequence,
};
use crate::seqlab::{
    alpha_parity_check, classify_compact, classify_fractal_normal, classify_fredholm,
    classify_point, classify_stability, dichotomy_scan, extract_fractal_subsequence,
    normal_spectra, profile, stabilize, stabilizing_perturbation, Classification, Verdict,
};
use crate::spectra::{max_abs, singular_values, sym_eigenvalues, SingularProfile, SpectrumSet};
use crate::symbols::FourierSymbol;
use crate::Complex64;

/// Largest deviation tolerated between synthesized and prescribed spectra.
const INTERLACE_TOLERANCE: f64 = 1e-8;

/// Reports of one run plus every declared expectation that was not met.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub reports: Reports,
    pub mismatches: Vec<String>,
}

impl RunOutput {
    fn expect(&mut self, cfg: &ExperimentConfig, key: &str, actual: &str) {
        if let Some(want) = cfg.expect.get(key) {
            if want != actual {
                self.mismatches
                    .push(format!("expect.{key}: expected {want}, found {actual}"));
            }
        }
    }

    fn require(&mut self, ok: bool, message: impl Into<String>) {
        if !ok {
            self.mismatches.push(message.into());
        }
    }
}

fn chain_of(g: &Generator) -> Option<InterlaceChain> {
    match *g {
        Generator::Exf340 { levels } => Some(exf340_tuples(levels)),
        Generator::RandomInterlace { levels, bound, seed } => Some(InterlaceChain::random(
            levels,
            bound,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )),
        _ => None,
    }
}

pub fn build(g: &Generator) -> Result<MatrixSequence, CliError> {
    if let Some(chain) = chain_of(g) {
        return Ok(interlace_chain(&chain)?);
    }
    Ok(match g {
        Generator::Toeplitz(a) => sequences::toeplitz(a.clone()),
        Generator::ToeplitzCompact {
            symbol,
            compact,
            reflected,
        } => sequences::toeplitz_plus_compact(symbol.clone(), compact.clone(), reflected.clone()),
        Generator::Hankel(a) => sequences::hankel(a.clone()),
        Generator::FiniteRank(k) => sequences::finite_rank(k.clone()),
        Generator::DiagonalCompact(v) => sequences::diagonal_compact(v.clone()),
        Generator::Identity => sequences::identity(),
        Generator::Zero => sequences::zero(),
        Generator::BlockFlip => sequences::block_flip(),
        Generator::Arveson => sequences::arveson(),
        Generator::AlternatingDiagonal => sequences::alternating_diagonal(),
        Generator::GeometricDiagonal => sequences::geometric_diagonal(),
        Generator::CuntzDifference(big_n) => sequences::cuntz_difference(*big_n),
        Generator::AlternatingWeight(k) => sequences::alternating_weight(k.clone()),
        Generator::Exf340 { .. } | Generator::RandomInterlace { .. } => unreachable!(),
    })
}

fn sequence(cfg: &ExperimentConfig) -> Result<MatrixSequence, CliError> {
    let g = cfg.generator.as_ref().ok_or_else(|| CliError::Config {
        key: "generator".into(),
        message: format!("required by experiment {}", cfg.experiment),
    })?;
    build(g)
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let mut out = RunOutput::default();
    record_config(cfg, &mut out.reports);
    match cfg.experiment {
        Experiment::Analyze => analyze(cfg, &sequence(cfg)?, &mut out)?,
        Experiment::Restrict => restrict(cfg, &mut out)?,
        Experiment::Stabilize => stabilize_run(cfg, &mut out)?,
        Experiment::Interlace => interlace(cfg, &mut out)?,
        Experiment::Cuntz => cuntz(cfg, &mut out)?,
        Experiment::Widom => widom(cfg, &mut out)?,
        Experiment::Arveson => arveson(cfg, &mut out)?,
        Experiment::EssentialScan => essential_scan(cfg, &mut out)?,
        Experiment::AlphaParity => alpha_parity(cfg, &mut out)?,
    }
    Ok(out)
}

fn record_config(cfg: &ExperimentConfig, r: &mut Reports) {
    let th = &cfg.thresholds;
    r.verdict("config", "experiment", cfg.experiment.name());
    r.verdict("config", "n_min", cfg.horizon.n_min.to_string());
    r.verdict("config", "n_max", cfg.horizon.n_max.to_string());
    r.verdict("config", "step", cfg.horizon.step.to_string());
    for (k, v) in [
        ("tau_zero", th.tau_zero),
        ("tau_gap", th.tau_gap),
        ("tau_stab", th.tau_stab),
        ("tau_compact", th.tau_compact),
        ("tail", th.tail),
        ("decay_slope", th.decay_slope),
        ("epsilon", cfg.epsilon),
        ("tolerance", cfg.tolerance),
    ] {
        r.verdict("config", k, num(v));
    }
    r.verdict("config", "probe_depth", th.probe_depth.to_string());
    r.verdict("config", "growth_min", th.growth_min.to_string());
}

fn plot_profile(cfg: &ExperimentConfig, p: &SingularProfile, r: &mut Reports) {
    if !cfg.plot {
        return;
    }
    for k in 1..=cfg.thresholds.probe_depth {
        let small: Vec<(f64, f64)> = p
            .rows
            .iter()
            .filter_map(|row| row.sigma(k).map(|s| (row.n as f64, s)))
            .collect();
        r.plot(format!("sigma_{k}"), small);
        let large = p.rows.iter().map(|row| (row.n as f64, row.big_sigma(k))).collect();
        r.plot(format!("big_sigma_{k}"), large);
    }
}

fn detect(cfg: &ExperimentConfig, p: &SingularProfile) -> Vec<Verdict> {
    let th = &cfg.thresholds;
    vec![
        classify_stability(p, th.tau_stab, th),
        classify_fredholm(p, th.tau_zero, th.tau_gap, th),
        classify_compact(p, th.tau_compact, th.probe_depth, th),
    ]
}

fn report_verdicts(cfg: &ExperimentConfig, verdicts: &[Verdict], out: &mut RunOutput) {
    for v in verdicts {
        out.reports.add_verdict(v);
        out.expect(cfg, v.detector, &v.classification.to_string());
    }
}

/// Fractality verdict, recorded as skipped when a sampled matrix is not normal.
fn fractal(cfg: &ExperimentConfig, spectra: Result<Vec<SpectrumSet>, Error>, out: &mut RunOutput) -> Result<(), CliError> {
    match spectra {
        Ok(s) => {
            let v = classify_fractal_normal(&s, cfg.epsilon, &cfg.thresholds)?;
            report_verdicts(cfg, &[v], out);
        }
        Err(Error::NotNormal { n, residual }) => {
            out.reports.verdict("fractal", "classification", "Skipped");
            out.reports.verdict("fractal", "not_normal.n", n.to_string());
            out.reports.verdict("fractal", "not_normal.residual", num(residual));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn analyze(cfg: &ExperimentConfig, seq: &MatrixSequence, out: &mut RunOutput) -> Result<(), CliError> {
    let p = profile(seq, &cfg.horizon, &cfg.thresholds)?;
    out.reports.add_profile(&p);
    plot_profile(cfg, &p, &mut out.reports);
    report_verdicts(cfg, &detect(cfg, &p), out);
    fractal(cfg, normal_spectra(seq, &cfg.horizon, &cfg.thresholds), out)
}

fn restrict(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let seq = sequence(cfg)?;
    let r = cfg.restrict.expect("validated by the config parser");
    if r != Restriction::Auto {
        let label = format!("{}|restricted", seq.label());
        return analyze(cfg, &seq.restrict(label, move |j| r.map(j)), out);
    }
    let th = &cfg.thresholds;
    let full = profile(&seq, &cfg.horizon, th)?;
    let eta = extract_fractal_subsequence(&full, th.probe_depth, cfg.tolerance, th)?;
    let joined: Vec<String> = eta.iter().map(|n| n.to_string()).collect();
    out.reports.verdict("extract", "indices", joined.join(" "));
    out.reports.verdict("extract", "count", eta.len().to_string());
    let p = full.restrict(|n| eta.contains(&n));
    out.reports.add_profile(&p);
    plot_profile(cfg, &p, &mut out.reports);
    report_verdicts(cfg, &detect(cfg, &p), out);
    let spectra = normal_spectra(&seq, &cfg.horizon, th)
        .map(|s| s.into_iter().filter(|s| eta.contains(&s.n)).collect());
    fractal(cfg, spectra, out)
}

fn stabilize_run(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let seq = sequence(cfg)?;
    let th = &cfg.thresholds;
    let alpha = match cfg.alpha {
        Some(a) => a,
        None => {
            let p = profile(&seq, &cfg.horizon, th)?;
            match classify_fredholm(&p, th.tau_zero, th.tau_gap, th).classification {
                Classification::Fredholm { alpha } => alpha,
                other => {
                    return Err(CliError::Config {
                        key: "alpha".into(),
                        message: format!("not given and the sequence classifies as {other}"),
                    })
                }
            }
        }
    };
    let ranks = cfg
        .horizon
        .indices()
        .par_iter()
        .map(|&n| {
            let a = seq.generate(n)?;
            let k = stabilizing_perturbation(&a, alpha)?;
            let scale = max_abs(&a).max(1.0);
            let rank = singular_values(&k)?
                .iter()
                .filter(|&&s| s > th.tau_zero * scale)
                .count();
            Ok((n, rank))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let max_rank = ranks.iter().map(|r| r.1).max().unwrap_or(0);
    out.reports.verdict("stabilize", "alpha", alpha.to_string());
    out.reports.verdict("stabilize", "max_rank", max_rank.to_string());
    out.require(max_rank <= alpha, format!("perturbation rank {max_rank} exceeds alpha = {alpha}"));

    let stabilized = stabilize(&seq, alpha);
    let p = profile(&stabilized, &cfg.horizon, th)?;
    out.reports.add_profile(&p);
    plot_profile(cfg, &p, &mut out.reports);
    let v = classify_stability(&p, th.tau_stab, th);
    report_verdicts(cfg, &[v], out);
    Ok(())
}

fn interlace(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let g = cfg.generator.as_ref().expect("interlace has a default generator");
    let chain = chain_of(g).ok_or_else(|| CliError::Config {
        key: "generator".into(),
        message: "interlace needs exf340 or random-interlace".into(),
    })?;
    let seq = interlace_chain(&chain)?;
    let sizes: Vec<usize> = cfg.horizon.indices().into_iter().filter(|&n| n <= chain.len()).collect();
    if sizes.is_empty() {
        return Err(CliError::Config {
            key: "levels".into(),
            message: format!("the chain has {} levels, below n_min", chain.len()),
        });
    }
    let rows = sizes
        .par_iter()
        .map(|&n| {
            let a = seq.generate(n)?;
            let eig = sym_eigenvalues(&a)?;
            let target = chain.level(n).expect("n is within the chain");
            let spectrum = eig
                .iter()
                .zip(target)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            let nesting = if n > 1 {
                let prev = seq.generate(n - 1)?;
                let lead = a.submatrix(0, 0, n - 1, n - 1).to_owned();
                max_abs(&(&lead - &prev))
            } else {
                0.0
            };
            Ok((n, spectrum, nesting))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    for (name, pick, bound) in [
        ("interlace-spectrum", 1usize, INTERLACE_TOLERANCE),
        ("interlace-nesting", 2, 0.0),
    ] {
        let picked: Vec<(usize, f64)> = rows
            .iter()
            .map(|r| (r.0, if pick == 1 { r.1 } else { r.2 }))
            .collect();
        let rep = IdentityReport::new(name, picked, bound);
        out.require(rep.pass, format!("{name}: residual {:e}", rep.max_residual));
        out.reports.add_identity(&rep);
    }
    for &n in &sizes {
        let mut distinct: Vec<f64> = chain.level(n).unwrap().to_vec();
        distinct.dedup_by(|a, b| (*a - *b).abs() <= INTERLACE_TOLERANCE);
        let shown: Vec<String> = distinct.iter().map(|x| num(*x)).collect();
        out.reports.verdict("interlace", &format!("spectrum.{n}"), shown.join(" "));
    }
    Ok(())
}

fn cuntz(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let big_n = cfg.cuntz_n;
    let sizes = cfg.horizon.indices();
    let rel = cuntz_relations_check(big_n, &sizes)?;
    out.require(rel.pass, format!("{}: residual {:e}", rel.name, rel.max_residual));
    out.reports.add_identity(&rel);
    for word in &cfg.words {
        let reports = sizes
            .par_iter()
            .map(|&n| cuntz_projection_check(big_n, word, n))
            .collect::<Result<Vec<_>, Error>>()?;
        for r in &reports {
            out.require(r.pass, format!("{} at n = {}: residual {:e}", r.name, r.rows[0].0, r.max_residual));
            out.reports.add_identity(r);
        }
        let boundary: Vec<String> = reports
            .iter()
            .flat_map(|r| r.boundary.iter().map(|n| n.to_string()))
            .collect();
        if !boundary.is_empty() {
            out.reports.verdict(&reports[0].name, "boundary", boundary.join(" "));
        }
    }
    let nonzero: Vec<String> = sizes
        .iter()
        .filter(|&&n| max_abs(&cuntz_difference(big_n, n)) > 0.0)
        .map(|n| n.to_string())
        .collect();
    out.reports.verdict("cuntz-difference", "nonzero_at", nonzero.join(" "));
    Ok(())
}

fn random_symbol(rng: &mut ChaCha8Rng, degree: usize) -> FourierSymbol {
    let d = degree as i64;
    FourierSymbol::new((-d..=d).map(|k| {
        (
            k,
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        )
    }))
}

fn widom(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for pair in 0..cfg.count {
        let a = random_symbol(&mut rng, cfg.degree);
        let b = random_symbol(&mut rng, cfg.degree);
        let name = format!("widom[{pair}]");
        let rows = cfg
            .horizon
            .indices()
            .par_iter()
            .map(|&n| widom_check(&a, &b, n))
            .collect::<Result<Vec<_>, Error>>()?;
        for mut r in rows {
            r.name = name.clone();
            out.require(r.pass, format!("{name} at n = {}: residual {:e}", r.rows[0].0, r.max_residual));
            out.reports.add_identity(&r);
        }
        out.reports.verdict(&name, "a", a.to_string());
        out.reports.verdict(&name, "b", b.to_string());
    }
    Ok(())
}

fn arveson(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let seq = sequence(cfg)?;
    let lambda = cfg.lambdas[0];
    let p = classify_point(&seq, lambda, &cfg.epsilons, &cfg.horizon, &cfg.thresholds)?;
    out.reports.add_point(&p);
    let counts: Vec<usize> = p.counts[0].counts.iter().map(|c| c.1).collect();
    let nondecreasing = counts.windows(2).all(|w| w[1] >= w[0]);
    let (first, last) = (counts[0], counts[counts.len() - 1]);
    out.reports.verdict("arveson", "class", p.class.to_string());
    out.reports.verdict("arveson", "nondecreasing", nondecreasing.to_string());
    out.reports.verdict("arveson", "first_count", first.to_string());
    out.reports.verdict("arveson", "last_count", last.to_string());
    out.expect(cfg, "point", &p.class.to_string());
    if cfg.plot {
        let data = p.counts[0].counts.iter().map(|&(n, c)| (n as f64, c as f64)).collect();
        out.reports.plot("count", data);
    }
    Ok(())
}

fn essential_scan(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let seq = sequence(cfg)?;
    let r = dichotomy_scan(&seq, &cfg.lambdas, &cfg.epsilons, &cfg.horizon, &cfg.thresholds)?;
    for (i, p) in r.points.iter().enumerate() {
        out.reports.add_point(p);
        out.reports.verdict("points", &num(p.lambda), p.class.to_string());
        if let Some((a, b)) = p.split {
            out.reports.verdict("points", &format!("{}.split", num(p.lambda)), format!("{a}/{b}"));
        }
        if cfg.plot {
            for (j, s) in p.counts.iter().enumerate() {
                let data = s.counts.iter().map(|&(n, c)| (n as f64, c as f64)).collect();
                out.reports.plot(format!("count_{i}_{j}"), data);
            }
        }
    }
    let holds = if r.holds() { "holds" } else { "fails" };
    out.reports.verdict("dichotomy", "violations", r.violations().len().to_string());
    out.reports.verdict("dichotomy", "classification", holds);
    out.expect(cfg, "dichotomy", holds);
    if let Some(p) = r.points.first() {
        out.expect(cfg, "point", &p.class.to_string());
    }
    Ok(())
}

fn alpha_parity(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let k = match &cfg.generator {
        Some(Generator::AlternatingWeight(k)) => k.clone(),
        _ => {
            return Err(CliError::Config {
                key: "generator".into(),
                message: "alpha-parity needs the alternating-weight generator".into(),
            })
        }
    };
    let r = alpha_parity_check(&k, &cfg.horizon, &cfg.thresholds)?;
    for &(n, c) in &r.rows {
        out.reports.verdict("alpha-parity", &format!("vanishing.{n}"), c.to_string());
    }
    let show = |x: Option<usize>| x.map_or_else(|| "none".to_string(), |c| c.to_string());
    out.reports.verdict("alpha-parity", "odd", show(r.odd));
    out.reports.verdict("alpha-parity", "even", show(r.even));
    out.expect(cfg, "odd", &show(r.odd));
    out.expect(cfg, "even", &show(r.even));
    Ok(())
}
