use std::path::Path;

use cwlimits::exactdist::{
    compare_dist_to_law, conditional_joint, exact_joint, glauber_sample, GlauberOptions,
};
use cwlimits::landscape::{find_global_minima, HomogeneousType};
use cwlimits::limits::{build_limit_law, law_moments};
use cwlimits::model::{validate_model, SpeciesPartition};
use cwlimits::{Error, LimitLaw, MinimaSet, ModelSpec, MomentReport, ValidatedModel};
use serde::Serialize;

use crate::output::{
    fmt_vec, num, write_csv, write_json, CliError, Provenance, EXIT_BUDGET, EXIT_OK,
};
use crate::{AnalyzeArgs, Format, SampleArgs, VerifyArgs};

fn load_model(path: &Path) -> Result<(ModelSpec, ValidatedModel), CliError> {
    let spec = ModelSpec::from_path(path).map_err(|e| match e {
        Error::InvalidModel(_) => CliError::Lib(e),
        other => CliError::ModelFile(format!("{}: {other}", path.display())),
    })?;
    let model = validate_model(spec.clone())?;
    Ok((spec, model))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("cannot parse {what} entry '{}'", p.trim())))
        })
        .collect()
}

/// Per-species integer weights; must reproduce the model's proportions.
fn species_weights(split: Option<&str>, model: &ValidatedModel) -> Result<Vec<u64>, CliError> {
    let Some(text) = split else {
        return Ok(model.partition().reduced_weights());
    };
    let weights: Vec<u64> = parse_list(text, "--split")?;
    let partition = SpeciesPartition::new(weights.clone())
        .map_err(|e| CliError::Usage(format!("--split: {e}")))?;
    if partition.n() != model.n() || !partition.same_proportions(model.partition()) {
        return Err(CliError::Usage(format!(
            "--split {:?} does not match the model's species proportions {:?}",
            weights,
            model.partition().sizes()
        )));
    }
    Ok(weights)
}

fn scaled_partition(weights: &[u64], size: u64) -> Result<SpeciesPartition, CliError> {
    let sizes = weights
        .iter()
        .map(|&w| {
            w.checked_mul(size)
                .ok_or_else(|| CliError::Usage(format!("size {size} overflows")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpeciesPartition::new(sizes)?)
}

fn type_name(k: HomogeneousType) -> &'static str {
    match k {
        HomogeneousType::Type1 => "Type1",
        HomogeneousType::Type2 => "Type2",
        HomogeneousType::NonHomogeneousSeparable => "NonHomogeneousSeparable",
        HomogeneousType::Unclassified => "Unclassified",
    }
}

#[derive(Serialize)]
struct LawEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    law: Option<LimitLaw>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct AnalyzeDoc {
    #[serde(flatten)]
    provenance: Provenance,
    positive_definite: bool,
    smallest_eigenvalue: f64,
    minima: MinimaSet,
    laws: Vec<LawEntry>,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<u8, CliError> {
    let (spec, model) = load_model(&args.common.model)?;
    let minima = find_global_minima(&model, args.grid)?;
    let laws: Vec<LawEntry> = minima
        .points
        .iter()
        .map(|p| match build_limit_law(p, &model) {
            Ok(law) => LawEntry { law: Some(law), error: None },
            Err(e) => LawEntry { law: None, error: Some(e.to_string()) },
        })
        .collect();

    println!(
        "{} global minim{} of G (f = {:.9}, δ̄ = {})",
        minima.points.len(),
        if minima.points.len() == 1 { "um" } else { "a" },
        minima.f_min,
        if minima.delta_bar.is_finite() { format!("{:.6}", minima.delta_bar) } else { "∞".into() }
    );
    println!("{:>3}  {:<28} {:>14} {:>10}  {:<24} {:<9} exponents", "#", "mu", "G(mu)", "|grad|", "type", "law");
    for (i, (p, l)) in minima.points.iter().zip(&laws).enumerate() {
        let kind = l.law.as_ref().map_or("-".to_string(), |law| format!("{:?}", law.kind));
        let exps = l.law.as_ref().map_or(String::new(), |law| fmt_vec(&law.exponents));
        println!(
            "{:>3}  {:<28} {:>14.9} {:>10.2e}  {:<24} {:<9} {}",
            i,
            fmt_vec(&p.mu),
            p.value,
            p.grad_norm,
            type_name(p.k),
            kind,
            exps
        );
        if let Some(law) = &l.law {
            if let Some(chi) = &law.chi {
                println!("     chi = {:?}", chi.to_rows());
            }
            for block in law.blocks() {
                if let Some(q) = &block.quartic {
                    let terms: Vec<String> = q
                        .entries()
                        .filter(|(_, v)| *v != 0.0)
                        .map(|(idx, v)| {
                            let coords: Vec<usize> = idx.iter().map(|&i| block.coords[i] + 1).collect();
                            format!("{v:.6}·x{coords:?}")
                        })
                        .collect();
                    println!("     quartic exponent on {:?}: {}", block.coords, terms.join(" + "));
                }
            }
        }
        if let Some(e) = &l.error {
            println!("     no limit law: {e}");
        }
    }

    let provenance = Provenance::new("analyze", spec.to_file());
    if let Some(out) = &args.common.out {
        match args.common.format {
            Format::Json => write_json(
                out,
                &AnalyzeDoc {
                    provenance,
                    positive_definite: model.positive_definite(),
                    smallest_eigenvalue: model.smallest_eigenvalue(),
                    minima: minima.clone(),
                    laws,
                },
            )?,
            Format::Csv => {
                let n = model.n();
                let mut header: Vec<String> = vec!["index".into()];
                header.extend((1..=n).map(|l| format!("mu{l}")));
                header.extend(["value", "grad_norm", "type", "law"].map(String::from));
                header.extend((1..=n).map(|l| format!("gamma{l}")));
                let rows = minima
                    .points
                    .iter()
                    .zip(&laws)
                    .enumerate()
                    .map(|(i, (p, l))| {
                        let mut row = vec![i.to_string()];
                        row.extend(p.mu.iter().map(|&v| num(v)));
                        row.push(num(p.value));
                        row.push(num(p.grad_norm));
                        row.push(type_name(p.k).into());
                        match &l.law {
                            Some(law) => {
                                row.push(format!("{:?}", law.kind));
                                row.extend(law.exponents.iter().map(|&g| num(g)));
                            }
                            None => {
                                row.push(String::new());
                                row.extend((0..n).map(|_| String::new()));
                            }
                        }
                        row
                    })
                    .collect::<Vec<_>>();
                write_csv(out, &provenance, &header, &rows)?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyRow {
    size: u64,
    sizes: Vec<u64>,
    states: Option<usize>,
    budget_exceeded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    moments: Option<MomentReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covariance_max_abs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covariance_rel_max_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covariance_rel_entrywise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fourth_discrepancy: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    standardized_fourth_discrepancy: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_variation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary_mass: Option<f64>,
    boundary_flagged: bool,
}

#[derive(Serialize)]
struct Ball {
    center: Vec<f64>,
    radius: f64,
}

#[derive(Serialize)]
struct VerifyDoc {
    #[serde(flatten)]
    provenance: Provenance,
    minimum: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ball: Option<Ball>,
    law: LimitLaw,
    law_moments: MomentReport,
    rows: Vec<VerifyRow>,
    complete: bool,
}

pub fn verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let (spec, model) = load_model(&args.common.model)?;
    let n = model.n();
    let sweep: Vec<u64> = parse_list(&args.sizes, "--sizes")?;
    if sweep.is_empty() || sweep[0] == 0 || sweep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage("--sizes must be strictly increasing positive integers".into()));
    }
    let weights = species_weights(args.split.as_deref(), &model)?;
    let minima = find_global_minima(&model, args.grid)?;

    let ball = match (&args.ball_center, args.ball_radius) {
        (Some(c), Some(r)) => {
            let center: Vec<f64> = parse_list(c, "--ball-center")?;
            if center.len() != n {
                return Err(CliError::Usage(format!("--ball-center needs {n} coordinates")));
            }
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::Usage("--ball-radius must be positive".into()));
            }
            if !minima.is_unique() && r >= minima.delta_bar {
                eprintln!(
                    "warning: ball radius {r} is not below the minimum separation {:.6}",
                    minima.delta_bar
                );
            }
            Some(Ball { center, radius: r })
        }
        _ => None,
    };
    let point = match &ball {
        Some(b) => minima.nearest(&b.center),
        None if minima.is_unique() => &minima.points[0],
        None => {
            return Err(CliError::Usage(format!(
                "the model has {} global minima; isolate one with --ball-center and --ball-radius",
                minima.points.len()
            )))
        }
    };
    let law = build_limit_law(point, &model)?;
    let target = law_moments(&law)?;

    println!(
        "minimum {} ({}), law {:?}, exponents {}",
        fmt_vec(&point.mu),
        type_name(point.k),
        law.kind,
        fmt_vec(&law.exponents)
    );
    println!("law E[x^4] = {}", fmt_vec(&target.fourth));
    println!(
        "{:>8} {:>10} {:>12} {:>12} {:>28} {:>10}",
        "size", "states", "cov rel", "cov abs", "E[x^4] (finite N)", "TV"
    );

    let mut rows = Vec::new();
    let mut complete = true;
    for &size in &sweep {
        let partition = scaled_partition(&weights, size)?;
        let dist = match &ball {
            Some(b) => conditional_joint(&model, &partition, &b.center, b.radius),
            None => exact_joint(&model, &partition),
        };
        let dist = match dist {
            Ok(d) => d,
            Err(Error::BudgetExceeded { states, budget }) => {
                eprintln!("budget exceeded at size {size}: {states} grid states > {budget}");
                rows.push(VerifyRow {
                    size,
                    sizes: partition.sizes().to_vec(),
                    states: None,
                    budget_exceeded: true,
                    moments: None,
                    covariance_max_abs: None,
                    covariance_rel_max_norm: None,
                    covariance_rel_entrywise: None,
                    fourth_discrepancy: None,
                    standardized_fourth_discrepancy: None,
                    total_variation: None,
                    boundary_mass: None,
                    boundary_flagged: false,
                });
                complete = false;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let (report, disc) = compare_dist_to_law(&dist, &law)?;
        let condition = dist.condition();
        println!(
            "{:>8} {:>10} {:>12.4e} {:>12.4e} {:>28} {:>10}",
            size,
            dist.len(),
            disc.covariance_rel_max_norm,
            disc.covariance_max_abs,
            fmt_vec(&report.fourth),
            disc.total_variation.map_or("-".into(), |t| format!("{t:.4e}"))
        );
        if condition.is_some_and(|c| c.boundary_flagged) {
            println!("         boundary cells carry {:.2}% of the conditional mass", 100.0 * condition.unwrap().boundary_mass);
        }
        rows.push(VerifyRow {
            size,
            sizes: partition.sizes().to_vec(),
            states: Some(dist.len()),
            budget_exceeded: false,
            moments: Some(report),
            covariance_max_abs: Some(disc.covariance_max_abs),
            covariance_rel_max_norm: Some(disc.covariance_rel_max_norm),
            covariance_rel_entrywise: Some(disc.covariance_rel_entrywise),
            fourth_discrepancy: Some(disc.fourth),
            standardized_fourth_discrepancy: Some(disc.standardized_fourth),
            total_variation: disc.total_variation,
            boundary_mass: condition.map(|c| c.boundary_mass),
            boundary_flagged: condition.is_some_and(|c| c.boundary_flagged),
        });
    }

    let provenance = Provenance::new("verify", spec.to_file());
    if let Some(out) = &args.common.out {
        match args.common.format {
            Format::Json => write_json(
                out,
                &VerifyDoc {
                    provenance,
                    minimum: point.mu.clone(),
                    ball,
                    law,
                    law_moments: target,
                    rows,
                    complete,
                },
            )?,
            Format::Csv => {
                let mut header: Vec<String> = ["size", "states", "cov_max_abs", "cov_rel_max_norm", "cov_rel_entrywise"]
                    .map(String::from)
                    .to_vec();
                header.extend((1..=n).map(|l| format!("fourth{l}")));
                header.extend((1..=n).map(|l| format!("fourth_diff{l}")));
                header.extend((1..=n).map(|l| format!("std_fourth_diff{l}")));
                header.extend(["tv", "boundary_mass", "status"].map(String::from));
                let opt = |v: Option<f64>| v.map_or(String::new(), num);
                let csv_rows = rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.size.to_string(), r.states.map_or(String::new(), |s| s.to_string())];
                        row.push(opt(r.covariance_max_abs));
                        row.push(opt(r.covariance_rel_max_norm));
                        row.push(opt(r.covariance_rel_entrywise));
                        let vec_cols = |v: Option<&Vec<f64>>| -> Vec<String> {
                            match v {
                                Some(v) => v.iter().map(|&x| num(x)).collect(),
                                None => vec![String::new(); n],
                            }
                        };
                        row.extend(vec_cols(r.moments.as_ref().map(|m| &m.fourth)));
                        row.extend(vec_cols(r.fourth_discrepancy.as_ref()));
                        row.extend(vec_cols(r.standardized_fourth_discrepancy.as_ref()));
                        row.push(opt(r.total_variation));
                        row.push(opt(r.boundary_mass));
                        row.push(
                            if r.budget_exceeded {
                                "budget_exceeded"
                            } else if r.boundary_flagged {
                                "boundary_flagged"
                            } else {
                                "ok"
                            }
                            .into(),
                        );
                        row
                    })
                    .collect::<Vec<_>>();
                write_csv(out, &provenance, &header, &csv_rows)?;
            }
        }
    }
    Ok(if complete { EXIT_OK } else { EXIT_BUDGET })
}

#[derive(Serialize)]
struct SampleDoc {
    #[serde(flatten)]
    provenance: Provenance,
    sizes: Vec<u64>,
    sweeps: u64,
    burn_in: u64,
    chains: usize,
    seed: u64,
    report: MomentReport,
}

pub fn sample(args: &SampleArgs) -> Result<u8, CliError> {
    let (spec, model) = load_model(&args.common.model)?;
    let n = model.n();
    let partition = match args.sizes {
        Some(size) => scaled_partition(&species_weights(args.split.as_deref(), &model)?, size)?,
        None => model.partition().clone(),
    };
    let minima = find_global_minima(&model, args.grid)?;
    // Center at a unique minimum with its law's normalization; otherwise at 0 with √N.
    let (center, exponents) = if minima.is_unique() {
        let p = &minima.points[0];
        match build_limit_law(p, &model) {
            Ok(law) => (law.center, law.exponents),
            Err(_) => (p.mu.clone(), vec![0.5; n]),
        }
    } else {
        (vec![0.0; n], vec![0.5; n])
    };
    let opts = GlauberOptions {
        sweeps: args.sweeps,
        burn_in: args.burn_in,
        seed: args.common.seed,
        chains: args.chains,
        ..GlauberOptions::default()
    };
    let report = glauber_sample(&model, &partition, &opts, &center, &exponents)?;
    let se = report.standard_errors.clone().expect("sampler reports standard errors");

    println!(
        "sizes {:?}, {} sweeps ({} burn-in) x {} chain(s), seed {}, center {}, exponents {}",
        partition.sizes(),
        args.sweeps,
        args.burn_in,
        args.chains,
        args.common.seed,
        fmt_vec(&center),
        fmt_vec(&exponents)
    );
    println!("{:>3} {:>22} {:>22} {:>22} {:>22}", "l", "E[x]", "E[x^2]", "E[x^3]", "E[x^4]");
    for l in 0..n {
        let second = report.covariance[(l, l)] + report.mean[l] * report.mean[l];
        println!(
            "{:>3} {:>10.5} ± {:<9.2e} {:>10.5} ± {:<9.2e} {:>10.5} ± {:<9.2e} {:>10.5} ± {:<9.2e}",
            l + 1,
            report.mean[l],
            se.mean[l],
            second,
            se.second[(l, l)],
            report.third[l],
            se.third[l],
            report.fourth[l],
            se.fourth[l]
        );
    }

    let provenance = Provenance::new("sample", spec.to_file());
    if let Some(out) = &args.common.out {
        match args.common.format {
            Format::Json => write_json(
                out,
                &SampleDoc {
                    provenance,
                    sizes: partition.sizes().to_vec(),
                    sweeps: args.sweeps,
                    burn_in: args.burn_in,
                    chains: args.chains,
                    seed: args.common.seed,
                    report,
                },
            )?,
            Format::Csv => {
                let header = ["l", "mean", "se_mean", "second", "se_second", "third", "se_third", "fourth", "se_fourth", "standardized_fourth"]
                    .map(String::from)
                    .to_vec();
                let rows = (0..n)
                    .map(|l| {
                        let second = report.covariance[(l, l)] + report.mean[l] * report.mean[l];
                        vec![
                            (l + 1).to_string(),
                            num(report.mean[l]),
                            num(se.mean[l]),
                            num(second),
                            num(se.second[(l, l)]),
                            num(report.third[l]),
                            num(se.third[l]),
                            num(report.fourth[l]),
                            num(se.fourth[l]),
                            num(report.standardized_fourth[l]),
                        ]
                    })
                    .collect::<Vec<_>>();
                write_csv(out, &provenance, &header, &rows)?;
            }
        }
    }
    Ok(EXIT_OK)
}
