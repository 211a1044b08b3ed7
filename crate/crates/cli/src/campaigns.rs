use austere_core::c4::{bryant_normal_form_check, verify_c4_austere};
use austere_core::dupin::{
    bracket_closed_form, check_curvature_circle, curvature_sphere_span, kappa_profile,
    weak_irreducibility_check, ChartFrame, CIRCLE_PAIRS, OBSTRUCTIONS,
};
use austere_core::field::{ambient_dim, sample_lambdas, sample_orbit, FMatrix, Field, Region};
use austere_core::geometry::{frame_point, normal_commutator_norm, principal_spectrum};
use austere_core::subspaces::{
    bryant_subspace, dimest_bound, families_for, family_dim, is_austere_subspace,
    is_austere_subspace_grid, special_lambda3, verify_dimest_ingredients, witt_bound,
    BilinearFormSig, BryantFamily, SubspaceSpec,
};
use austere_core::tol;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{load_matrix, seed_for, usage, Check, CliError, Command, RunConfig};

type Checks = Result<Vec<Check>, CliError>;

pub(crate) fn dispatch(cfg: &RunConfig) -> Checks {
    match cfg.command {
        Command::Spectrum => spectrum(cfg),
        Command::Austere => austere(cfg),
        Command::FlatNormal => flat_normal(cfg),
        Command::Dupin => dupin(cfg),
        Command::Reducibility => reducibility(cfg),
        Command::Brackets => brackets(cfg),
        Command::C4 => c4(cfg),
        Command::Subspace => subspace(cfg),
        Command::Bound => bound(cfg),
        Command::All => {
            // Size-4 campaigns always run at n = 4.
            let four = RunConfig { n: 4, ..cfg.clone() };
            let mut out = Vec::new();
            for (c, conf) in [
                (Command::Spectrum, cfg),
                (Command::Austere, cfg),
                (Command::FlatNormal, cfg),
                (Command::Dupin, &four),
                (Command::Reducibility, &four),
                (Command::Brackets, &four),
                (Command::C4, &four),
                (Command::Subspace, cfg),
                (Command::Bound, cfg),
            ] {
                out.extend(dispatch(&RunConfig { command: c, ..conf.clone() })?);
            }
            Ok(out)
        }
    }
}

fn need_n(cfg: &RunConfig, ok: impl Fn(usize) -> bool, what: &str) -> Result<(), CliError> {
    if ok(cfg.n) {
        Ok(())
    } else {
        Err(usage(format!("{what}, got n = {}", cfg.n)))
    }
}

/// Runs `f` on each trial's seed in parallel; results stay in trial order.
fn per_trial<T: Send>(
    cfg: &RunConfig,
    f: impl Fn(usize, u64) -> Result<T, austere_core::Error> + Sync,
) -> Result<Vec<T>, CliError> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| f(i, seed_for(cfg.seed, i as u64)))
        .collect::<Result<Vec<T>, _>>()
        .map_err(CliError::from)
}

fn point(n: usize, field: Field, region: Region, seed: u64) -> Result<FMatrix, austere_core::Error> {
    Ok(sample_orbit(n, field, region, &mut ChaCha8Rng::seed_from_u64(seed))?.a)
}

fn spectrum_checks(name: &str, a: &FMatrix, cfg: &RunConfig) -> Result<Vec<Check>, austere_core::Error> {
    let fp = frame_point(a)?;
    let mut out = Vec::new();
    for alpha in 1..=fp.half() {
        let s = principal_spectrum(&fp, alpha)?;
        let values: Vec<f64> = s.clusters.iter().map(|c| c.value).collect();
        out.push(
            Check::new(
                format!("{name}.alpha{alpha}"),
                s.pairing_residual <= cfg.tolerances.spectral,
                Some(cfg.tolerances.spectral),
            )
            .with("pairing_residual", s.pairing_residual)
            .with("principal_curvatures", values)
            .with("multiplicities", s.multiplicities()),
        );
    }
    if a.n() == 4 {
        if let Ok(k) = kappa_profile(a, a.field()) {
            // Closed form against the assembled operator, as multisets.
            let mut closed: Vec<f64> = k
                .kappas
                .iter()
                .zip(k.multiplicities)
                .flat_map(|(v, m)| std::iter::repeat_n(*v, m))
                .collect();
            closed.sort_by(f64::total_cmp);
            let assembled = principal_spectrum(&fp, 1)?.eigenvalues;
            let scale = closed.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let err = closed
                .iter()
                .zip(&assembled)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
                / scale;
            out.push(
                Check::new(format!("{name}.closed-form"), err <= tol::DERIVED, Some(tol::DERIVED))
                    .with("kappas", k.kappas)
                    .with("multiplicities", k.multiplicities)
                    .with("relative_error", err),
            );
        }
    }
    Ok(out)
}

fn spectrum(cfg: &RunConfig) -> Checks {
    if let Some(arg) = &cfg.matrix {
        let a = load_matrix(arg, cfg.field)?;
        return Ok(spectrum_checks("spectrum", &a, cfg)?);
    }
    need_n(cfg, |n| n >= 3, "random spectra need n >= 3")?;
    let all = per_trial(cfg, |i, seed| {
        spectrum_checks(&format!("spectrum[{i}]"), &point(cfg.n, cfg.field, Region::B, seed)?, cfg)
    })?;
    Ok(all.into_iter().flatten().collect())
}

fn austere(cfg: &RunConfig) -> Checks {
    need_n(cfg, |n| n >= 3, "austerity needs n >= 3")?;
    let residuals = per_trial(cfg, |_, seed| {
        let fp = frame_point(&point(cfg.n, cfg.field, Region::B, seed)?)?;
        (1..=fp.half()).try_fold(0.0f64, |m, al| Ok(m.max(principal_spectrum(&fp, al)?.pairing_residual)))
    })?;
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    Ok(vec![Check::new("austere", worst <= cfg.tolerances.spectral, Some(cfg.tolerances.spectral))
        .with("trials", cfg.trials)
        .with("max_pairing_residual", worst)])
}

fn flat_normal(cfg: &RunConfig) -> Checks {
    need_n(cfg, |n| n >= 3, "flat normal bundle needs n >= 3")?;
    let norms = per_trial(cfg, |_, seed| {
        normal_commutator_norm(&frame_point(&point(cfg.n, cfg.field, Region::B, seed)?)?)
    })?;
    let worst = norms.iter().copied().fold(0.0, f64::max);
    Ok(vec![Check::new("flat-normal", worst <= cfg.tolerances.spectral, Some(cfg.tolerances.spectral))
        .with("trials", cfg.trials)
        .with("max_commutator_norm", worst)])
}

fn dupin(cfg: &RunConfig) -> Checks {
    need_n(cfg, |n| n == 4, "dupin checks need n = 4")?;
    let tol = cfg.tolerances.circle;
    let all = per_trial(cfg, |i, seed| {
        let a = point(4, cfg.field, Region::BTilde, seed)?;
        CIRCLE_PAIRS
            .iter()
            .map(|&pair| {
                let c = check_curvature_circle(&a, pair, 21)?;
                let ok = c.max_variation <= tol && c.direction_residual <= tol && c.kappa_mismatch <= tol;
                Ok(Check::new(format!("circle[{i}]({},{})", pair.0 + 1, pair.1 + 1), ok, Some(tol))
                    .with("max_variation", c.max_variation)
                    .with("direction_residual", c.direction_residual)
                    .with("kappa_mismatch", c.kappa_mismatch))
            })
            .collect::<Result<Vec<_>, austere_core::Error>>()
    })?;
    Ok(all.into_iter().flatten().collect())
}

fn reducibility(cfg: &RunConfig) -> Checks {
    need_n(cfg, |n| n == 4, "curvature-sphere ranks need n = 4")?;
    let big_n = ambient_dim(4, cfg.field)?;
    (1..=5usize)
        .into_par_iter()
        .map(|i| {
            let r = curvature_sphere_span(i, cfg.field, 2 * (big_n + 2), seed_for(cfg.seed, i as u64))?;
            let expected = if i == 5 { big_n + 1 } else { big_n + 2 };
            Ok(Check::new(
                format!("curvature-sphere-span[K{i}]"),
                r.rank == expected && r.gap >= tol::RANK_GAP,
                Some(tol::RANK_GAP),
            )
            .with("rank", r.rank)
            .with("expected", expected)
            .with("gap", r.gap.min(f64::MAX)))
        })
        .collect()
}

fn brackets(cfg: &RunConfig) -> Checks {
    need_n(cfg, |n| n == 4, "bracket checks need n = 4")?;
    let tol = cfg.tolerances.bracket;
    let all = per_trial(cfg, |i, seed| {
        let l = sample_lambdas(4, Region::BTilde, &mut ChaCha8Rng::seed_from_u64(seed))?;
        let d = FMatrix::diag(Field::Real, &[l[0], -l[0], l[1], -l[1]]);
        let frame = ChartFrame::new(&d)?;
        let weak = weak_irreducibility_check(&d)?;
        let mut out = Vec::new();
        for (k, &(p1, p2, kappa)) in OBSTRUCTIONS.iter().enumerate() {
            let closed = bracket_closed_form(&d, p1, p2)?;
            let flow = frame.bracket_flow(p1, p2, 1e-4)?;
            let rel = (&flow - &closed).norm() / closed.norm();
            let ob = &weak.obstructions[k];
            out.push(
                Check::new(
                    format!("bracket[{i}][Y{}{},Y{}{}]", p1.0 + 1, p1.1 + 1, p2.0 + 1, p2.1 + 1),
                    rel <= tol && ob.component > 1e-6 && ob.off_span <= tol::DERIVED,
                    Some(tol),
                )
                .with("relative_gap", rel)
                .with("kappa", kappa)
                .with("component", ob.component)
                .with("off_span", ob.off_span),
            );
        }
        Ok(out)
    })?;
    Ok(all.into_iter().flatten().collect())
}

fn c4(cfg: &RunConfig) -> Checks {
    let r = verify_c4_austere(cfg.field, cfg.trials, cfg.seed)?;
    let mut out = vec![Check::new("c4-austere", r.austere, Some(tol::PAIRING))
        .with("trials", r.trials)
        .with("max_pairing_residual", r.max_pairing_residual)
        .with("max_reflection_residual", r.max_reflection_residual)];
    if cfg.field != Field::Quaternion {
        let b = bryant_normal_form_check(cfg.field, cfg.trials.max(100), cfg.seed)?;
        out.push(
            Check::new("c4-block-pattern", b.passed(), Some(1e-12))
                .with("dim", b.dim)
                .with("max_pattern_residual", b.max_pattern_residual)
                .with("in_family", b.in_family)
                .with("exact_austere", b.randomized.austere),
        );
    }
    Ok(out)
}

fn subspace_check(name: String, spec: &SubspaceSpec, expected: Option<usize>, cfg: &RunConfig) -> Check {
    let v = is_austere_subspace(spec, cfg.trials, cfg.seed);
    let grid = (spec.dim() <= 4).then(|| is_austere_subspace_grid(spec).ok()).flatten();
    let dim_ok = expected.is_none_or(|e| e == spec.dim());
    let passed = v.austere && dim_ok && grid.as_ref().is_none_or(|g| g.austere);
    Check::new(name, passed, None)
        .with("dim", spec.dim())
        .with("expected_dim", expected)
        .with("trials", v.trials)
        .with("failure_bound", v.failure_bound)
        .with("witness", v.witness)
        .with("grid_proof", grid.map(|g| g.austere))
}

fn subspace(cfg: &RunConfig) -> Checks {
    if let Some(path) = &cfg.subspace {
        let spec: SubspaceSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        return Ok(vec![subspace_check(format!("subspace[{}]", path.display()), &spec, None, cfg)]);
    }
    let mut out: Vec<Check> = families_for(cfg.n)
        .into_par_iter()
        .map(|f| {
            let spec = bryant_subspace(&f, cfg.n)?;
            Ok(subspace_check(format!("family[{f:?}]"), &spec, Some(family_dim(&f, cfg.n)), cfg))
        })
        .collect::<Result<_, CliError>>()?;
    if cfg.n == 4 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let a = BigRational::new(rng.random_range(0..40).into(), rng.random_range(1..15).into());
        let b = BigRational::new(rng.random_range(0..40).into(), rng.random_range(1..15).into());
        let (l1, l2) = if a >= b { (a, b) } else { (b, a) };
        let l3 = special_lambda3(&l1, &l2);
        let f = BryantFamily::special([l1, l2, l3]);
        let spec = bryant_subspace(&f, 4)?;
        out.push(subspace_check(format!("family[{f:?}]"), &spec, Some(3), cfg));
    }
    Ok(out)
}

fn bound(cfg: &RunConfig) -> Checks {
    need_n(cfg, |n| (3..=8).contains(&n), "the dimension bound is checked for 3 <= n <= 8")?;
    let b = dimest_bound(cfg.n)?;
    let r = verify_dimest_ingredients(cfg.n, cfg.trials, cfg.seed)?;
    let o = r.observed[0];
    let tangent = o.nullity + o.pos_index + o.neg_index;
    let witt = witt_bound(BilinearFormSig::new(tangent, o.pos_index, o.neg_index)?);
    let mut out = vec![
        Check::new("bound", witt + 1 == b && r.chain_bound == b, None)
            .with("bound", b)
            .with("witt_plus_one", witt + 1),
        Check::new("second-form-signature", r.mismatches == 0, None)
            .with("predicted", r.predicted)
            .with("mismatches", r.mismatches)
            .with("trials", cfg.trials),
    ];
    if cfg.n % 2 == 0 {
        let paired = family_dim(&BryantFamily::PairedBlock, cfg.n);
        out.push(Check::new("bound-attained", paired == b, None).with("paired_block_dim", paired));
    }
    Ok(out)
}
