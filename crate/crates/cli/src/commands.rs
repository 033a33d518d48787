use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use vekua::bers::{successor_error, GeneratingPair};
use vekua::exprfield::{Frame, ScalarJetField};
use vekua::field::{Evaluator, Field};
use vekua::quatcalc::{factorization_residual, log_derivative, plane_to_space, riccati_residual};
use vekua::schrod::{
    cauchy_check, generate_solution, main_pair, nonvanishing, orthogonality_check, phi_profile,
    rho_pair, schrodinger_rel, vekua_rel, Pipeline, RhoStructure, SchrodingerProblem, Stats,
};
use vekua::{Error, Point2};

use crate::config::{ConfigError, RunConfig};
use crate::report::{Recorder, Report, StepReport};

/// Test functions for the factorization identity besides `f0` and the
/// configured solutions.
const FACTORIZATION_PROBES: [&str; 2] = ["1 + x - y^2 + x*y", "x^3 - 3*x*y^2 + 0.5*y"];

/// Points per axis for the finite-difference checks.
const FD_GRID: usize = 5;

/// Random points for the ρ consistency check.
const RHO_POINTS: usize = 100;

pub enum Failure {
    Config(ConfigError),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

fn stats_of(vals: impl IntoIterator<Item = (Point2, f64)>) -> Stats {
    let mut s = Stats::default();
    for (p, r) in vals {
        s.samples += 1;
        let r = if r.is_nan() { f64::INFINITY } else { r };
        if s.at.is_none() || r > s.max {
            s.max = r;
            s.at = Some(p);
        }
    }
    s
}

/// A pass/fail check that succeeded at `n` samples.
fn passed(n: usize) -> Stats {
    Stats {
        samples: n,
        ..Stats::default()
    }
}

fn rel(d: Complex64, r: Complex64) -> f64 {
    d.norm() / (1.0 + r.norm())
}

/// `a* = -a`, `A* = -A`, `b* = -conj(B)`, `B* = -conj(b)` at the samples.
fn adjoint_identities(
    pair: &GeneratingPair,
    pts: &[Point2],
    ev: &Evaluator,
) -> vekua::Result<Stats> {
    let c = pair.coefficients();
    let s = pair.adjoint_by_formula().coefficients();
    let vals = ev.sample(
        &[
            &c.a, &c.b, &c.big_a, &c.big_b, &s.a, &s.b, &s.big_a, &s.big_b,
        ],
        pts,
    )?;
    Ok(stats_of(pts.iter().zip(&vals).map(|(p, v)| {
        let (a, b, aa, bb) = (v[0].v, v[1].v, v[2].v, v[3].v);
        let e = rel(v[4].v + a, a)
            .max(rel(v[6].v + aa, aa))
            .max(rel(v[5].v + bb.conj(), bb))
            .max(rel(v[7].v + b.conj(), b));
        (*p, e)
    })))
}

/// Worst `|ẇ|` for `w` in `{F, G}` under the pair's own derivative.
fn derivatives_of_pair(
    pair: &GeneratingPair,
    pts: &[Point2],
    ev: &Evaluator,
) -> vekua::Result<Stats> {
    let c = pair.coefficients();
    let (df, dg) = (
        c.fg_derivative_field(&pair.f),
        c.fg_derivative_field(&pair.g),
    );
    let vals = ev.sample(&[&df, &dg, &pair.f, &pair.g], pts)?;
    Ok(stats_of(pts.iter().zip(&vals).map(|(p, v)| {
        (
            *p,
            (v[0].v.norm() / (1.0 + v[2].v.norm())).max(v[1].v.norm() / (1.0 + v[3].v.norm())),
        )
    })))
}

/// `Im(conj(F_I) G_I)` against `e^{-2S} |grad ρ|²`.
fn rho_pair_orientation(
    pair: &GeneratingPair,
    rho: &RhoStructure,
    pts: &[Point2],
    ev: &Evaluator,
) -> vekua::Result<Stats> {
    let vals = ev.sample(&[&pair.f, &pair.g], pts)?;
    let mut out = Vec::with_capacity(pts.len());
    for (p, v) in pts.iter().zip(&vals) {
        let r = rho.rho.jet2(*p)?;
        let (s, _, _) = rho.big_s.jet(r.v)?;
        let want = (-2.0 * s).exp() * (r.g[0] * r.g[0] + r.g[1] * r.g[1]);
        let got = (v[0].v.conj() * v[1].v).im;
        out.push((*p, (got - want).abs() / (1.0 + want.abs())));
    }
    Ok(stats_of(out))
}

fn pair_checks(
    rec: &mut Recorder,
    prob: &SchrodingerProblem,
    rho: Option<&RhoStructure>,
    cfg: &RunConfig,
    ev: &Evaluator,
) -> Result<(), Failure> {
    let tol = cfg.problem.tolerances.identity;
    let pts = prob.interior_samples();
    let main = match main_pair(prob, ev) {
        Ok(m) => m,
        Err(e) => {
            rec.stats::<Error>("main pair (1/f0, i f0)", tol, || Err(e));
            return Ok(());
        }
    };
    let grid = prob.samples();
    rec.stats("main pair validity", 0.0, || {
        main.validate(&grid, ev).map(|_| passed(grid.len()))
    });
    rec.stats("main pair: derivatives of F and G vanish", tol, || {
        derivatives_of_pair(&main, &pts, ev)
    });
    rec.stats("main pair: adjoint coefficient identities", tol, || {
        adjoint_identities(&main, &pts, ev)
    });
    let Some(rho) = rho else { return Ok(()) };
    rec.stats(
        "rho: Laplacian / |grad|^2 = s, f0(rho) = f0, S' = s",
        tol,
        || rho.consistency_error(prob, RHO_POINTS, 1),
    );
    let pair = match rho_pair(prob, rho, ev) {
        Ok(p) => p,
        Err(e) => {
            rec.stats::<Error>("rho pair (F_I, G_I) validity", 0.0, || Err(e));
            return Ok(());
        }
    };
    rec.stats("rho pair (F_I, G_I) validity", 0.0, || {
        Ok::<_, Error>(passed(grid.len()))
    });
    rec.stats(
        "rho pair: Im(conj(F_I) G_I) = exp(-2S) |grad rho|^2",
        tol,
        || rho_pair_orientation(&pair, rho, &pts, ev),
    );
    rec.stats("rho pair: adjoint coefficient identities", tol, || {
        adjoint_identities(&pair, &pts, ev)
    });
    let star = pair.adjoint_by_formula();
    let star_c = star.coefficients();
    let f0 = &prob.f0_field;
    let target = f0.dzbar() / f0.clone();
    rec.stats("adjoint rho pair: B = dzbar(f0)/f0", tol, || {
        let vals = ev.sample(&[&star_c.big_b, &target], &pts)?;
        Ok::<_, Error>(stats_of(
            pts.iter()
                .zip(&vals)
                .map(|(p, v)| (*p, rel(v[0].v - v[1].v, v[1].v))),
        ))
    });
    rec.scalar("successor: adjoint rho pair -> main pair", tol, || {
        successor_error(&star_c, &main.coefficients(), &pts, ev)
    });
    let anchor = cfg.anchor()?;
    rec.scalar("profile solutions: <grad phi, grad psi> = 0", tol, || {
        let (phi, psi) = phi_profile(rho).first_pair(anchor)?;
        orthogonality_check(&phi, &psi, f0, &prob.samples(), tol, ev)
    });
    Ok(())
}

/// Solutions generated from `v = F_I` and `v = G_I`, with
/// `Ψ(anchor) = C1/2` and `Ψ(anchor) = (1 + C2)/2` respectively.
fn generated_checks(
    rec: &mut Recorder,
    prob: &SchrodingerProblem,
    rho: &RhoStructure,
    cfg: &RunConfig,
    ev: &Evaluator,
) -> Result<(), Failure> {
    let Ok(pair) = rho_pair(prob, rho, ev) else {
        return Ok(());
    };
    let anchor = cfg.anchor()?;
    let p = &cfg.pipeline;
    let pts = prob.interior_samples();
    for (label, v, psi_a) in [
        ("F_I", &pair.f, p.c1 / 2.0),
        ("G_I", &pair.g, (1.0 + p.c2) / 2.0),
    ] {
        rec.report
            .values
            .insert(format!("psi_anchor({label})"), psi_a);
        let gen = generate_solution(v, prob, anchor, Some(psi_a), p.c, ev);
        rec.stats(
            &format!("generated from {label}: Psi nonvanishing"),
            0.0,
            || {
                let g = gen.clone()?;
                let grid = prob.samples();
                nonvanishing(&g.psi, "Psi", &grid, prob.zeta, ev).map(|_| passed(grid.len()))
            },
        );
        rec.stats(
            &format!("generated from {label}: Schrodinger residual"),
            prob.tol,
            || {
                let g = gen.clone()?;
                prob.residual_stats(&g.f, &pts, ev)
            },
        );
    }
    Ok(())
}

pub fn verify(cfg: &RunConfig, origin: Option<String>, timings: bool) -> Result<Report, Failure> {
    let prob = cfg.schrodinger()?;
    let rho = cfg.rho_structure()?;
    let ev = Evaluator::default();
    let tols = cfg.problem.tolerances;
    let mut rec = Recorder::new(Report::new("verify", origin), timings);
    let pts = prob.interior_samples();

    rec.stats("f0 nonvanishing", 0.0, || {
        let grid = prob.samples();
        nonvanishing(&prob.f0_field, "f0", &grid, prob.zeta, &ev).map(|_| passed(grid.len()))
    });
    rec.stats("Schrodinger residual of f0", tols.residual, || {
        prob.residual_stats(&prob.f0_field, &pts, &ev)
    });

    let f0 = ScalarJetField::parse(&cfg.problem.f0, Frame::Plane)
        .map_err(|e| crate::config::err("problem.f0", e))?;
    let u = ScalarJetField::parse(&cfg.problem.u, Frame::Plane)
        .map_err(|e| crate::config::err("problem.u", e))?;
    let h = log_derivative(&f0);
    rec.stats("Riccati residual of Df0/f0", tols.residual, || {
        let h = h.clone()?;
        let mut out = Vec::new();
        for p in &pts {
            let r = riccati_residual(&h, &u, plane_to_space(*p))?;
            let scale = 1.0 + u.value(p)?.abs();
            out.push((*p, r.norm() / scale));
        }
        Ok::<_, Error>(stats_of(out))
    });
    let mut probes: Vec<String> = vec![cfg.problem.f0.clone()];
    probes.extend(cfg.solutions.values().cloned());
    probes.extend(FACTORIZATION_PROBES.iter().map(|s| s.to_string()));
    rec.stats(
        "factorization (D + M^h)(D - M^h) = -Laplacian + u",
        tols.finite_difference,
        || {
            let h = h.clone()?;
            let fd_pts = prob.domain.interior_grid(FD_GRID);
            let mut out = Vec::new();
            for src in &probes {
                let f = ScalarJetField::parse(src, Frame::Plane)?;
                for p in &fd_pts {
                    let scale = 1.0 + f.value(p)?.abs();
                    out.push((
                        *p,
                        factorization_residual(&h, &f, &u, plane_to_space(*p))? / scale,
                    ));
                }
            }
            Ok::<_, Error>(stats_of(out))
        },
    );

    pair_checks(&mut rec, &prob, rho.as_ref(), cfg, &ev)?;
    if let Some(rho) = &rho {
        generated_checks(&mut rec, &prob, rho, cfg, &ev)?;
    }

    for (name, src) in &cfg.solutions {
        rec.stats(
            &format!("Schrodinger residual of {name}"),
            tols.residual,
            || {
                let f = Field::parse(src, None)?;
                prob.residual_stats(&f, &pts, &ev)
            },
        );
    }
    Ok(rec.finish())
}

pub fn cauchy(
    cfg: &RunConfig,
    origin: Option<String>,
    curve: &str,
    solution: &str,
    timings: bool,
) -> Result<Report, Failure> {
    let prob = cfg.schrodinger()?;
    let gamma = cfg.curve(curve)?;
    let src = cfg.solution(solution)?;
    let f1 = Field::parse(&src, None)
        .map_err(|e| crate::config::err(format!("solutions.{solution}"), e))?;
    if !gamma
        .is_closed()
        .map_err(|e| crate::config::err(format!("curves.{curve}"), e))?
    {
        return Err(crate::config::err(format!("curves.{curve}"), "curve is not closed").into());
    }
    let ev = Evaluator::default();
    let tol = cfg.problem.tolerances.cauchy;
    let mut rec = Recorder::new(Report::new("cauchy", origin), timings);
    match cauchy_check(&prob, &f1, &gamma, &ev) {
        Ok((i1, i2)) => {
            rec.report.values.insert("I1".into(), i1);
            rec.report.values.insert("I2".into(), i2);
            rec.scalar::<Error>("I1 = Re of the integral of dz(f1/f0) dz", tol, || Ok(i1));
            rec.scalar::<Error>("I2 = Im of the integral of f0^2 dz(f1/f0) dz", tol, || {
                Ok(i2)
            });
        }
        Err(e) => rec.stats::<Error>("Cauchy integrals", tol, || Err(e)),
    }
    Ok(rec.finish())
}

fn write_step_csv(path: &Path, pl: &Pipeline, v: &Field, f: &Field) -> Result<(), String> {
    let pts = pl.prob.interior_samples();
    let c = &pl.coeffs_i;
    let vals = pl
        .ev
        .sample(&[v, &c.a, &c.b, f, &pl.prob.u_field], &pts)
        .map_err(|e| e.to_string())?;
    let mut w = csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    w.write_record([
        "x",
        "y",
        "re_v",
        "im_v",
        "f",
        "vekua_residual",
        "schrodinger_residual",
    ])
    .map_err(|e| e.to_string())?;
    for (p, j) in pts.iter().zip(&vals) {
        let row = [
            p[0],
            p[1],
            j[0].v.re,
            j[0].v.im,
            j[3].v.re,
            vekua_rel(&j[0], j[1].v, j[2].v),
            schrodinger_rel(&j[3], j[4].v),
        ];
        w.serialize(row).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

pub fn sequence(
    cfg: &RunConfig,
    origin: Option<String>,
    steps: usize,
    out: &Path,
    timings: bool,
) -> Result<Report, Failure> {
    let prob = cfg.schrodinger()?;
    let Some(rho) = cfg.rho_structure()? else {
        return Err(crate::config::err("rho", "the sequence needs a rho block").into());
    };
    let anchor = cfg.anchor()?;
    fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    let ev = Evaluator::default();
    let tol = cfg.problem.tolerances.residual;
    let mut rec = Recorder::new(Report::new("sequence", origin), timings);
    rec.report.values.insert("steps".into(), steps as f64);

    pair_checks(&mut rec, &prob, Some(&rho), cfg, &ev)?;
    let pl = match Pipeline::new(prob, rho, anchor, cfg.pipeline.c, ev) {
        Ok(pl) => pl,
        Err(e) => {
            rec.report.fail(format!("pipeline setup: {e}"));
            return Ok(rec.finish());
        }
    };
    let mut state = pl.start();
    for n in 1..=steps {
        let t = std::time::Instant::now();
        match pl.sequence_step(&state) {
            Ok(next) => state = next,
            Err(e) => {
                rec.report.fail(format!("step {n}: {e}"));
                break;
            }
        }
        let l = *state.log.last().expect("step logged");
        let rt = timings.then(|| t.elapsed().as_secs_f64());
        for (what, s) in [
            ("curl", l.curl),
            ("Vek2 residual of v", l.vek2),
            ("Schrodinger residual of f", l.schrod),
            ("Vek1 residual of w", l.vek1),
        ] {
            rec.stats::<Error>(&format!("step {n}: {what}"), tol, || Ok(s));
        }
        if let Some(c) = rec.report.checks.last_mut() {
            c.runtime_s = rt;
        }
        let file = PathBuf::from(format!("step_{n}.csv"));
        let (v, f) = (state.v.as_ref().expect("v"), state.f.as_ref().expect("f"));
        if let Err(e) = write_step_csv(&out.join(&file), &pl, v, f) {
            rec.report.fail(format!("step {n}: {e}"));
            break;
        }
        rec.report.steps.push(StepReport {
            step: n,
            curl: l.curl.max,
            vek2: l.vek2.max,
            schrodinger: l.schrod.max,
            vek1: l.vek1.max,
            samples: l.schrod.samples,
            csv: Some(file.display().to_string()),
        });
    }
    Ok(rec.finish())
}
