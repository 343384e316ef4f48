use std::f64::consts::TAU;

use magbump::conefield::cone_invariance_check;
use magbump::export::{render_svg, write_trajectory_csv, SvgOptions};
use magbump::flow::{propagate, Limits, Orbit, State};
use magbump::geometry::{classify_field, very_strong_threshold, FieldRegime};
use magbump::linearization::{agreement_sweep, focusing_check, parallel_entries};
use magbump::scattering::{
    line_to_state, scattering_degree, scene_standoff, shadow, state_to_line, total_curvature,
    OrientedLine,
};
use magbump::symbolic::{
    find_periodic_orbit_seeded, find_scattering_orbit, monodromy, ShootingOptions, Word, WordKind,
};
use magbump::{Error, Scene, Vec2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::{Artifacts, CliError};

fn numbers(text: &str, n: usize, flag: &str) -> Result<Vec<f64>, CliError> {
    let xs: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("{flag}: {text:?} is not a list of numbers")))?;
    if xs.len() != n || xs.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Usage(format!(
            "{flag} expects {n} comma-separated finite numbers"
        )));
    }
    Ok(xs)
}

fn regime_name(r: FieldRegime) -> &'static str {
    match r {
        FieldRegime::Weak => "weak",
        FieldRegime::Strong => "strong",
        FieldRegime::Neither => "neither",
    }
}

fn csv_of<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

fn trajectory_csv(orbits: &[Orbit], step: f64) -> String {
    let mut buf = Vec::new();
    write_trajectory_csv(orbits, step, &mut buf).expect("in-memory csv");
    String::from_utf8(buf).expect("utf-8")
}

fn one_based(symbols: &[usize]) -> Vec<usize> {
    symbols.iter().map(|s| s + 1).collect()
}

fn run_orbit(
    start: &State,
    scene: &Scene,
    limits: Limits,
    cfg: &RunConfig,
) -> Result<Orbit, CliError> {
    match propagate(start, scene, limits, cfg.glancing) {
        Ok(o) => Ok(o),
        Err(Error::LimitExceeded(o)) => Ok(*o),
        Err(e) => Err(e.into()),
    }
}

/// `n` lines of direction `phi` spread over the combined shadow of the
/// scene, padded on both sides so the outermost lines miss.
pub fn beam_lines(scene: &Scene, phi: f64, n: usize) -> Vec<OrientedLine> {
    let (lo, hi) = if scene.is_empty() {
        (-1.0, 1.0)
    } else {
        scene
            .bumps()
            .iter()
            .map(|b| shadow(b, phi))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| {
                (a.min(c), b.max(d))
            })
    };
    let pad = 0.2 * (hi - lo);
    let (a, w) = (lo - pad, hi - lo + 2.0 * pad);
    (0..n)
        .map(|k| OrientedLine::new(phi, a + w * (k as f64 + 0.5) / n as f64))
        .collect()
}

pub fn simulate(
    cfg: &RunConfig,
    line: Option<&str>,
    state: Option<&str>,
    beam: Option<&str>,
    max_events: usize,
    step: f64,
) -> Result<Artifacts, CliError> {
    let scene = &cfg.scene;
    if [line, state, beam].iter().filter(|x| x.is_some()).count() != 1 {
        return Err(CliError::Usage(
            "simulate needs exactly one of --line, --state, --beam".into(),
        ));
    }
    if !(step > 0.0) {
        return Err(CliError::Usage("--step must be positive".into()));
    }
    let standoff = scene_standoff(scene);
    let mut starts: Vec<(Option<OrientedLine>, State)> = Vec::new();
    if let Some(text) = line {
        let x = numbers(text, 2, "--line")?;
        let l = OrientedLine::new(x[0], x[1]);
        starts.push((Some(l), line_to_state(&l, standoff)));
    }
    if let Some(text) = state {
        let x = numbers(text, 4, "--state")?;
        let v = Vec2::new(x[2], x[3]);
        if v.norm() == 0.0 {
            return Err(CliError::Usage("--state needs a nonzero velocity".into()));
        }
        starts.push((
            None,
            State::located(Vec2::new(x[0], x[1]), v.normalize(), scene),
        ));
    }
    if let Some(text) = beam {
        let x = numbers(text, 2, "--beam")?;
        if !(x[1] >= 1.0 && x[1].fract() == 0.0) {
            return Err(CliError::Usage(
                "--beam PHI,N needs a positive integer N".into(),
            ));
        }
        for l in beam_lines(scene, x[0], x[1] as usize) {
            starts.push((Some(l), line_to_state(&l, standoff)));
        }
    }
    let limits = Limits {
        max_events,
        ..Limits::default()
    };
    let orbits = starts
        .iter()
        .map(|(_, s)| run_orbit(s, scene, limits, cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (k, ((l, _), o)) in starts.iter().zip(&orbits).enumerate() {
        let itinerary = one_based(&o.itinerary());
        let words: Vec<String> = itinerary.iter().map(|s| s.to_string()).collect();
        lines.push(format!(
            "orbit {k}: itinerary [{}], {:?}{}",
            words.join(","),
            o.termination,
            if o.glancing { ", glancing" } else { "" }
        ));
        rows.push(json!({
            "index": k,
            "incoming": l,
            "itinerary": itinerary,
            "termination": o.termination,
            "events": o.events.len(),
            "glancing": o.glancing,
            "end_time": o.end_time,
            "end": { "q": [o.end.q.x, o.end.q.y], "v": [o.end.v.x, o.end.v.y] },
            "outgoing": o.escaped().then(|| state_to_line(&o.end)),
            "total_curvature": total_curvature(o),
        }));
    }
    Ok(Artifacts {
        result: json!({ "orbits": rows }),
        csv: Some(trajectory_csv(&orbits, step)),
        svg: Some(render_svg(scene, &orbits, &SvgOptions::default())),
        lines,
        pass: true,
    })
}

#[derive(Serialize)]
struct DegreeRow {
    bump: usize,
    phi: f64,
    degree: i64,
    samples: usize,
    max_increment: f64,
    turn_near_lo: f64,
    turn_near_hi: f64,
}

pub fn degree(cfg: &RunConfig, directions: usize, points: usize) -> Result<Artifacts, CliError> {
    if directions == 0 || points < 4 {
        return Err(CliError::Usage(
            "degree needs --directions >= 1 and --points >= 4".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut per_bump = Vec::new();
    let mut lines = Vec::new();
    let mut pass = true;
    for (i, bump) in cfg.scene.bumps().iter().enumerate() {
        let regime = classify_field(bump);
        if regime == FieldRegime::Neither {
            lines.push(format!(
                "bump {}: regime neither weak nor strong, skipped",
                i + 1
            ));
            per_bump.push(
                json!({ "bump": i + 1, "b": bump.field(), "regime": "neither", "degrees": [] }),
            );
            continue;
        }
        let reports: Vec<_> = (0..directions)
            .into_par_iter()
            .map(|k| scattering_degree(bump, TAU * k as f64 / directions as f64, points))
            .collect::<Result<_, _>>()?;
        let degrees: Vec<i64> = reports.iter().map(|r| r.degree).collect();
        let consistent = degrees.iter().all(|&d| d == degrees[0]);
        pass &= consistent;
        lines.push(format!(
            "bump {} (b = {}, {}): degree {}{} over {directions} directions; glancing turns {:.3} / {:.3}",
            i + 1,
            bump.field(),
            regime_name(regime),
            degrees[0],
            if consistent { "" } else { " (inconsistent)" },
            reports[0].turn_near_lo,
            reports[0].turn_near_hi,
        ));
        per_bump.push(json!({
            "bump": i + 1,
            "b": bump.field(),
            "regime": regime_name(regime),
            "degrees": degrees,
            "consistent": consistent,
            "turn_near_lo": reports[0].turn_near_lo,
            "turn_near_hi": reports[0].turn_near_hi,
        }));
        rows.extend(reports.iter().map(|r| DegreeRow {
            bump: i + 1,
            phi: r.phi,
            degree: r.degree,
            samples: r.samples,
            max_increment: r.max_increment,
            turn_near_lo: r.turn_near_lo,
            turn_near_hi: r.turn_near_hi,
        }));
    }
    Ok(Artifacts {
        result: json!({ "points": points, "directions": directions, "bumps": per_bump }),
        csv: Some(csv_of(&rows)),
        svg: None,
        lines,
        pass,
    })
}

pub fn cone_check(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let samples = cfg.samples.unwrap_or(1000);
    let seed = cfg.seed.unwrap_or(0);
    let report = cone_invariance_check(&cfg.scene, samples, seed)?;
    let holds =
        report.evaluated > 0 && report.violations == 0 && report.max_det_error < cfg.tolerances.det;
    let mut lines = vec![format!(
        "{} of {} samples evaluated ({} skipped), min margin {:e}, {} violations, max |det - 1| {:e}",
        report.evaluated, report.requested, report.skipped, report.min_margin, report.violations, report.max_det_error
    )];
    if !report.very_strong {
        lines.push("scene is not very strong: outcome reported, not asserted".into());
    }
    let mut result = serde_json::to_value(&report).expect("serializable");
    result.as_object_mut().expect("object").remove("samples");
    result["pass"] = json!(holds);
    result["asserted"] = json!(report.very_strong);
    Ok(Artifacts {
        result,
        csv: Some(csv_of(&report.samples)),
        svg: None,
        lines,
        pass: holds || !report.very_strong,
    })
}

pub fn find_orbit(
    cfg: &RunConfig,
    word: &str,
    segment: bool,
    phi_in: Option<f64>,
    phi_out: Option<f64>,
) -> Result<Artifacts, CliError> {
    let scene = &cfg.scene;
    let kind = if segment {
        WordKind::Segment
    } else {
        WordKind::Periodic
    };
    let w = Word::parse(word, kind)?;
    if segment {
        let (Some(a), Some(b)) = (phi_in, phi_out) else {
            return Err(CliError::Usage(
                "a segment word needs --phi-in and --phi-out".into(),
            ));
        };
        let o = find_scattering_orbit(scene, &w, a, b)?;
        let pass = o.residual < cfg.tolerances.residual.max(1e-10);
        return Ok(Artifacts {
            result: json!({
                "kind": "segment",
                "word": w.to_string(),
                "incoming": o.incoming,
                "outgoing": o.outgoing,
                "residual": o.residual,
                "itinerary": one_based(&o.orbit.itinerary()),
            }),
            csv: Some(trajectory_csv(std::slice::from_ref(&o.orbit), 0.05)),
            svg: Some(render_svg(scene, std::slice::from_ref(&o.orbit), &SvgOptions::default())),
            lines: vec![format!(
                "scattering orbit {w}: incoming L = {:.12}, outgoing direction {:.12}, residual {:e}",
                o.incoming.l, o.outgoing.phi, o.residual
            )],
            pass,
        });
    }
    let opts = ShootingOptions {
        tolerance: cfg.tolerances.residual,
        ..ShootingOptions::default()
    };
    let p = find_periodic_orbit_seeded(scene, &w, &opts, cfg.seed)?;
    let m = monodromy(&p, scene)?;
    let orbit = p.orbit(scene)?;
    let states: Vec<Value> = p
        .states
        .iter()
        .map(|x| json!({ "bump": x.bump + 1, "s": x.s, "u": x.u }))
        .collect();
    Ok(Artifacts {
        result: json!({
            "kind": "periodic",
            "word": w.to_string(),
            "states": states,
            "residual": p.residual,
            "iterations": p.iterations,
            "period": orbit.end_time,
            "monodromy": m,
        }),
        csv: Some(trajectory_csv(std::slice::from_ref(&orbit), 0.05)),
        svg: Some(render_svg(
            scene,
            std::slice::from_ref(&orbit),
            &SvgOptions::default(),
        )),
        lines: vec![format!(
            "periodic orbit {w}: residual {:e} after {} iterations, trace {:.6}, det - 1 = {:e}",
            p.residual,
            p.iterations,
            m.trace,
            m.det - 1.0
        )],
        pass: p.residual < cfg.tolerances.residual,
    })
}

pub fn alpha_min(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let scene = &cfg.scene;
    let alpha = scene.alpha_min()?;
    let gaps = (0..scene.len())
        .map(|l| scene.pairwise_gap(l))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Artifacts {
        result: json!({ "alpha_min": alpha, "degrees": alpha.to_degrees(), "gaps": gaps }),
        csv: None,
        svg: None,
        lines: vec![format!(
            "alpha_min = {alpha:.12} ({:.6} deg)",
            alpha.to_degrees()
        )],
        pass: true,
    })
}

pub fn classify(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let scene = &cfg.scene;
    let regime = scene.classify()?;
    let alpha = scene.alpha_min().ok();
    let mut lines = Vec::new();
    let bumps: Vec<Value> = scene
        .bumps()
        .iter()
        .enumerate()
        .map(|(l, b)| {
            let (kmin, kmax) = b.curvature_range();
            let gap = scene.pairwise_gap(l).ok();
            let threshold = match (gap, alpha) {
                (Some(d), Some(a)) => Some(very_strong_threshold(d, a, kmax)?),
                _ => None,
            };
            let bound = match (gap, alpha) {
                (Some(d), Some(a)) => Some(1.0 / (d * a) + 2.0 * kmax),
                _ => None,
            };
            lines.push(format!(
                "bump {}: b = {}, curvature [{kmin:.6}, {kmax:.6}], {}",
                l + 1,
                b.field(),
                regime_name(regime.bumps[l])
            ));
            Ok(json!({
                "bump": l + 1,
                "b": b.field(),
                "regime": regime_name(regime.bumps[l]),
                "kappa_min": kmin,
                "kappa_max": kmax,
                "gap": gap,
                "very_strong_bound": bound,
                "threshold": threshold,
            }))
        })
        .collect::<Result<_, Error>>()?;
    lines.push(format!("very strong: {}", regime.very_strong));
    if let Some(note) = &regime.note {
        lines.push(note.clone());
    }
    Ok(Artifacts {
        result: json!({ "bumps": bumps, "alpha_min": alpha, "very_strong": regime.very_strong, "note": regime.note }),
        csv: None,
        svg: None,
        lines,
        pass: true,
    })
}

#[derive(Serialize)]
struct SweepRow {
    b: f64,
    regime: &'static str,
    degree: Option<i64>,
    very_strong: bool,
    cone_min_margin: Option<f64>,
    cone_violations: Option<usize>,
    error: Option<String>,
}

pub fn sweep(
    cfg: &RunConfig,
    bump: Option<usize>,
    from: f64,
    to: f64,
    steps: usize,
    phi: f64,
    points: usize,
) -> Result<Artifacts, CliError> {
    let scene = &cfg.scene;
    if scene.is_empty() {
        return Err(CliError::Usage("sweep needs at least one bump".into()));
    }
    if steps < 2 || points < 4 {
        return Err(CliError::Usage(
            "sweep needs --steps >= 2 and --points >= 4".into(),
        ));
    }
    let index = match bump {
        Some(k) if k >= 1 && k <= scene.len() => Some(k - 1),
        Some(k) => {
            return Err(CliError::Usage(format!(
                "--bump {k} out of range 1..={}",
                scene.len()
            )))
        }
        None => None,
    };
    let probe = index.unwrap_or(0);
    let samples = cfg.samples.unwrap_or(200);
    let seed = cfg.seed.unwrap_or(0);
    let values: Vec<f64> = (0..steps)
        .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
        .collect();
    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&b| {
            let fields: Vec<f64> = scene
                .bumps()
                .iter()
                .enumerate()
                .map(|(l, bm)| {
                    if index.is_none_or(|i| i == l) {
                        b
                    } else {
                        bm.field()
                    }
                })
                .collect();
            let mut row = SweepRow {
                b,
                regime: "neither",
                degree: None,
                very_strong: false,
                cone_min_margin: None,
                cone_violations: None,
                error: None,
            };
            let varied = match scene.with_fields(&fields) {
                Ok(s) => s,
                Err(e) => {
                    row.error = Some(e.to_string());
                    return row;
                }
            };
            let target = varied.bump(probe);
            let regime = classify_field(target);
            row.regime = regime_name(regime);
            if regime != FieldRegime::Neither {
                match scattering_degree(target, phi, points) {
                    Ok(d) => row.degree = Some(d.degree),
                    Err(e) => row.error = Some(e.to_string()),
                }
            }
            if varied.len() >= 2 {
                row.very_strong = varied.classify().map(|r| r.very_strong).unwrap_or(false);
                match cone_invariance_check(&varied, samples, seed) {
                    Ok(r) => {
                        row.cone_min_margin = Some(r.min_margin);
                        row.cone_violations = Some(r.violations);
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
            }
            row
        })
        .collect();
    let mut lines = Vec::new();
    for w in rows.windows(2) {
        if w[0].regime != w[1].regime
            || w[0].degree != w[1].degree
            || w[0].very_strong != w[1].very_strong
        {
            lines.push(format!(
                "transition between b = {} and b = {}: {} / degree {:?} / very strong {} -> {} / degree {:?} / very strong {}",
                w[0].b, w[1].b, w[0].regime, w[0].degree, w[0].very_strong, w[1].regime, w[1].degree, w[1].very_strong
            ));
        }
    }
    Ok(Artifacts {
        result: json!({
            "bump": index.map(|i| i + 1),
            "probe": probe + 1,
            "phi": phi,
            "points": points,
            "cone_samples": samples,
            "rows": rows,
        }),
        csv: Some(csv_of(&rows)),
        svg: None,
        lines,
        pass: true,
    })
}

#[derive(Serialize)]
struct CheckItem {
    name: String,
    status: &'static str,
    detail: String,
}

impl CheckItem {
    fn new(name: impl Into<String>, ok: bool, detail: String) -> Self {
        CheckItem {
            name: name.into(),
            status: if ok { "pass" } else { "fail" },
            detail,
        }
    }

    fn skipped(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckItem {
            name: name.into(),
            status: "skipped",
            detail: detail.into(),
        }
    }
}

pub fn check(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let scene = &cfg.scene;
    let tol = &cfg.tolerances;
    let seed = cfg.seed.unwrap_or(0);
    let mut items = Vec::new();
    let regime = match scene.classify() {
        Ok(r) => {
            items.push(CheckItem::new(
                "classify",
                true,
                format!("very strong: {}", r.very_strong),
            ));
            Some(r)
        }
        Err(e) => {
            items.push(CheckItem::new("classify", false, e.to_string()));
            None
        }
    };
    for (i, bump) in scene.bumps().iter().enumerate() {
        let name = format!("degree bump {}", i + 1);
        let r = classify_field(bump);
        if r == FieldRegime::Neither {
            items.push(CheckItem::skipped(name, "regime neither weak nor strong"));
            continue;
        }
        let degrees: Result<Vec<i64>, _> = (0..8)
            .map(|k| scattering_degree(bump, TAU * k as f64 / 8.0, 2000).map(|d| d.degree))
            .collect();
        items.push(match degrees {
            Ok(ds) => {
                let consistent = ds.iter().all(|&d| d == ds[0]);
                let expected = if r == FieldRegime::Weak {
                    ds[0] == 0
                } else {
                    ds[0].abs() == 1
                };
                CheckItem::new(
                    name,
                    consistent && expected,
                    format!("{} field, degrees {ds:?}", regime_name(r)),
                )
            }
            Err(e) => CheckItem::new(name, false, e.to_string()),
        });
        if r == FieldRegime::Strong {
            let name = format!("focusing bump {}", i + 1);
            items.push(
                match focusing_check(scene, i, &parallel_entries(scene, i, 0.0, 100)) {
                    Ok(f) => CheckItem::new(
                        name,
                        f.max_j < -tol.focus && f.max_jdot < -tol.focus,
                        format!("max J = {:e}, max J' = {:e}", f.max_j, f.max_jdot),
                    ),
                    Err(e) => CheckItem::new(name, false, e.to_string()),
                },
            );
        }
    }
    if scene.len() >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = cfg.samples.unwrap_or(1000).min(100);
        items.push(match agreement_sweep(scene, count, tol.fd_step, &mut rng) {
            Ok(a) => CheckItem::new(
                "linearization",
                a.max_rel_error < tol.agreement && a.max_det_error < tol.det,
                format!(
                    "{} states, max relative error {:e}, max |det - 1| {:e}",
                    a.samples.len(),
                    a.max_rel_error,
                    a.max_det_error
                ),
            ),
            Err(Error::NotFound(m)) => CheckItem::skipped("linearization", m),
            Err(e) => CheckItem::new("linearization", false, e.to_string()),
        });
    }
    match &regime {
        Some(r) if r.very_strong => {
            items.push(
                match cone_invariance_check(scene, cfg.samples.unwrap_or(1000), seed) {
                    Ok(c) => CheckItem::new(
                        "cone field",
                        c.evaluated > 0 && c.violations == 0 && c.max_det_error < tol.det,
                        format!(
                            "{} samples, min margin {:e}, {} violations",
                            c.evaluated, c.min_margin, c.violations
                        ),
                    ),
                    Err(e) => CheckItem::new("cone field", false, e.to_string()),
                },
            );
        }
        _ => items.push(CheckItem::skipped("cone field", "scene is not very strong")),
    }
    let failures: Vec<&str> = items
        .iter()
        .filter(|c| c.status == "fail")
        .map(|c| c.name.as_str())
        .collect();
    let lines = items
        .iter()
        .map(|c| format!("{:8} {}: {}", c.status.to_uppercase(), c.name, c.detail))
        .collect();
    Ok(Artifacts {
        result: json!({ "checks": items, "failures": failures }),
        csv: None,
        svg: None,
        lines,
        pass: failures.is_empty(),
    })
}
