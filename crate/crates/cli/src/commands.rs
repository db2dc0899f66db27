use crate::config::{Model, RunConfig};
use crate::output::{csv_table, num, read_signal, svg_panels, Panel};
use anyhow::{bail, Context, Result};
use fractal_onb::basis::{gen_fractal_onb, gen_walsh_basis, integer_spectrum, walsh_analyze, walsh_filters, walsh_synthesize, PiecewiseExp, StepWalsh};
use fractal_onb::cuntz::{self, CuntzRep, Function};
use fractal_onb::cycles::{find_extreme_cycles, DEFAULT_CYCLE_TOL, DEFAULT_P_MAX};
use fractal_onb::filters::{is_spectrum, QmfBasis, UnitaryMatrix, DEFAULT_GRID, UNITARY_TOL};
use fractal_onb::ifs::{index_to_word, AffineIfs};
use fractal_onb::measure::{monte_carlo, mu_hat, sample_measure, DEFAULT_FT_EPS};
use fractal_onb::verify::{gram_matrix, parseval_curve, transfer_trajectory, walsh_gram, TransferGrid, GRAM_TOL, TRANSFER_POINTS};
use fractal_onb::Complex64;
use serde_json::{json, Value};
use std::path::PathBuf;

/// Flag values after merging the config file's defaults.
pub struct Params {
    pub max_len: Option<usize>,
    pub p_max: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub probes: Option<Vec<f64>>,
    pub grid: Option<usize>,
    pub samples: Option<usize>,
    pub iters: Option<usize>,
    pub input: Option<PathBuf>,
}

pub struct Artifacts {
    pub report: Value,
    pub pass: bool,
    /// `(file stem, contents)`.
    pub csv: Option<(String, String)>,
    pub svg: Option<(String, String)>,
}

const WALSH_GRAM_TOL: f64 = 1e-12;
const ROUND_TRIP_TOL: f64 = 1e-10;
const DEFAULT_PROBES: [f64; 3] = [0.1, 0.3, 0.7];
const MAX_PLOTS: usize = 16;

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn system_json(ifs: &AffineIfs, l: &[f64]) -> Value {
    json!({ "R": ifs.scale(), "B": ifs.digits(), "L": l })
}

pub fn check_pair(config: &RunConfig, p: &Params) -> Result<Artifacts> {
    let (ifs, l) = config.pair()?;
    let check = is_spectrum(ifs.digits(), ifs.scale(), &l)?;
    let tol = p.tol.unwrap_or(UNITARY_TOL);
    let pass = check.defect <= tol;
    let integer = ifs.digits().iter().chain(&l).chain([ifs.scale()].iter()).all(|v| v.fract() == 0.0);
    let n = check.matrix.nrows();
    let matrix: Vec<Vec<[f64; 2]>> = (0..n).map(|i| (0..n).map(|j| c2(check.matrix[(i, j)])).collect()).collect();
    Ok(Artifacts {
        report: json!({
            "command": "check-pair",
            "system": system_json(&ifs, &l),
            "pass": pass,
            "defect": check.defect,
            "tol": tol,
            "hadamard_pair": integer && pass,
            "matrix": matrix,
        }),
        pass,
        csv: None,
        svg: None,
    })
}

pub fn find_cycles(config: &RunConfig, p: &Params) -> Result<Artifacts> {
    let (ifs, l) = config.pair()?;
    let p_max = p.p_max.unwrap_or(DEFAULT_P_MAX);
    let tol = p.tol.unwrap_or(DEFAULT_CYCLE_TOL);
    let cycles = find_extreme_cycles(&ifs, &l, p_max, tol)?;
    let rows = cycles.iter().enumerate().flat_map(|(ci, c)| {
        c.points
            .iter()
            .zip(&c.letters)
            .enumerate()
            .map(move |(k, (x, letter))| vec![ci.to_string(), k.to_string(), num(*x), num(*letter)])
    });
    let csv = csv_table(&["cycle", "position", "point", "letter"], rows)?;
    Ok(Artifacts {
        report: json!({
            "command": "find-cycles",
            "system": system_json(&ifs, &l),
            "cycles": cycles,
            "search": {
                "p_max": p_max,
                "tol": tol,
                "note": "every extreme cycle of period at most p_max is listed; longer periods were not searched",
            },
        }),
        pass: true,
        csv: Some(("cycles".into(), csv)),
        svg: None,
    })
}

pub fn gen_basis(config: &RunConfig, p: &Params) -> Result<Artifacts> {
    match config.model()? {
        Model::Matrix(a) => walsh_artifacts("gen-basis", &a, p),
        Model::System { spectrum: None, .. } => bail!("gen-basis needs L in the config"),
        Model::System {
            ifs,
            spectrum: Some(l),
        } => fractal_artifacts(&ifs, &l, p),
    }
}

fn fractal_artifacts(ifs: &AffineIfs, l: &[f64], p: &Params) -> Result<Artifacts> {
    let max_len = p.max_len.unwrap_or(5);
    let cycles = find_extreme_cycles(ifs, l, p.p_max.unwrap_or(DEFAULT_P_MAX), DEFAULT_CYCLE_TOL)?;
    let basis = gen_fractal_onb(ifs, l, &cycles, max_len);
    let gram = gram_matrix(ifs, &basis, DEFAULT_FT_EPS, p.tol.unwrap_or(GRAM_TOL))?;

    let probes = p.probes.clone().unwrap_or(DEFAULT_PROBES.to_vec());
    let mut diagnostics = Vec::new();
    for &t in &probes {
        let curve = parseval_curve(ifs, &basis, t, DEFAULT_FT_EPS)?;
        diagnostics.push(json!({ "t": t, "h": curve.last().map_or(0.0, |c| c.h), "curve": curve }));
    }
    let integer = integer_spectrum(ifs, l, &cycles, max_len).ok();

    let mut rows = Vec::new();
    for (k, e) in basis.iter().enumerate() {
        let prov = e.provenance().expect("generated elements carry provenance");
        let word = prov.letters.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        for (cyl, cell) in e.cells().iter().enumerate() {
            rows.push(vec![
                k.to_string(),
                word.clone(),
                num(prov.cycle_point),
                e.depth().to_string(),
                cyl.to_string(),
                num(cell.coef.re),
                num(cell.coef.im),
                num(cell.freq),
            ]);
        }
    }
    let csv = csv_table(
        &["element", "word", "cycle_point", "depth", "cylinder", "coef_re", "coef_im", "frequency"],
        rows,
    )?;

    let grid = ifs.grid(729);
    let panels: Vec<(String, Panel)> = basis
        .iter()
        .take(MAX_PLOTS)
        .map(|e| {
            let prov = e.provenance().unwrap();
            let word = prov.letters.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            let pts = grid.iter().map(|z| (z.x(), e.eval_point(ifs, z).re)).collect();
            (format!("[{word}] c={}", prov.cycle_point), Panel::Curve(pts))
        })
        .collect();
    let svg = svg_panels("Re of S_w e_{-c} on the attractor", &panels, 4);

    Ok(Artifacts {
        pass: gram.pass,
        report: json!({
            "command": "gen-basis",
            "system": system_json(ifs, l),
            "max_len": max_len,
            "elements": basis.len(),
            "cycle_points": cycles.iter().flat_map(|c| c.points.clone()).collect::<Vec<_>>(),
            "gram": gram,
            "completeness_diagnostic": {
                "note": "sum of |<e_{-t}, e>|^2 over elements with word length <= K; reported, not asserted",
                "probes": diagnostics,
            },
            "integer_frequencies": integer,
        }),
        csv: Some(("basis".into(), csv)),
        svg: Some(("basis".into(), svg)),
    })
}

pub fn walsh(config: &RunConfig, p: &Params) -> Result<Artifacts> {
    walsh_artifacts("walsh", &config.matrix()?, p)
}

fn word_label(word: &[usize]) -> String {
    if word.is_empty() {
        "1".into()
    } else {
        word.iter().map(|i| i.to_string()).collect()
    }
}

fn walsh_artifacts(command: &str, a: &UnitaryMatrix, p: &Params) -> Result<Artifacts> {
    let n = p.max_len.unwrap_or(2);
    let basis = gen_walsh_basis(a, n)?;
    let gram = walsh_gram(&basis, p.tol.unwrap_or(WALSH_GRAM_TOL));
    let refined: Vec<StepWalsh> = basis.iter().map(|g| g.refine(n)).collect();
    let mut rows = Vec::new();
    for (k, (g, r)) in basis.iter().zip(&refined).enumerate() {
        for (cell, v) in r.values().iter().enumerate() {
            rows.push(vec![
                k.to_string(),
                word_label(g.word()),
                cell.to_string(),
                num(cell as f64 / r.values().len() as f64),
                num(v.re),
                num(v.im),
            ]);
        }
    }
    let csv = csv_table(&["element", "word", "cell", "x_left", "re", "im"], rows)?;
    let panels: Vec<(String, Panel)> = basis
        .iter()
        .zip(&refined)
        .take(MAX_PLOTS.max(a.dim() * a.dim()))
        .map(|(g, r)| (format!("w = {}", word_label(g.word())), Panel::Steps(r.values().iter().map(|v| v.re).collect())))
        .collect();
    let svg = svg_panels(&format!("Walsh functions S_w 1, |w| <= {n}"), &panels, a.dim().max(2));
    Ok(Artifacts {
        pass: gram.pass,
        report: json!({
            "command": command,
            "matrix": a.to_spec(),
            "max_len": n,
            "elements": basis.len(),
            "gram": gram,
        }),
        csv: Some(("walsh".into(), csv)),
        svg: Some(("walsh".into(), svg)),
    })
}

pub fn transform(config: &RunConfig, p: &Params) -> Result<Artifacts> {
    let a = config.matrix()?;
    if !a.first_row_constant() {
        return Err(fractal_onb::Error::FirstRowNotConstant.into());
    }
    let path = p.input.as_ref().context("transform needs --input <signal.csv>")?;
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let signal: Vec<Complex64> = read_signal(&text)?.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
    let coeffs = walsh_analyze(&a, &signal)?;
    let back = walsh_synthesize(&a, &coeffs)?;
    let err = back.iter().zip(&signal).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let tol = p.tol.unwrap_or(ROUND_TRIP_TOL);
    let depth = (0..).find(|&d| a.dim().pow(d) == signal.len()).unwrap_or(0) as usize;
    let rows = coeffs.iter().zip(&back).enumerate().map(|(k, (c, r))| {
        vec![
            k.to_string(),
            word_label(&index_to_word(k, a.dim(), depth)),
            num(c.re),
            num(c.im),
            num(r.re),
            num(r.im),
        ]
    });
    let csv = csv_table(&["index", "word", "coef_re", "coef_im", "recon_re", "recon_im"], rows)?;
    Ok(Artifacts {
        pass: err <= tol,
        report: json!({
            "command": "transform",
            "length": signal.len(),
            "word_length": depth,
            "max_roundtrip_error": err,
            "tol": tol,
            "pass": err <= tol,
        }),
        csv: Some(("transform".into(), csv)),
        svg: None,
    })
}

pub fn sample(config: &RunConfig, p: &Params) -> Result<Artifacts> {
    let ifs = config.system()?;
    let count = p.samples.unwrap_or(10_000);
    if count == 0 {
        bail!("samples must be positive");
    }
    let seed = p.seed.unwrap_or(0);
    let xs = sample_measure(&ifs, count, seed);
    let mean = xs.iter().sum::<f64>() / count as f64;
    let probes: Vec<Value> = p
        .probes
        .clone()
        .unwrap_or(vec![0.5, 1.0, 2.5])
        .into_iter()
        .map(|t| {
            let exact = mu_hat(&ifs, t, DEFAULT_FT_EPS);
            let mc = monte_carlo(&ifs, count, seed, |z| Complex64::from_polar(1.0, std::f64::consts::TAU * t * z.x()));
            json!({
                "t": t,
                "mu_hat": c2(exact),
                "monte_carlo": c2(mc.value),
                "std_error": mc.std_error,
                "gap": (mc.value - exact).norm(),
            })
        })
        .collect();

    let (lo, hi) = ifs.hull();
    let bins = 243;
    let mut hist = vec![0.0; bins];
    for &x in &xs {
        let k = (((x - lo) / (hi - lo)) * bins as f64).floor().clamp(0.0, (bins - 1) as f64) as usize;
        hist[k] += bins as f64 / count as f64;
    }
    let svg = svg_panels("Sample histogram (density)", &[("mu_B".into(), Panel::Steps(hist))], 1);
    let csv = csv_table(&["index", "x"], xs.iter().enumerate().map(|(i, x)| vec![i.to_string(), num(*x)]))?;
    Ok(Artifacts {
        pass: true,
        report: json!({
            "command": "sample",
            "samples": count,
            "seed": seed,
            "mean": mean,
            "hull": [lo, hi],
            "probes": probes,
        }),
        csv: Some(("samples".into(), csv)),
        svg: Some(("samples".into(), svg)),
    })
}

pub fn verify_cuntz(config: &RunConfig, p: &Params) -> Result<Artifacts> {
    let grid_size = p.grid.unwrap_or(DEFAULT_GRID);
    let tol = p.tol.unwrap_or(1e-10);
    let (rep, tests, label) = match config.model()? {
        Model::System {
            ifs,
            spectrum: Some(l),
        } => {
            let basis = QmfBasis::exponential(&ifs, &l)?;
            let n = ifs.len();
            let tests: Vec<Function> = p
                .probes
                .clone()
                .unwrap_or(vec![0.1, 1.0, 2.7])
                .into_iter()
                .map(|t| Function::Piecewise(PiecewiseExp::exponential(n, Complex64::new(1.0, 0.0), t)))
                .collect();
            (CuntzRep::new(ifs, basis)?, tests, "exponential filters e_l, l in L")
        }
        Model::System { spectrum: None, .. } => bail!("verify-cuntz needs L or a matrix"),
        Model::Matrix(a) => {
            let n = a.dim();
            let basis = walsh_filters(&a)?;
            // rows of a seeded random unitary, read as step functions on N^2 cells
            let vectors = UnitaryMatrix::random(n * n, p.seed.unwrap_or(0));
            let tests = (0..5.min(n * n))
                .map(|r| {
                    let values = (0..n * n).map(|c| vectors.entries()[(r, c)]).collect();
                    StepWalsh::from_values(n, values).map(Function::Step)
                })
                .collect::<fractal_onb::Result<Vec<_>>>()?;
            (CuntzRep::new(AffineIfs::unit_interval(n), basis)?, tests, "Walsh step filters")
        }
    };
    let grid = rep.ifs().grid(grid_size);
    let report = cuntz::verify_cuntz(&rep, &tests, &grid, tol)?;
    Ok(Artifacts {
        pass: report.pass,
        report: json!({
            "command": "verify-cuntz",
            "representation": label,
            "report": report,
        }),
        csv: None,
        svg: None,
    })
}

pub fn transfer(config: &RunConfig, p: &Params) -> Result<Artifacts> {
    let (ifs, l) = config.pair()?;
    let iters = p.iters.unwrap_or(50);
    let ones = TransferGrid::covering(&l, ifs.scale(), TRANSFER_POINTS, |_| 1.0)?;
    let drift = transfer_trajectory(&ifs, &l, &ones, 1.max(iters.min(10)))?
        .last()
        .map_or(0.0, |h| h.distance_to_constant(1.0));
    let tol = p.tol.unwrap_or(1e-12);

    // a bump in the middle of the candidate interval
    let centre = 0.5 * (ones.a + ones.b);
    let width = 0.05 * (ones.b - ones.a);
    let h0 = TransferGrid::covering(&l, ifs.scale(), TRANSFER_POINTS, |t| 1.0 + 0.8 * (-((t - centre) / width).powi(2)).exp())?;
    let path = transfer_trajectory(&ifs, &l, &h0, iters)?;
    let distances: Vec<f64> = path.iter().map(|h| h.distance_to_constant(1.0)).collect();
    let last = path.last().expect("at least one iteration");

    let csv = csv_table(&["t", "h"], last.points().zip(&last.values).map(|(t, h)| vec![num(t), num(*h)]))?;
    let svg = svg_panels(
        "Transfer operator iteration",
        &[
            ("h after last iteration".into(), Panel::Curve(last.points().zip(last.values.iter().copied()).collect())),
            (
                "log10 sup|h - 1| per iteration".into(),
                Panel::Curve(distances.iter().enumerate().map(|(k, d)| ((k + 1) as f64, d.max(1e-300).log10())).collect()),
            ),
        ],
        2,
    );
    Ok(Artifacts {
        pass: drift <= tol,
        report: json!({
            "command": "transfer",
            "system": system_json(&ifs, &l),
            "grid": { "a": last.a, "b": last.b, "points": last.len() },
            "constant_drift": drift,
            "tol": tol,
            "iterations": iters,
            "initial_distance": h0.distance_to_constant(1.0),
            "distance_to_one": distances,
            "note": "convergence of a perturbed constant back to 1 is a completeness diagnostic, not a proof",
        }),
        csv: Some(("transfer".into(), csv)),
        svg: Some(("transfer".into(), svg)),
    })
}
