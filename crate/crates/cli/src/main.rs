//! `hirank` — command-line driver for the numerical toolkit.
//!
//! One subcommand per module operation, flat flags, reproducible
//! outputs: identical configuration and seed produce byte-identical
//! files, and every artifact embeds a 16-hex-digit hash of its semantic
//! parameters (everything except output path, format, and thread
//! count). CSV and graph files carry the hash in a `# config` comment;
//! JSON objects carry it in a `config_hash` field, since JSON has no
//! comment syntax.
//!
//! Errors leave through a machine-readable envelope on stderr,
//! `{"error":{"kind":...,"message":...}}`, with exit status 1.
//!
//! Set `HIRANK_CACHE_DIR` to cache enumerated group element tables
//! between runs; corrupt or stale cache files are ignored and rebuilt.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use hirank_core::{
    bm_small, cayley_build, cheeger_exact, dense_spectrum, embed_optimize, enumerate_group,
    epsilon_decay, expander_report, halfmass_check, holder_fit, john_check_l1_ball, kak2_forward,
    kak2_solve, mu_operator_norm, multiplicity, path_schedule, poincare_check,
    random_lipschitz_embedding, schatten_norm, schreier_build, shrink_to_half, spectral_report,
    spectrum_topk, telescoped_sum, CayleyGraph, Error, GeneratingSet, GeneratorMeasure, GroupTable,
    HolderConstants, ModMatrix, Result, SchreierAction, SpectralOperator, SphereDim,
    SphericalFunctionTable, SplitMix64, CHEEGER_EXACT_CAP,
};

#[derive(Parser)]
#[command(
    name = "hirank",
    version,
    about = "Spherical-function tables, Schatten norms, Weyl-path certificates, \
             congruence expander graphs, and Poincare embedding obstructions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; each command has a natural default.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// Thread count for data-parallel sections (0 = automatic).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ActionArg {
    /// Projective space: lines through the origin (prime modulus only).
    Projective,
    /// All nonzero vectors of the module.
    Vectors,
}

#[derive(Subcommand)]
enum Command {
    /// Table of spherical-function values phi_k(x) with certified errors.
    Phi {
        /// Ambient dimension of the sphere S^{n-1} (n >= 3).
        #[arg(long)]
        n: u32,
        /// Largest degree k in the table.
        #[arg(long)]
        kmax: u32,
        /// Number of equispaced evaluation points in [-1, 1].
        #[arg(long)]
        grid: usize,
        /// Cross-check tolerance for the quadrature backend.
        #[arg(long, default_value_t = 1e-10)]
        quad_tol: f64,
    },
    /// Schatten norm of the sphere-averaging operator difference.
    Schatten {
        #[arg(long)]
        n: u32,
        /// Height parameter of the averaging circle, in [-1, 1].
        #[arg(long)]
        delta: f64,
        /// Schatten exponent; must exceed the convergence threshold.
        #[arg(long)]
        p: f64,
        /// Bound demanded of the certified tail.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Fit Holder constants (C_p, alpha_p) for the operator-difference norm.
    HolderFit {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        /// Equispaced grid size on [-1/2, 1/2].
        #[arg(long, default_value_t = 25)]
        grid_points: usize,
    },
    /// 2x2 rotation-diagonal-rotation decomposition: single solve or batch certificate.
    Kak {
        /// Larger input exponent (single mode, with --t and --theta).
        #[arg(long)]
        s: Option<f64>,
        /// Smaller input exponent (single mode).
        #[arg(long)]
        t: Option<f64>,
        /// Rotation angle in [0, pi/2] (single mode).
        #[arg(long)]
        theta: Option<f64>,
        /// Batch mode: number of random admissible instances to verify.
        #[arg(long)]
        batch: Option<u64>,
        /// Seed for batch sampling.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Decay-certificate table: raw schedule sums against the closed form.
    Epsilon {
        /// Dimensions, comma separated (each >= 3).
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
        /// Schatten exponent the constants refer to.
        #[arg(long)]
        p: f64,
        /// Holder constant C_p (>= 2).
        #[arg(long)]
        c: f64,
        /// Holder exponent alpha_p in (0, 1).
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        tmin: f64,
        #[arg(long, default_value_t = 20.0)]
        tmax: f64,
        /// Number of t values, equispaced inclusive.
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Build the Cayley graph of SL(n, Z/qZ) with elementary generators.
    Cayley {
        /// Matrix size (2 or 3 are practical).
        #[arg(long)]
        n: usize,
        /// Modulus.
        #[arg(long)]
        q: u32,
    },
    /// Build a Schreier graph of the elementary-generator action.
    Schreier {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u32,
        #[arg(long, value_enum)]
        action: ActionArg,
    },
    /// Leading eigenvalues of the normalized adjacency, with residuals.
    Spectrum {
        /// Graph file produced by `cayley` or `schreier`.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Build SL(n, Z/qZ) internally instead of reading a file.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        q: Option<u32>,
        /// How many eigenvalues from the top.
        #[arg(long, default_value_t = 6)]
        k: usize,
        /// Residual tolerance per eigenpair.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Use the dense solver (all eigenvalues, no residual column).
        #[arg(long)]
        dense: bool,
    },
    /// Spectral report: gap, Cheeger bounds, exact constant when feasible.
    Cheeger {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Uniform-gap report over a family of congruence Cayley graphs.
    ExpanderReport {
        #[arg(long)]
        n: usize,
        /// Moduli, comma separated, sizes increasing.
        #[arg(long, value_delimiter = ',')]
        q: Vec<u32>,
        /// Gap threshold the family is tested against.
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Poincare and half-mass checks on random Lipschitz embeddings.
    Poincare {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u32,
        /// Dimension of the Euclidean target.
        #[arg(long, default_value_t = 8)]
        dim: usize,
        /// Number of random embeddings to test.
        #[arg(long, default_value_t = 100)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Square the uniform measure until its operator norm is <= 1/2.
        #[arg(long)]
        shrink: bool,
        /// Cap on the number of squarings when shrinking.
        #[arg(long, default_value_t = hirank_core::MAX_SQUARINGS)]
        max_squarings: usize,
    },
    /// Search for a low-distortion embedding of the graph metric into l^p.
    Embed {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        q: Option<u32>,
        /// Target norm exponent (finite, >= 1).
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Target dimension (1..=64).
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// Optimizer iterations.
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Include the vertex coordinates in the JSON output.
        #[arg(long)]
        coords: bool,
    },
    /// Distance from l^1_d to Euclidean space with the John certificate.
    Banach {
        /// Dimension (1, 2, or 3).
        #[arg(long)]
        d: usize,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return;
        }
        Err(e) => {
            emit_error("argument", e.to_string().trim_end());
            std::process::exit(1);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            emit_error("internal", &format!("could not size the thread pool: {e}"));
            std::process::exit(1);
        }
    }
    let out = cli.out.clone();
    match run(cli) {
        Ok(artifact) => {
            if let Err(e) = deliver(&artifact, out.as_deref()) {
                emit_error(e.kind(), &e.to_string());
                std::process::exit(1);
            }
        }
        Err(e) => {
            emit_error(e.kind(), &e.to_string());
            std::process::exit(1);
        }
    }
}

fn emit_error(kind: &str, message: &str) {
    eprintln!(
        "{}",
        json!({ "error": { "kind": kind, "message": message } })
    );
}

fn deliver(artifact: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, artifact)?,
        None => print!("{artifact}"),
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<serde_json::Value> {
    serde_json::to_value(value).map_err(|e| Error::Internal(format!("JSON encoding failed: {e}")))
}

/// First 16 hex digits of the SHA-256 of the canonical parameter string.
/// Output path, format, and thread count are deliberately excluded: the
/// hash identifies the computation, not the packaging.
fn config_hash(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in &digest[..8] {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

fn format_or(format: Option<OutFormat>, default: OutFormat) -> OutFormat {
    format.unwrap_or(default)
}

/// JSON envelope shared by all JSON artifacts.
fn json_artifact(hash: &str, command: &str, result: serde_json::Value) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("config_hash".into(), json!(hash));
    doc.insert("command".into(), json!(command));
    doc.insert("result".into(), result);
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(doc))
        .expect("JSON serialization of plain data cannot fail");
    text.push('\n');
    text
}

fn run(cli: Cli) -> Result<String> {
    let format = cli.format;
    match cli.command {
        Command::Phi {
            n,
            kmax,
            grid,
            quad_tol,
        } => cmd_phi(n, kmax, grid, quad_tol, format),
        Command::Schatten { n, delta, p, tol } => cmd_schatten(n, delta, p, tol, format),
        Command::HolderFit { n, p, grid_points } => cmd_holder_fit(n, p, grid_points, format),
        Command::Kak {
            s,
            t,
            theta,
            batch,
            seed,
        } => cmd_kak(s, t, theta, batch, seed, format),
        Command::Epsilon {
            n,
            p,
            c,
            alpha,
            tmin,
            tmax,
            steps,
        } => cmd_epsilon(&n, p, c, alpha, tmin, tmax, steps, format),
        Command::Cayley { n, q } => cmd_cayley(n, q, format),
        Command::Schreier { n, q, action } => cmd_schreier(n, q, action, format),
        Command::Spectrum {
            graph,
            n,
            q,
            k,
            tol,
            dense,
        } => cmd_spectrum(graph.as_deref(), n, q, k, tol, dense, format),
        Command::Cheeger { graph, n, q, tol } => cmd_cheeger(graph.as_deref(), n, q, tol, format),
        Command::ExpanderReport { n, q, epsilon, tol } => {
            cmd_expander_report(n, &q, epsilon, tol, format)
        }
        Command::Poincare {
            n,
            q,
            dim,
            samples,
            seed,
            shrink,
            max_squarings,
        } => cmd_poincare(n, q, dim, samples, seed, shrink, max_squarings, format),
        Command::Embed {
            graph,
            n,
            q,
            p,
            dim,
            iters,
            seed,
            coords,
        } => cmd_embed(graph.as_deref(), n, q, p, dim, iters, seed, coords, format),
        Command::Banach { d } => cmd_banach(d, format),
    }
}

// ---------------------------------------------------------------------------
// spherical functions

fn equispaced(count: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Argument("grid must have at least one point".into()));
    }
    if count == 1 {
        return Ok(vec![0.5 * (lo + hi)]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

fn cmd_phi(
    n: u32,
    kmax: u32,
    grid: usize,
    quad_tol: f64,
    format: Option<OutFormat>,
) -> Result<String> {
    let hash = config_hash(&format!(
        "phi n={n} kmax={kmax} grid={grid} quad-tol={quad_tol}"
    ));
    let dim = SphereDim::new(n)?;
    let xs = equispaced(grid, -1.0, 1.0)?;
    let table = SphericalFunctionTable::build(dim, kmax, &xs, quad_tol)?;
    match format_or(format, OutFormat::Csv) {
        OutFormat::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf, &[format!("config {hash}")])?;
            String::from_utf8(buf).map_err(|e| Error::Internal(format!("CSV must be UTF-8: {e}")))
        }
        OutFormat::Json => {
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|r| json!({ "k": r.k, "x": r.x, "value": r.value, "abs_error": r.abs_error }))
                .collect();
            let multiplicities: Vec<u64> = (0..=kmax)
                .map(|k| multiplicity(dim, k))
                .collect::<Result<_>>()?;
            Ok(json_artifact(
                &hash,
                "phi",
                json!({
                    "n": table.n,
                    "normalization": table.c_n,
                    "k_max": table.k_max,
                    "x_grid": table.x_grid,
                    "multiplicities": multiplicities,
                    "rows": rows,
                }),
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Schatten norms and Holder fits

fn require_json(format: Option<OutFormat>, command: &str) -> Result<()> {
    if format == Some(OutFormat::Csv) {
        return Err(Error::Argument(format!("{command} emits JSON only")));
    }
    Ok(())
}

fn cmd_schatten(n: u32, delta: f64, p: f64, tol: f64, format: Option<OutFormat>) -> Result<String> {
    require_json(format, "schatten")?;
    let hash = config_hash(&format!("schatten n={n} delta={delta} p={p} tol={tol}"));
    let dim = SphereDim::new(n)?;
    let op = SpectralOperator::new(dim, delta)?;
    let result = schatten_norm(op, p, tol)?;
    Ok(json_artifact(
        &hash,
        "schatten",
        json!({
            "n": n,
            "delta": delta,
            "p": result.p,
            "partial": result.partial,
            "tail_bound": result.tail_bound,
            "k_used": result.k_used,
            "norm_low": result.norm_low(),
            "norm_high": result.norm_high(),
        }),
    ))
}

fn cmd_holder_fit(n: u32, p: f64, grid_points: usize, format: Option<OutFormat>) -> Result<String> {
    require_json(format, "holder-fit")?;
    let hash = config_hash(&format!("holder-fit n={n} p={p} grid-points={grid_points}"));
    let dim = SphereDim::new(n)?;
    let grid = equispaced(grid_points, -0.5, 0.5)?;
    let fit = holder_fit(dim, p, &grid)?;
    Ok(json_artifact(&hash, "holder-fit", to_json(&fit)?))
}

// ---------------------------------------------------------------------------
// Weyl-path decompositions and decay certificates

#[allow(clippy::too_many_arguments)]
fn cmd_kak(
    s: Option<f64>,
    t: Option<f64>,
    theta: Option<f64>,
    batch: Option<u64>,
    seed: u64,
    format: Option<OutFormat>,
) -> Result<String> {
    require_json(format, "kak")?;
    match (s, t, theta, batch) {
        (Some(s), Some(t), Some(theta), None) => {
            let hash = config_hash(&format!("kak s={s} t={t} theta={theta}"));
            let (v, u) = kak2_forward(s, t, theta)?;
            let theta_back = kak2_solve(v, u, s, t)?;
            let (v2, u2) = kak2_forward(s, t, theta_back)?;
            let round_trip_error = (v2 - v).abs().max((u2 - u).abs());
            Ok(json_artifact(
                &hash,
                "kak",
                json!({
                    "s": s, "t": t, "theta": theta,
                    "v": v, "u": u,
                    "theta_recovered": theta_back,
                    "round_trip_error": round_trip_error,
                    "cos_bound": (t - u).exp(),
                }),
            ))
        }
        (None, None, None, Some(count)) => {
            let hash = config_hash(&format!("kak batch={count} seed={seed}"));
            let mut rng = SplitMix64::new(seed);
            let mut max_round_trip = 0.0f64;
            let mut max_cos_excess = f64::NEG_INFINITY;
            for _ in 0..count {
                let t = rng.uniform(-3.0, 3.0);
                let s = t + rng.uniform(1e-6, 6.0);
                let u = t + rng.uniform(0.0, 1.0) * 0.5 * (s - t);
                let v = s + t - u;
                let theta = kak2_solve(v, u, s, t)?;
                let (x, y) = kak2_forward(s, t, theta)?;
                max_round_trip = max_round_trip.max((x - v).abs()).max((y - u).abs());
                max_cos_excess = max_cos_excess.max(theta.cos() - (t - u).exp());
            }
            Ok(json_artifact(
                &hash,
                "kak",
                json!({
                    "batch": count,
                    "seed": seed,
                    "max_round_trip_error": max_round_trip,
                    "max_cos_excess": max_cos_excess,
                    "round_trip_ok": max_round_trip <= 1e-9,
                    "cos_bound_ok": max_cos_excess <= 1e-12,
                }),
            ))
        }
        _ => Err(Error::Argument(
            "kak needs either --s --t --theta (single) or --batch (random certificate)".into(),
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_epsilon(
    ns: &[u32],
    p: f64,
    c: f64,
    alpha: f64,
    tmin: f64,
    tmax: f64,
    steps: usize,
    format: Option<OutFormat>,
) -> Result<String> {
    if ns.is_empty() {
        return Err(Error::Argument("need at least one dimension in --n".into()));
    }
    let n_list = ns
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let hash = config_hash(&format!(
        "epsilon n={n_list} p={p} c={c} alpha={alpha} tmin={tmin} tmax={tmax} steps={steps}"
    ));
    if !(tmin > 0.0 && tmax >= tmin) {
        return Err(Error::Argument(format!(
            "need 0 < tmin <= tmax, got tmin={tmin}, tmax={tmax}"
        )));
    }
    let ts = equispaced(steps, tmin, tmax)?;
    #[derive(serde::Serialize)]
    struct Row {
        n: u32,
        t: f64,
        n_steps: usize,
        raw_sum: f64,
        epsilon: f64,
    }
    let mut rows = Vec::new();
    for &n in ns {
        // The constants are per-exponent, not per-dimension; the sphere
        // dimension only enters through the schedule and prefactors.
        let holder = HolderConstants::from_parts(SphereDim::new(n)?, p, c, alpha)?;
        for &t in &ts {
            let schedule = path_schedule(n, t, 2.0 * t)?;
            rows.push(Row {
                n,
                t,
                n_steps: schedule.n_steps,
                raw_sum: telescoped_sum(n, &holder, t, 2.0 * t)?,
                epsilon: epsilon_decay(n, &holder, t)?,
            });
        }
    }
    match format_or(format, OutFormat::Csv) {
        OutFormat::Csv => {
            let mut out = format!("# config {hash}\n");
            out.push_str("n,t,n_steps,raw_sum_to_2t,epsilon\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n, r.t, r.n_steps, r.raw_sum, r.epsilon
                );
            }
            Ok(out)
        }
        OutFormat::Json => Ok(json_artifact(
            &hash,
            "epsilon",
            json!({ "p": p, "c": c, "alpha": alpha, "rows": rows }),
        )),
    }
}

// ---------------------------------------------------------------------------
// graph construction, with optional on-disk group cache

/// Enumerates SL(n, Z/qZ) with the elementary generators, consulting the
/// `HIRANK_CACHE_DIR` table cache when the variable is set. Unreadable
/// or inconsistent cache files are ignored and overwritten.
fn elementary_group(n: usize, q: u32) -> Result<(GroupTable, GeneratingSet)> {
    // The unitriangular matrices alone number q^(n(n-1)/2), a cheap
    // provable lower bound on the group order; refuse before the
    // breadth-first search burns hours approaching its cap.
    let mut lower_bound = 1u128;
    for _ in 0..n * (n - 1) / 2 {
        lower_bound = lower_bound.saturating_mul(u128::from(q.max(2)));
    }
    if lower_bound > hirank_core::ENUMERATION_CAP as u128 {
        return Err(Error::Resource(format!(
            "SL({n}, Z/{q}Z) has at least {lower_bound} elements, beyond the enumeration cap \
             of {}",
            hirank_core::ENUMERATION_CAP
        )));
    }
    let gens = GeneratingSet::elementary(n, q)?;
    let cache = std::env::var_os("HIRANK_CACHE_DIR").map(|dir| {
        Path::new(&dir).join(format!("sl-n{n}-q{q}-{label}.table", label = gens.label()))
    });
    if let Some(path) = &cache {
        if let Some(table) = load_table(path, n, q) {
            return Ok((table, gens));
        }
    }
    let table = enumerate_group(&gens, None)?;
    if let Some(path) = &cache {
        store_table(path, &table);
    }
    Ok((table, gens))
}

fn load_table(path: &Path, n: usize, q: u32) -> Option<GroupTable> {
    let text = std::fs::read_to_string(path).ok()?;
    let mut lines = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let mut header = lines.next()?.split_whitespace();
    let (hn, hq, count): (usize, u32, usize) = (
        header.next()?.parse().ok()?,
        header.next()?.parse().ok()?,
        header.next()?.parse().ok()?,
    );
    if hn != n || hq != q {
        return None;
    }
    let mut elements = Vec::with_capacity(count);
    for line in lines {
        let entries: Vec<u32> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .ok()?;
        elements.push(ModMatrix::new(n, q, entries).ok()?);
    }
    if elements.len() != count {
        return None;
    }
    GroupTable::from_elements(elements).ok()
}

/// Best-effort cache write: a temp-file rename keeps partially written
/// tables from ever being visible, and failures are silently dropped
/// (the cache is an optimization, never a correctness dependency).
fn store_table(path: &Path, table: &GroupTable) {
    let mut text = format!("{} {} {}\n", table.n(), table.q(), table.len());
    for m in table.elements() {
        let row: Vec<String> = m.entries().iter().map(u32::to_string).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    if let Some(parent) = path.parent() {
        if std::fs::create_dir_all(parent).is_err() {
            return;
        }
    }
    let tmp = path.with_extension("tmp");
    if std::fs::write(&tmp, text).is_ok() {
        let _ = std::fs::rename(&tmp, path);
    }
}

fn no_format_for_graph_files(format: Option<OutFormat>, command: &str) -> Result<()> {
    if format.is_some() {
        return Err(Error::Argument(format!(
            "{command} writes the fixed graph file format; --format does not apply"
        )));
    }
    Ok(())
}

fn cmd_cayley(n: usize, q: u32, format: Option<OutFormat>) -> Result<String> {
    no_format_for_graph_files(format, "cayley")?;
    let hash = config_hash(&format!("cayley n={n} q={q} gens=elem"));
    let (table, gens) = elementary_group(n, q)?;
    let graph = cayley_build(&table, &gens)?;
    Ok(format!("# config {hash}\n{}", graph.to_file_string()))
}

fn cmd_schreier(n: usize, q: u32, action: ActionArg, format: Option<OutFormat>) -> Result<String> {
    no_format_for_graph_files(format, "schreier")?;
    let (action_name, action) = match action {
        ActionArg::Projective => ("projective", SchreierAction::ProjectiveSpace),
        ActionArg::Vectors => ("vectors", SchreierAction::NonzeroVectors),
    };
    let hash = config_hash(&format!(
        "schreier n={n} q={q} action={action_name} gens=elem"
    ));
    let gens = GeneratingSet::elementary(n, q)?;
    let graph = schreier_build(&gens, action)?;
    Ok(format!("# config {hash}\n{}", graph.to_file_string()))
}

/// Shared graph source for spectrum/cheeger/embed: an explicit file, or
/// an internally built elementary Cayley graph.
fn resolve_graph(graph: Option<&Path>, n: Option<usize>, q: Option<u32>) -> Result<CayleyGraph> {
    match (graph, n, q) {
        (Some(path), None, None) => CayleyGraph::read_graph_file(path),
        (None, Some(n), Some(q)) => {
            let (table, gens) = elementary_group(n, q)?;
            cayley_build(&table, &gens)
        }
        _ => Err(Error::Argument(
            "pass either --graph FILE or both --n and --q".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// spectra and expansion

#[allow(clippy::too_many_arguments)]
fn cmd_spectrum(
    graph: Option<&Path>,
    n: Option<usize>,
    q: Option<u32>,
    k: usize,
    tol: f64,
    dense: bool,
    format: Option<OutFormat>,
) -> Result<String> {
    let g = resolve_graph(graph, n, q)?;
    let hash = config_hash(&format!(
        "spectrum graph={} k={k} tol={tol} dense={dense}",
        g.graph_id()
    ));
    // (value, residual); the dense path has no per-pair residual.
    let rows: Vec<(f64, Option<f64>)> = if dense {
        dense_spectrum(&g)?
            .into_iter()
            .take(k)
            .map(|v| (v, None))
            .collect()
    } else {
        spectrum_topk(&g, k.min(g.n_vertices()), tol)?
            .into_iter()
            .map(|e| (e.value, Some(e.residual)))
            .collect()
    };
    match format_or(format, OutFormat::Csv) {
        OutFormat::Csv => {
            let mut out = format!("# config {hash}\n# graph {}\n", g.graph_id());
            out.push_str("index,value,residual\n");
            for (i, (value, residual)) in rows.iter().enumerate() {
                match residual {
                    Some(r) => {
                        let _ = writeln!(out, "{i},{value},{r}");
                    }
                    None => {
                        let _ = writeln!(out, "{i},{value},");
                    }
                }
            }
            Ok(out)
        }
        OutFormat::Json => {
            let values: Vec<serde_json::Value> = rows
                .iter()
                .enumerate()
                .map(|(i, (value, residual))| json!({"index": i, "value": value, "residual": residual}))
                .collect();
            Ok(json_artifact(
                &hash,
                "spectrum",
                json!({
                    "graph_id": g.graph_id(),
                    "n_vertices": g.n_vertices(),
                    "degree": g.degree(),
                    "eigenvalues": values,
                }),
            ))
        }
    }
}

fn cmd_cheeger(
    graph: Option<&Path>,
    n: Option<usize>,
    q: Option<u32>,
    tol: f64,
    format: Option<OutFormat>,
) -> Result<String> {
    require_json(format, "cheeger")?;
    let g = resolve_graph(graph, n, q)?;
    let hash = config_hash(&format!("cheeger graph={} tol={tol}", g.graph_id()));
    let report = spectral_report(&g, tol)?;
    let mut doc = to_json(&report)?;
    if let serde_json::Value::Object(map) = &mut doc {
        map.insert("exact_cap".into(), json!(CHEEGER_EXACT_CAP));
        if report.h_exact.is_none() && g.n_vertices() <= CHEEGER_EXACT_CAP {
            // Unreachable by construction; keep the shape honest anyway.
            map.insert("h_exact".into(), json!(cheeger_exact(&g)?));
        }
    }
    Ok(json_artifact(&hash, "cheeger", doc))
}

fn cmd_expander_report(
    n: usize,
    qs: &[u32],
    epsilon: f64,
    tol: f64,
    format: Option<OutFormat>,
) -> Result<String> {
    if qs.is_empty() {
        return Err(Error::Argument("need at least one modulus in --q".into()));
    }
    let q_list = qs
        .iter()
        .map(|q| q.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let hash = config_hash(&format!(
        "expander-report n={n} q={q_list} epsilon={epsilon} tol={tol}"
    ));
    let mut graphs = Vec::with_capacity(qs.len());
    for &q in qs {
        let (table, gens) = elementary_group(n, q)?;
        graphs.push(cayley_build(&table, &gens)?);
    }
    let family = expander_report(&graphs, epsilon, tol)?;
    match format_or(format, OutFormat::Csv) {
        OutFormat::Csv => {
            let mut out = format!("# config {hash}\n");
            out.push_str(hirank_core::SpectralReport::csv_header());
            out.push('\n');
            for report in &family.reports {
                out.push_str(&report.csv_row());
                out.push('\n');
            }
            let _ = writeln!(out, "# shared_degree {}", family.shared_degree);
            let _ = writeln!(out, "# min_spectral_gap {}", family.min_spectral_gap);
            let _ = writeln!(out, "# min_cheeger_lower {}", family.min_cheeger_lower);
            let _ = writeln!(out, "# epsilon {}", family.epsilon);
            let _ = writeln!(
                out,
                "# uniform_above_epsilon {}",
                family.uniform_above_epsilon
            );
            let _ = writeln!(
                out,
                "# sizes_strictly_increasing {}",
                family.sizes_strictly_increasing
            );
            Ok(out)
        }
        OutFormat::Json => Ok(json_artifact(&hash, "expander-report", to_json(&family)?)),
    }
}

// ---------------------------------------------------------------------------
// Poincare harness and embedding search

#[allow(clippy::too_many_arguments)]
fn cmd_poincare(
    n: usize,
    q: u32,
    dim: usize,
    samples: u64,
    seed: u64,
    shrink: bool,
    max_squarings: usize,
    format: Option<OutFormat>,
) -> Result<String> {
    let hash = config_hash(&format!(
        "poincare n={n} q={q} dim={dim} samples={samples} seed={seed} shrink={shrink} \
         max-squarings={max_squarings}"
    ));
    let (table, gens) = elementary_group(n, q)?;
    let graph = cayley_build(&table, &gens)?;
    let uniform = GeneratorMeasure::uniform(graph.degree())?;
    let mu = if shrink {
        shrink_to_half(&graph, &uniform, max_squarings)?
    } else {
        uniform
    };
    let mu_norm = mu_operator_norm(&graph, &mu)?;
    #[derive(serde::Serialize)]
    struct Row {
        sample: u64,
        lhs: f64,
        rhs: f64,
        holds: bool,
        fraction: f64,
    }
    let mut rows = Vec::with_capacity(samples as usize);
    let mut threshold = 0.0;
    for sample in 0..samples {
        let f = random_lipschitz_embedding(&graph, dim, seed.wrapping_add(sample))?;
        let pc = poincare_check(&graph, &f, &mu)?;
        let hm = halfmass_check(&graph, &f, &mu, None)?;
        threshold = hm.threshold;
        rows.push(Row {
            sample,
            lhs: pc.lhs,
            rhs: pc.rhs,
            holds: pc.holds,
            fraction: hm.fraction,
        });
    }
    let all_hold = rows.iter().all(|r| r.holds);
    let min_fraction = rows
        .iter()
        .map(|r| r.fraction)
        .fold(f64::INFINITY, f64::min);
    match format_or(format, OutFormat::Csv) {
        OutFormat::Csv => {
            let mut out = format!("# config {hash}\n# graph {}\n", graph.graph_id());
            let _ = writeln!(out, "# mu_norm {mu_norm}");
            let _ = writeln!(out, "# word_length {}", mu.max_word_length());
            let _ = writeln!(out, "# threshold {threshold}");
            out.push_str("sample,lhs,rhs,holds,halfmass_fraction\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.sample, r.lhs, r.rhs, r.holds, r.fraction
                );
            }
            let _ = writeln!(out, "# all_hold {all_hold}");
            let _ = writeln!(out, "# min_fraction {min_fraction}");
            Ok(out)
        }
        OutFormat::Json => Ok(json_artifact(
            &hash,
            "poincare",
            json!({
                "graph_id": graph.graph_id(),
                "mu_norm": mu_norm,
                "word_length": mu.max_word_length(),
                "threshold": threshold,
                "samples": rows,
                "all_hold": all_hold,
                "min_fraction": min_fraction,
            }),
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_embed(
    graph: Option<&Path>,
    n: Option<usize>,
    q: Option<u32>,
    p: f64,
    dim: usize,
    iters: usize,
    seed: u64,
    coords: bool,
    format: Option<OutFormat>,
) -> Result<String> {
    require_json(format, "embed")?;
    let g = resolve_graph(graph, n, q)?;
    let hash = config_hash(&format!(
        "embed graph={} p={p} dim={dim} iters={iters} seed={seed} coords={coords}",
        g.graph_id()
    ));
    let result = embed_optimize(&g, p, dim, iters, seed)?;
    let mut doc = json!({
        "graph_id": g.graph_id(),
        "p": p,
        "dim": dim,
        "distortion": result.distortion,
        "initial_distortion": result.initial_distortion,
        "iterations_run": result.iterations_run,
        "restarts": result.restarts,
    });
    if coords {
        let table: Vec<&[f64]> = (0..g.n_vertices())
            .map(|v| result.embedding.coords(v))
            .collect();
        doc["coordinates"] = json!(table);
    }
    Ok(json_artifact(&hash, "embed", doc))
}

fn cmd_banach(d: usize, format: Option<OutFormat>) -> Result<String> {
    require_json(format, "banach")?;
    let hash = config_hash(&format!("banach d={d}"));
    let distance = bm_small(d)?;
    let mut doc = json!({ "d": d, "distance": distance });
    if d == 2 || d == 3 {
        let check = john_check_l1_ball(d, 1e-12)?;
        doc["john_check"] = to_json(&check)?;
    }
    Ok(json_artifact(&hash, "banach", doc))
}
