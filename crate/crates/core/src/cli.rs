//! The `platecell` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    boundary_layer_thickness, build_representative, compare_representative, layer_profile, skin_core_decompose,
    surface_wrinkle,
};
use crate::cell::{tile_cell, CellSpec};
use crate::error::{Error, Result};
use crate::homogenization::{compute_rigidities_cached, local_stress_cached, macro_stress, StressField};
use crate::io::export::{field_from_rows, read_field_csv};
use crate::io::report::{field_file_name, similarity_csv, wrinkle_grid_csv};
use crate::io::{load_config, Format, ModeEntry, ResultBundle, RunConfig};
use crate::mesh::{generate_mesh, generate_mesh_spaced, HexMesh};
use crate::mode::{MacroMode, ModeKey, Order};
use crate::pcp::{CellSystem, CorrectorField, MaterialTable};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PLATECELL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "platecell", version, about = "Periodicity-cell analysis of inhomogeneous plates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the cell problem for every requested mode and write the stress fields.
    Solve(RunArgs),
    /// Rigidities and neutral planes from the six unit modes.
    Homogenize(RunArgs),
    /// Through-thickness profiles, boundary layers and the skin/core split.
    Profile(RunArgs),
    /// Compare three-layer representative plates with the original.
    Represent(RunArgs),
    /// Surface relief of a tiled cell.
    Wrinkle(RunArgs),
    /// Convert the CSV fields written by `solve` to `--format`.
    Export(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Element counts, e.g. `16x44x96`.
    #[arg(long, value_parser = parse_triple)]
    resolution: Option<[usize; 3]>,
    /// Unit mode `AB:NU`; repeat to request several. Replaces the configured modes.
    #[arg(long = "mode", value_name = "AB:NU")]
    modes: Vec<ModeKey>,
    /// In-plane cell copies for `wrinkle`, e.g. `2x1`.
    #[arg(long, value_parser = parse_pair)]
    tile: Option<[usize; 2]>,
    /// Deviation and informativeness threshold.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_parser = ["vtk", "csv"])]
    format: Option<String>,
}

fn parse_dims<const N: usize>(s: &str) -> std::result::Result<[usize; N], String> {
    let parts: Vec<&str> = s.split('x').collect();
    let bad = || format!("`{s}` must be {N} positive integers joined by `x`");
    if parts.len() != N {
        return Err(bad());
    }
    let mut out = [0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().ok().filter(|&v: &usize| v > 0).ok_or_else(bad)?;
    }
    Ok(out)
}

fn parse_triple(s: &str) -> std::result::Result<[usize; 3], String> {
    parse_dims::<3>(s)
}

fn parse_pair(s: &str) -> std::result::Result<[usize; 2], String> {
    parse_dims::<2>(s)
}

/// Runs one invocation and returns the process exit code: 0 on success,
/// 1 on invalid input, 2 when a solve fails.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            if text.starts_with("error:") {
                eprint!("{text}");
            } else {
                eprintln!("error: {text}");
            }
            return 1;
        }
    };
    let outcome = thread_pool().and_then(|pool| pool.install(|| dispatch(cli.command)));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                2
            } else {
                1
            }
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(v) = std::env::var_os(THREADS_ENV) {
        let n = v
            .to_str()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{}`", v.to_string_lossy()))
            })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

/// A validated configuration with the command-line overrides applied.
struct Run {
    cfg: RunConfig,
    spec: CellSpec,
    materials: MaterialTable,
    out: PathBuf,
}

impl Run {
    fn new(args: &RunArgs) -> Result<Self> {
        let mut cfg = load_config(&args.config)?;
        if let Some(r) = args.resolution {
            cfg.resolution = r;
        }
        if !args.modes.is_empty() {
            cfg.modes = args.modes.iter().map(|&mode| ModeEntry { mode, magnitude: 1.0 }).collect();
        }
        if let Some(t) = args.tile {
            cfg.analysis.tile = t;
        }
        if let Some(x) = args.threshold {
            cfg.analysis.threshold = x;
            cfg.analysis.informative_threshold = x;
        }
        if let Some(f) = &args.format {
            cfg.output.format = f.parse()?;
        }
        if let Some(o) = &args.out {
            cfg.output.directory = o.to_string_lossy().into_owned();
        }
        cfg.validate()?;
        Ok(Run {
            spec: cfg.cell_spec()?,
            materials: cfg.material_table()?,
            out: PathBuf::from(&cfg.output.directory),
            cfg,
        })
    }

    fn format(&self) -> Format {
        self.cfg.output.format
    }

    fn mesh(&self, spec: &CellSpec) -> Result<HexMesh> {
        generate_mesh(spec, self.cfg.resolution)
    }

    fn solve(&self, mesh: &HexMesh, modes: &[MacroMode]) -> Result<(Vec<CorrectorField>, Vec<StressField>)> {
        let sys = CellSystem::new(mesh, &self.materials)?;
        let correctors = sys.solve_all(modes, &self.cfg.solver_options())?;
        let fields = correctors
            .iter()
            .map(|c| local_stress_cached(c, &sys))
            .collect::<Result<Vec<_>>>()?;
        Ok((correctors, fields))
    }

    /// Writes the tables of `bundle` and the normalized configuration, then
    /// lists every file on standard output.
    fn finish(&self, bundle: &ResultBundle, mut extra: Vec<String>) -> Result<()> {
        std::fs::create_dir_all(&self.out)?;
        std::fs::write(self.out.join("config.json"), self.cfg.normalized())?;
        let mut files = vec!["config.json".to_string()];
        files.append(&mut extra);
        files.extend(bundle.write(&self.out)?);
        for f in files {
            println!("{}", self.out.join(f).display());
        }
        Ok(())
    }
}

fn diagnostics(correctors: &[CorrectorField]) -> Vec<(ModeKey, crate::pcp::SolveReport)> {
    correctors.iter().map(|c| (c.mode.key(), c.report)).collect()
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Solve(a) => solve(&Run::new(&a)?),
        Command::Homogenize(a) => homogenize(&Run::new(&a)?),
        Command::Profile(a) => profile(&Run::new(&a)?),
        Command::Represent(a) => represent(&Run::new(&a)?),
        Command::Wrinkle(a) => wrinkle(&Run::new(&a)?),
        Command::Export(a) => export(&Run::new(&a)?),
    }
}

fn solve(run: &Run) -> Result<()> {
    let mesh = run.mesh(&run.spec)?;
    let modes = run.cfg.macro_modes();
    let (correctors, fields) = run.solve(&mesh, &modes)?;
    let mut bundle = ResultBundle { diagnostics: diagnostics(&correctors), ..Default::default() };
    for (m, f) in modes.iter().zip(&fields) {
        let physical = macro_stress(&[(m.key(), m.magnitude)], std::slice::from_ref(f), run.cfg.epsilon)?;
        bundle.fields.push((m.key().to_string(), physical));
    }
    let files = bundle.write_fields(&run.out, &mesh, run.format())?;
    run.finish(&bundle, files)
}

fn homogenize(run: &Run) -> Result<()> {
    let mesh = run.mesh(&run.spec)?;
    let sys = CellSystem::new(&mesh, &run.materials)?;
    let correctors = sys.solve_all(&MacroMode::all_unit(), &run.cfg.solver_options())?;
    let bundle = ResultBundle {
        rigidities: Some(compute_rigidities_cached(&correctors, &sys)?),
        diagnostics: diagnostics(&correctors),
        ..Default::default()
    };
    run.finish(&bundle, Vec::new())
}

fn profile(run: &Run) -> Result<()> {
    let mesh = run.mesh(&run.spec)?;
    let modes = run.cfg.macro_modes();
    let (correctors, fields) = run.solve(&mesh, &modes)?;
    let a = &run.cfg.analysis;
    let mut bundle = ResultBundle { diagnostics: diagnostics(&correctors), ..Default::default() };
    let split = run.spec.structural_layers().len() >= 3;
    for (m, f) in modes.iter().zip(&fields) {
        let p = layer_profile(f, &mesh, a.pitch)?;
        bundle.boundary_layers.push((m.key(), boundary_layer_thickness(&p, a.threshold)?));
        if split {
            match skin_core_decompose(&p, &run.spec, a.threshold) {
                Ok(d) => bundle.decomposition.push((m.key(), d)),
                Err(Error::Analysis(msg)) => eprintln!("warning: mode {}: {msg}", m.key()),
                Err(e) => return Err(e),
            }
        }
        bundle.profiles.push((m.key(), p));
    }
    run.finish(&bundle, Vec::new())
}

/// Requested modes plus the membrane partner of each bending mode, which the
/// aligned representatives need.
fn with_membrane_partners(modes: &[MacroMode]) -> Vec<MacroMode> {
    let mut all = modes.to_vec();
    for m in modes {
        if m.order == Order::Bending && !all.iter().any(|x| x.pair == m.pair && x.order == Order::Membrane) {
            all.push(MacroMode::new(m.pair, Order::Membrane));
        }
    }
    all
}

fn represent(run: &Run) -> Result<()> {
    let layers = run.spec.structural_layers().len();
    if layers < 3 {
        eprintln!("warning: {layers} structural layers; a three-layer representative needs at least 3");
        std::fs::create_dir_all(&run.out)?;
        std::fs::write(run.out.join("similarity.csv"), similarity_csv(&[]))?;
        return run.finish(&ResultBundle::default(), vec!["similarity.csv".into()]);
    }
    let [n1, n2, n3] = run.cfg.resolution;
    let dz = run.spec.thickness() / n3 as f64;
    let mesh = generate_mesh_spaced(&run.spec, n1, n2, dz)?;
    let requested = run.cfg.macro_modes();
    let modes = with_membrane_partners(&requested);
    let (correctors, original) = run.solve(&mesh, &modes)?;
    let threshold = run.cfg.analysis.informative_threshold;
    let mut bundle = ResultBundle { diagnostics: diagnostics(&correctors), ..Default::default() };
    let mut extra = Vec::new();
    for &alignment in &run.cfg.analysis.alignments {
        let rep = build_representative(&run.spec, alignment)?;
        let rep_mesh = generate_mesh_spaced(&rep.spec, n1, n2, dz)?;
        let (_, rep_fields) = run.solve(&rep_mesh, &modes)?;
        let name = format!("representative_{}.json", alignment.label());
        std::fs::create_dir_all(&run.out)?;
        std::fs::write(run.out.join(&name), serde_json::to_string_pretty(&rep.spec).expect("cell serializes") + "\n")?;
        extra.push(name);
        for (i, m) in requested.iter().enumerate() {
            let field = match m.order {
                Order::Membrane => rep_fields[i].clone(),
                Order::Bending => {
                    let j = modes
                        .iter()
                        .position(|x| x.pair == m.pair && x.order == Order::Membrane)
                        .expect("membrane partner was added");
                    rep.aligned_bending(&rep_fields[i], &rep_fields[j])?
                }
            };
            let report = compare_representative(&original[i], &mesh, &rep, &field, &rep_mesh, threshold)?;
            bundle.similarity.push((m.key(), report));
        }
    }
    run.finish(&bundle, extra)
}

fn wrinkle(run: &Run) -> Result<()> {
    let [k1, k2] = run.cfg.analysis.tile;
    let [n1, n2, n3] = run.cfg.resolution;
    let tiled = tile_cell(&run.spec, k1, k2)?;
    let mesh = generate_mesh(&tiled, [n1 * k1, n2 * k2, n3])?;
    let modes = run.cfg.macro_modes();
    let (correctors, _) = run.solve(&mesh, &modes)?;
    let mut bundle = ResultBundle { diagnostics: diagnostics(&correctors), ..Default::default() };
    let mut extra = Vec::new();
    std::fs::create_dir_all(&run.out)?;
    for c in &correctors {
        for &surface in &run.cfg.analysis.surfaces {
            let w = surface_wrinkle(c, &mesh, surface, (k1, k2))?;
            let name = format!(
                "wrinkle_{}_{}.csv",
                c.mode.key().to_string().replace(':', "_"),
                surface.label()
            );
            std::fs::write(run.out.join(&name), wrinkle_grid_csv(&w, &mesh))?;
            extra.push(name);
            bundle.wrinkles.push((c.mode.key(), w));
        }
    }
    run.finish(&bundle, extra)
}

fn export(run: &Run) -> Result<()> {
    let mesh = run.mesh(&run.spec)?;
    let mut bundle = ResultBundle::default();
    for m in run.cfg.macro_modes() {
        let name = m.key().to_string();
        let source = run.out.join(field_file_name(&name, Format::Csv));
        let rows = read_field_csv(&source).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("cannot read {}: {io}; run `solve` first", source.display())),
            other => other,
        })?;
        bundle.fields.push((name, field_from_rows(&rows, &mesh)?));
    }
    for f in bundle.write_fields(&run.out, &mesh, run.format())? {
        println!("{}", Path::new(&run.out).join(f).display());
    }
    Ok(())
}
