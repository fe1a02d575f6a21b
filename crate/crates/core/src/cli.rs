//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid or rejected input,
//! 3 verification found disagreements.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::arrangement::{arrangement_stats, build_neighbor_table, validate_general_position};
use crate::error::{Error, Result};
use crate::freespace::compute_freespace;
use crate::geom::Point2;
use crate::io::{grid_json, parse_scene, to_text};
use crate::polygonal::two_contact_tracings;
use crate::render::{render_svg, Drawing};
use crate::scene::{Footholds, Scene};
use crate::stability::{grid_sample_freespace, Bbox};
use crate::verify::{oracle_bbox, run_verify, verify_scene, VerifyOptions, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DISAGREE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "spider-freespace", version, about = "Free space of a spider robot over point or polygonal footholds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact free-space boundary of a point scene, as JSON.
    Compute(Common),
    /// Occupancy grid of the free space, as JSON.
    Sample(Sampled),
    /// 2-contact tracing curves of a polygonal scene, as JSON.
    Curves(Common),
    /// SVG drawing of the scene and its free space.
    Render(Sampled),
    /// Compare the computed boundary with the stability predicate.
    Verify(VerifyArgs),
    /// Size of the circle arrangement, as JSON.
    Stats(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    scene: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative tolerance of the predicates.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args, Debug)]
struct Sampled {
    #[command(flatten)]
    common: Common,
    /// x0,y0,x1,y1; defaults to the scene bounds inflated by R.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_bbox)]
    bbox: Option<Bbox>,
    /// NX,NY.
    #[arg(long, value_parser = parse_res)]
    res: Option<(usize, usize)>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Check this scene instead of random ones.
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_res, default_value = "200,200")]
    res: (usize, usize),
    /// Samples closer than this to the boundary are not compared; defaults
    /// to two cell diagonals.
    #[arg(long)]
    band: Option<f64>,
    /// Number of random scenes.
    #[arg(long, default_value_t = 1)]
    scenes: usize,
    /// Footholds per random scene, drawn from MIN..=MAX.
    #[arg(long, default_value_t = 8)]
    n_min: usize,
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Include wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

fn floats(s: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated values"));
    }
    Ok(v)
}

fn parse_bbox(s: &str) -> std::result::Result<Bbox, String> {
    let v = floats(s, 4)?;
    Bbox::new(Point2::new(v[0], v[1]), Point2::new(v[2], v[3])).map_err(|e| e.to_string())
}

fn parse_res(s: &str) -> std::result::Result<(usize, usize), String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [nx, ny] if nx >= 2 && ny >= 2 => Ok((nx, ny)),
        [_, _] => Err("resolution must be at least 2,2".into()),
        _ => Err("expected NX,NY".into()),
    }
}

fn load(common: &Common) -> Result<Scene> {
    let scene = parse_scene(&common.scene)?;
    Ok(match common.eps {
        Some(e) if e > 0.0 && e.is_finite() => scene.with_eps(e),
        Some(e) => return Err(Error::Usage(format!("--eps must be positive, got {e}"))),
        None => scene,
    })
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Io(_) | Error::Resolution(..) | Error::DegenerateBbox => EXIT_USAGE,
        _ => EXIT_INVALID,
    }
}

/// Parse `args` (including the program name) and run one command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Compute(c) => {
            let scene = load(&c)?;
            scene.require_points()?;
            let fs = compute_freespace(&scene)?;
            emit(&c.out, &to_text(&fs.to_json()), stdout)?;
        }
        Command::Sample(s) => {
            let scene = load(&s.common)?;
            let bbox = s.bbox.map_or_else(|| Bbox::around_scene(&scene, scene.reach), Ok)?;
            let (nx, ny) = s.res.unwrap_or((200, 200));
            let g = grid_sample_freespace(&scene, bbox, nx, ny)?;
            emit(&s.common.out, &to_text(&grid_json(&g)), stdout)?;
        }
        Command::Curves(c) => {
            let scene = load(&c)?;
            let tr = two_contact_tracings(&scene)?;
            emit(&c.out, &to_text(&tr.to_json()), stdout)?;
        }
        Command::Render(s) => {
            let scene = load(&s.common)?;
            let bbox = s.bbox.map_or_else(|| Bbox::around_scene(&scene, scene.reach), Ok)?;
            let grid = s.res.map(|(nx, ny)| grid_sample_freespace(&scene, bbox, nx, ny)).transpose()?;
            let (fs, tr) = match scene.footholds {
                Footholds::Points(_) => (Some(compute_freespace(&scene)?), None),
                Footholds::Polygons(_) => (None, Some(two_contact_tracings(&scene)?)),
            };
            let svg = render_svg(&Drawing {
                scene: &scene,
                bbox,
                freespace: fs.as_ref(),
                grid: grid.as_ref(),
                curves: tr.as_ref(),
                circles: fs.is_some(),
            });
            emit(&s.common.out, &svg, stdout)?;
        }
        Command::Verify(v) => {
            if v.n_min == 0 || v.n_min > v.n_max {
                return Err(Error::Usage("need 1 <= --n-min <= --n-max".into()));
            }
            let (nx, ny) = v.res;
            let report = match &v.scene {
                Some(path) => {
                    let common = Common {
                        scene: path.clone(),
                        out: None,
                        eps: v.eps,
                    };
                    let scene = load(&common)?;
                    let start = std::time::Instant::now();
                    let check = verify_scene(&scene, nx, ny, v.band, Default::default())?;
                    VerifyReport {
                        checks: vec![check],
                        elapsed: v.timing.then(|| start.elapsed().as_secs_f64()),
                    }
                }
                None => {
                    let opts = VerifyOptions {
                        scenes: v.scenes,
                        n_min: v.n_min,
                        n_max: v.n_max,
                        nx,
                        ny,
                        seed: v.seed,
                        band: v.band,
                        ..Default::default()
                    };
                    run_verify(&opts, v.timing)?
                }
            };
            emit(&v.out, &to_text(&report.to_json()), stdout)?;
            if !report.passed() {
                return Ok(EXIT_DISAGREE);
            }
        }
        Command::Stats(c) => {
            let scene = load(&c)?;
            let table = build_neighbor_table(&scene)?;
            let st = arrangement_stats(&table);
            let violations: Vec<String> = validate_general_position(&scene)?.iter().map(|v| v.to_string()).collect();
            let v = json!({
                "n": st.n,
                "intersecting_pairs": st.intersecting_pairs,
                "vertices": st.vertex_count,
                "edges": st.edge_count,
                "size": st.size(),
                "bbox": oracle_bbox(&scene).ok().map(|b| crate::io::bbox_json(&b)),
                "general_position_violations": violations,
            });
            emit(&c.out, &to_text(&v), stdout)?;
        }
    }
    Ok(EXIT_OK)
}
