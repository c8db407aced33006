//! Output directory resolution and file emission.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fastslow::integrate::Trajectory;

pub const OUTPUT_DIR_ENV: &str = "FASTSLOW_OUTPUT_DIR";

/// `--out` beats the environment override, which beats the config file;
/// the fallback is `output/<scenario>`.
pub fn resolve_dir(flag: Option<&Path>, config: Option<&Path>, scenario_name: &str) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    if let Some(p) = config {
        return p.to_path_buf();
    }
    Path::new("output").join(slug(scenario_name))
}

/// `ring(7)` becomes `ring_7`.
pub fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect();
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if !(c == '_' && out.ends_with('_')) {
            out.push(c);
        }
    }
    out.trim_matches('_').to_string()
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn write_trajectory(path: &Path, tr: &Trajectory) -> Result<()> {
    let mut f = create(path)?;
    tr.write_csv(&mut f)?;
    f.flush()?;
    Ok(())
}

/// Per-panel CSVs: node time series, weight trace and the (a, y) plane.
pub fn write_plotdata(dir: &Path, tr: &Trajectory) -> Result<()> {
    let m = tr.samples.first().map_or(0, |s| s.x.len());
    let mut nodes = create(&dir.join("nodes.csv"))?;
    let header: Vec<String> = (1..=m).map(|k| format!("x{k}")).collect();
    writeln!(nodes, "t,{}", header.join(","))?;
    for s in &tr.samples {
        write!(nodes, "{:.16e}", s.t)?;
        for v in tr.external(s) {
            write!(nodes, ",{v:.16e}")?;
        }
        writeln!(nodes)?;
    }
    nodes.flush()?;

    let mut weight = create(&dir.join("weight.csv"))?;
    writeln!(weight, "t,w,y")?;
    for s in &tr.samples {
        writeln!(weight, "{:.16e},{:.16e},{:.16e}", s.t, s.w, s.y)?;
    }
    weight.flush()?;

    let mut phase = create(&dir.join("phase.csv"))?;
    writeln!(phase, "t,a,b,y")?;
    for s in &tr.samples {
        writeln!(phase, "{:.16e},{:.16e},{:.16e},{:.16e}", s.t, s.x[0], s.x[1], s.y)?;
    }
    phase.flush()?;
    Ok(())
}
