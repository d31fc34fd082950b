//! On-disk cache of simulated null distributions.
//!
//! One text file per fingerprint:
//!
//! ```text
//! beast-null-cache 1
//! fingerprint <NullFingerprint::key()>
//! count <N>
//! sha256 <hex digest of the value lines>
//! <value 1>
//! ...
//! <value N>
//! ```
//!
//! Values use Rust's shortest round-trip float formatting, so a re-read is
//! bit-exact. Files are written to a temporary name and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{simulate_null, BeastConfig, NullDistribution, NullFingerprint, Statistic};
use crate::error::{Error, Result};

const MAGIC: &str = "beast-null-cache";
const VERSION: u32 = 1;

/// Environment variable naming the default cache directory.
pub const CACHE_ENV: &str = "BEAST_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    /// The file existed but failed validation and was rebuilt.
    Regenerated,
}

#[derive(Debug, Clone)]
pub struct NullCache {
    dir: PathBuf,
}

fn body_digest(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

fn render_values(values: &[f64]) -> String {
    let mut body = String::with_capacity(values.len() * 20);
    for v in values {
        body.push_str(&format!("{v:?}\n"));
    }
    body
}

impl NullCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, fp: &NullFingerprint) -> PathBuf {
        self.dir.join(format!("null-{}.txt", fp.digest()))
    }

    /// `Ok(None)` when no file exists; [`Error::Cache`] when the file is
    /// unreadable, truncated, tampered with or belongs to another fingerprint.
    pub fn load(&self, fp: &NullFingerprint) -> Result<Option<NullDistribution>> {
        let path = self.path_for(fp);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::Cache(format!("{}: {e}", path.display()))),
        };
        parse(&text, fp)
            .map(Some)
            .map_err(|why| Error::Cache(format!("{}: {why}", path.display())))
    }

    pub fn store(&self, null: &NullDistribution) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let body = render_values(null.values());
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        write!(
            tmp,
            "{MAGIC} {VERSION}\nfingerprint {}\ncount {}\nsha256 {}\n{body}",
            null.fingerprint.key(),
            null.len(),
            body_digest(&body)
        )?;
        tmp.as_file().sync_all()?;
        let path = self.path_for(&null.fingerprint);
        tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
        Ok(path)
    }

    /// Loads the distribution for `(cfg, n, stat)`, simulating and storing it
    /// on a miss or when the cached file is invalid.
    pub fn get_or_simulate(
        &self,
        cfg: &BeastConfig,
        n: usize,
        stat: &Statistic,
    ) -> Result<(NullDistribution, CacheStatus)> {
        let fp = NullFingerprint::new(cfg, n, stat);
        let status = match self.load(&fp) {
            Ok(Some(null)) => {
                log::info!("null cache hit: {}", self.path_for(&fp).display());
                return Ok((null, CacheStatus::Hit));
            }
            Ok(None) => CacheStatus::Miss,
            Err(e) => {
                log::warn!("discarding invalid null cache entry ({e})");
                CacheStatus::Regenerated
            }
        };
        log::info!("simulating {} null draws for {}", cfg.null_sims, fp.key());
        let null = simulate_null(cfg, n, stat)?;
        let path = self.store(&null)?;
        log::info!("null cache written: {}", path.display());
        Ok((null, status))
    }
}

fn parse(text: &str, expected: &NullFingerprint) -> std::result::Result<NullDistribution, String> {
    let mut lines = text.split_inclusive('\n');
    let mut header = |prefix: &str| -> std::result::Result<String, String> {
        let line = lines.next().ok_or("truncated header")?;
        line.strip_suffix('\n')
            .and_then(|l| l.strip_prefix(prefix))
            .and_then(|l| l.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| format!("expected '{prefix}' line"))
    };
    let version = header(MAGIC)?;
    if version != VERSION.to_string() {
        return Err(format!("unsupported version {version}"));
    }
    let key = header("fingerprint")?;
    if key != expected.key() {
        return Err("fingerprint mismatch".into());
    }
    let count: usize = header("count")?
        .parse()
        .map_err(|_| "bad count".to_string())?;
    let digest = header("sha256")?;
    let body: String = lines.collect();
    if body_digest(&body) != digest {
        return Err("checksum mismatch".into());
    }
    let values = body
        .lines()
        .map(|l| l.parse::<f64>().map_err(|_| format!("bad value '{l}'")))
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    if values.len() != count || count != expected.null_sims {
        return Err(format!("expected {count} values, found {}", values.len()));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err("values are not sorted".into());
    }
    NullDistribution::new(expected.clone(), values).map_err(|e| e.to_string())
}
