//! Atomic file output with provenance stamps.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use image::RgbImage;

/// Provenance stamped into every file a command writes.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Stamp {
    pub artifact_version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
}

impl Stamp {
    pub fn comment_line(&self) -> String {
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into());
        format!("# bjbench {} config_hash={} seed={}\n", self.artifact_version, self.config_hash, seed)
    }
}

pub struct OutDir {
    root: PathBuf,
    pub stamp: Stamp,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path, stamp: Stamp) -> Result<OutDir> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutDir { root: root.to_path_buf(), stamp, written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let dst = self.path(name);
        if let Some(parent) = dst.parent() {
            fs::create_dir_all(parent)?;
        }
        write_atomic(&dst, bytes)?;
        self.written.push(dst.clone());
        Ok(dst)
    }

    /// Text file with a leading `#` provenance line.
    pub fn text(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let mut s = self.stamp.comment_line();
        s.push_str(body);
        self.write_bytes(name, s.as_bytes())
    }

    /// JSON object with a `provenance` member added.
    pub fn json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut v = serde_json::to_value(value)?;
        let stamp = serde_json::to_value(&self.stamp)?;
        match v.as_object_mut() {
            Some(obj) => {
                obj.insert("provenance".into(), stamp);
            }
            None => {
                v = serde_json::json!({ "provenance": stamp, "data": v });
            }
        }
        let mut s = serde_json::to_string_pretty(&v)?;
        s.push('\n');
        self.write_bytes(name, s.as_bytes())
    }

    /// PNG with provenance and any extra key/value pairs in text chunks.
    pub fn png(&mut self, name: &str, img: &RgbImage, extra: &[(&str, String)]) -> Result<PathBuf> {
        let mut buf = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut buf, img.width(), img.height());
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            enc.add_text_chunk("bjbench-version".into(), self.stamp.artifact_version.clone())?;
            enc.add_text_chunk("config-hash".into(), self.stamp.config_hash.clone())?;
            let seed = self.stamp.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into());
            enc.add_text_chunk("seed".into(), seed)?;
            for (k, v) in extra {
                enc.add_text_chunk((*k).into(), v.clone())?;
            }
            let mut w = enc.write_header()?;
            w.write_image_data(img.as_raw())?;
        }
        self.write_bytes(name, &buf)
    }
}

/// Write to a temporary sibling, then rename over the destination.
pub fn write_atomic(dst: &Path, bytes: &[u8]) -> Result<()> {
    let dir = dst.parent().unwrap_or(Path::new("."));
    let name = dst.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dst).with_context(|| format!("renaming into {}", dst.display()))?;
    Ok(())
}
