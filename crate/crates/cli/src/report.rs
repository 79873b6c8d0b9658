//! Artifact emission. Every file carries the config hash and the seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bergman_extremal::Report;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::heatmap::Heatmap;

pub struct Artifacts {
    dir: PathBuf,
    sha: String,
    seed: u64,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, cfg: &RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            sha: cfg.sha256(),
            seed: cfg.seed,
            written: Vec::new(),
        })
    }

    pub fn config_sha256(&self) -> &str {
        &self.sha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// File names written so far, in order.
    pub fn written(&self) -> Vec<String> {
        self.written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect()
    }

    fn create(&mut self, name: &str) -> Result<(BufWriter<File>, PathBuf), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok((BufWriter::new(file), path))
    }

    pub fn json(&mut self, name: &str, command: &str, result: &impl Serialize) -> Result<(), CliError> {
        let doc = json!({
            "command": command,
            "config_sha256": self.sha,
            "seed": self.seed,
            "result": result,
        });
        let (mut w, path) = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| CliError::Config(e.to_string()))?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))
    }

    /// CSV with a provenance comment line ahead of the header.
    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let comment = format!("# config_sha256={},seed={}\n", self.sha, self.seed);
        let (mut w, path) = self.create(name)?;
        let io = |e| CliError::io(&path, e);
        w.write_all(comment.as_bytes()).map_err(io)?;
        let mut csv = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| CliError::Config(e.to_string());
        csv.write_record(header).map_err(csv_err)?;
        for r in rows {
            csv.write_record(r).map_err(csv_err)?;
        }
        csv.flush().map_err(io)
    }

    pub fn ladder(&mut self, name: &str, report: &Report) -> Result<(), CliError> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let rows: Vec<Vec<String>> = report
            .rows()
            .into_iter()
            .map(|r| {
                vec![
                    r.m.to_string(),
                    r.value.to_string(),
                    opt(r.increment),
                    opt(r.ratio),
                    r.reliable.to_string(),
                ]
            })
            .collect();
        self.table(name, &["m", "value", "increment", "ratio", "reliable"], &rows)
    }

    pub fn png(&mut self, name: &str, map: &Heatmap) -> Result<(), CliError> {
        let (w, path) = self.create(name)?;
        let mut enc = png::Encoder::new(w, map.width, map.height);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let err = |e: png::EncodingError| CliError::Config(format!("{}: {e}", path.display()));
        enc.add_text_chunk("config_sha256".into(), self.sha.clone()).map_err(err)?;
        enc.add_text_chunk("seed".into(), self.seed.to_string()).map_err(err)?;
        let mut writer = enc.write_header().map_err(err)?;
        writer.write_image_data(&map.pixels).map_err(err)?;
        writer.finish().map_err(err)
    }
}
