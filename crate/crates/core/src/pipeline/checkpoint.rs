//! Checkpoint directories: `manifest.txt` with `key = value` lines and
//! `params.bin`, a text header followed by little-endian f32 data.
//!
//! Header layout:
//! ```text
//! CWORDPARAMS 1 <count>
//! <name> <d1,d2,...> <byte offset> <byte length>
//! ...
//! <blank line>
//! ```
//! Offsets are relative to the first byte after the blank line.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::PipelineError;
use crate::corpus::Vocabulary;
use crate::models::{Model, ModelConfig};
use crate::neural::{ParamSet, Tensor};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const PARAMS_FILE: &str = "params.bin";
const MAGIC: &str = "CWORDPARAMS";
const VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub vocab_hash: String,
    pub epoch: usize,
    /// Extra manifest entries such as epoch losses, kept in key order.
    pub metrics: BTreeMap<String, String>,
    pub params: ParamSet<f32>,
}

impl Checkpoint {
    /// Rebuilds the model skeleton for the stored parameters.
    pub fn model(&self) -> Result<Model, PipelineError> {
        Ok(Model::init(self.config.clone(), 0)?.0)
    }
}

const RESERVED: [&str; 2] = ["vocab_hash", "epoch"];

pub fn save_checkpoint(
    dir: &Path,
    config: &ModelConfig,
    params: &ParamSet<f32>,
    vocab_hash: &str,
    epoch: usize,
    metrics: &BTreeMap<String, String>,
) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir.display(), e))?;

    let mut manifest = config.to_manifest();
    manifest.push_str(&format!("vocab_hash = {vocab_hash}\nepoch = {epoch}\n"));
    for (k, v) in metrics {
        if RESERVED.contains(&k.as_str()) || k.contains('=') || v.contains('\n') {
            return Err(PipelineError::Config(format!("unusable manifest entry `{k}`")));
        }
        manifest.push_str(&format!("{k} = {v}\n"));
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest).map_err(|e| PipelineError::io(path.display(), e))?;

    let mut header = format!("{MAGIC} {VERSION} {}\n", params.len());
    let mut blob = Vec::with_capacity(params.num_scalars() * 4);
    for (_, p) in params.iter() {
        let shape: Vec<String> = p.value.shape().iter().map(ToString::to_string).collect();
        let bytes = p.value.len() * 4;
        header.push_str(&format!("{} {} {} {bytes}\n", p.name, shape.join(","), blob.len()));
        for x in p.value.data() {
            blob.extend_from_slice(&x.to_le_bytes());
        }
    }
    header.push('\n');
    let mut out = header.into_bytes();
    out.extend_from_slice(&blob);
    let path = dir.join(PARAMS_FILE);
    fs::write(&path, out).map_err(|e| PipelineError::io(path.display(), e))
}

struct Entry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
    len: usize,
}

fn parse_header(bytes: &[u8]) -> Result<(Vec<Entry>, usize), PipelineError> {
    let corrupt = |m: String| PipelineError::Corrupt(m);
    let end = bytes
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| corrupt("header is not terminated".into()))?;
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| corrupt("header is not UTF-8".into()))?;
    let mut lines = text.lines();
    let first: Vec<&str> = lines.next().unwrap_or("").split(' ').collect();
    if first.len() != 3 || first[0] != MAGIC {
        return Err(corrupt("bad magic line".into()));
    }
    if first[1] != VERSION.to_string() {
        return Err(corrupt(format!("unsupported version {}", first[1])));
    }
    let count: usize = first[2].parse().map_err(|_| corrupt("bad parameter count".into()))?;
    let mut entries = Vec::with_capacity(count);
    for line in lines {
        let f: Vec<&str> = line.split(' ').collect();
        let bad = || corrupt(format!("bad header line `{line}`"));
        if f.len() != 4 {
            return Err(bad());
        }
        let shape = f[1]
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<usize>, _>>()
            .map_err(|_| bad())?;
        entries.push(Entry {
            name: f[0].to_string(),
            shape,
            offset: f[2].parse().map_err(|_| bad())?,
            len: f[3].parse().map_err(|_| bad())?,
        });
    }
    if entries.len() != count {
        return Err(corrupt(format!("header lists {} parameters, expected {count}", entries.len())));
    }
    Ok((entries, end + 2))
}

fn read_manifest(dir: &Path) -> Result<BTreeMap<String, String>, PipelineError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(path.display(), e))?;
    let mut map = BTreeMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (k, v) = line
            .split_once(" = ")
            .ok_or_else(|| PipelineError::Corrupt(format!("manifest line `{line}`")))?;
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

/// Loads a checkpoint. With `vocab`, refuses a checkpoint trained on a
/// different vocabulary.
pub fn load_checkpoint(dir: &Path, vocab: Option<&Vocabulary>) -> Result<Checkpoint, PipelineError> {
    let mut manifest = read_manifest(dir)?;
    let config = ModelConfig::parse_manifest(|k| manifest.get(k).cloned())?;
    let vocab_hash = manifest
        .remove("vocab_hash")
        .ok_or_else(|| PipelineError::Corrupt("manifest lacks vocab_hash".into()))?;
    if let Some(v) = vocab {
        let found = v.hash();
        if found != vocab_hash {
            return Err(PipelineError::VocabMismatch {
                expected: vocab_hash,
                found,
            });
        }
    }
    let epoch = manifest
        .remove("epoch")
        .and_then(|e| e.parse().ok())
        .ok_or_else(|| PipelineError::Corrupt("manifest lacks a numeric epoch".into()))?;
    let config_keys: Vec<String> = config
        .to_manifest()
        .lines()
        .filter_map(|l| l.split_once(" = ").map(|(k, _)| k.to_string()))
        .collect();
    let metrics = manifest
        .into_iter()
        .filter(|(k, _)| !config_keys.contains(k))
        .collect();

    let path = dir.join(PARAMS_FILE);
    let bytes = fs::read(&path).map_err(|e| PipelineError::io(path.display(), e))?;
    let (entries, data_start) = parse_header(&bytes)?;
    let data = &bytes[data_start..];

    let (_, mut params) = Model::init(config.clone(), 0)?;
    let by_name: BTreeMap<&str, &Entry> = entries.iter().map(|e| (e.name.as_str(), e)).collect();
    let names: Vec<String> = params.iter().map(|(_, p)| p.name.clone()).collect();
    for name in names {
        let entry = by_name
            .get(name.as_str())
            .ok_or_else(|| PipelineError::MissingParam(name.clone()))?;
        let id = params.id(&name).expect("name from this set");
        let expected = params.value(id).shape().to_vec();
        if entry.shape != expected {
            return Err(PipelineError::ShapeMismatch {
                name,
                expected,
                found: entry.shape.clone(),
            });
        }
        let n: usize = expected.iter().product();
        if entry.len != n * 4 {
            return Err(PipelineError::Corrupt(format!("`{name}` has {} bytes, expected {}", entry.len, n * 4)));
        }
        let raw = data
            .get(entry.offset..entry.offset + entry.len)
            .ok_or_else(|| PipelineError::MissingParam(name.clone()))?;
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        *params.value_mut(id) = Tensor::from_vec(&expected, values)?;
    }
    if entries.len() != params.len() {
        let extra = entries
            .iter()
            .find(|e| params.id(&e.name).is_none())
            .map_or_else(String::new, |e| e.name.clone());
        return Err(PipelineError::Corrupt(format!("unexpected parameter `{extra}`")));
    }
    Ok(Checkpoint {
        config,
        vocab_hash,
        epoch,
        metrics,
        params,
    })
}
