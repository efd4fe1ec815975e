//! Guard and flow caches for incremental re-verification.
//!
//! The guard cache maps a node's end sets, joint modes and one candidate
//! transition (by the text of its guard and resets) to the verdict and
//! successor. The flow cache keeps every tube by dynamics, mode and exact
//! initial set, plus a capped list of recent initial sets per dynamics and
//! mode; a lookup hits on an exact set, or else on the most recent listed
//! set containing the query.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::ModePair;
use crate::reach::{verify_with, GuardOutcome, LocalTube, Memo, ReachError, Tree};
use crate::scenario::{Candidate, EngineKind, HybridAutomaton, RunSettings};
use crate::HyperRect;

pub const CACHE_VERSION: u32 = 1;

/// Entries kept per flow-cache bucket.
pub const FLOW_BUCKET_CAP: usize = 256;

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: malformed cache: {message}")]
    Format { path: String, message: String },
}

/// Settings a cached result depends on beyond its key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub version: u32,
    pub delta: f64,
    pub dt: f64,
    pub engine: EngineKind,
    pub bloat: f64,
    pub corner_cap: usize,
    pub map: String,
    pub sensor: String,
}

impl CacheHeader {
    pub fn new(aut: &HybridAutomaton, settings: &RunSettings) -> CacheHeader {
        CacheHeader {
            version: CACHE_VERSION,
            delta: settings.delta,
            dt: settings.dt,
            engine: settings.engine,
            bloat: settings.bloat,
            corner_cap: settings.corner_cap,
            map: fingerprint(&aut.map.to_json().to_string()),
            sensor: fingerprint(&serde_json::to_string(&aut.sensor).expect("sensors serialize")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub guard_hits: u64,
    pub guard_misses: u64,
    pub flow_hits: u64,
    pub flow_misses: u64,
}

impl CacheStats {
    pub fn guard_hit_rate(&self) -> f64 {
        rate(self.guard_hits, self.guard_misses)
    }

    pub fn flow_hit_rate(&self) -> f64 {
        rate(self.flow_hits, self.flow_misses)
    }
}

fn rate(hits: u64, misses: u64) -> f64 {
    if hits + misses == 0 {
        0.0
    } else {
        hits as f64 / (hits + misses) as f64
    }
}

pub fn fingerprint(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").expect("writing to a string");
    }
    out
}

/// Bounds printed to 12 significant digits, so keys do not depend on the
/// last bits of a computation.
fn canonical_rect(out: &mut String, r: &HyperRect) {
    out.push('[');
    for iv in r.dims() {
        write!(out, "{:.11e},{:.11e};", iv.lo, iv.hi).expect("writing to a string");
    }
    out.push(']');
}

/// Flow key of an exact initial set; bounds print in shortest round-trip
/// form so only bit-identical sets share a key.
fn exact_key(bucket: &str, rect: &HyperRect) -> String {
    let mut s = format!("{bucket}|");
    for iv in rect.dims() {
        write!(s, "{:?},{:?};", iv.lo, iv.hi).expect("writing to a string");
    }
    fingerprint(&s)
}

/// A recent initial set of a flow bucket and the key of its tube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FlowEntry {
    rect: HyperRect,
    key: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct CacheFile {
    header: Option<CacheHeader>,
    guards: BTreeMap<String, GuardOutcome>,
    /// Recent sets per bucket, scanned for containment; capped.
    flows: BTreeMap<String, VecDeque<FlowEntry>>,
    /// Every computed tube by bucket and exact initial set.
    tubes: BTreeMap<String, LocalTube>,
}

/// Guard and flow caches. In record mode lookups always miss, so a run
/// computes exactly what a cold verification would while filling the
/// caches.
#[derive(Debug, Clone)]
pub struct Caches {
    file: CacheFile,
    pub stats: CacheStats,
    pub read: bool,
}

impl Caches {
    pub fn new(header: CacheHeader) -> Caches {
        Caches {
            file: CacheFile {
                header: Some(header),
                ..CacheFile::default()
            },
            stats: CacheStats::default(),
            read: true,
        }
    }

    /// Load a persisted cache. A missing file gives an empty cache; one
    /// written under different settings is discarded with a warning.
    pub fn load(path: &Path, header: CacheHeader) -> Result<(Caches, Option<String>), CacheError> {
        let p = path.display().to_string();
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Caches::new(header), None)),
            Err(e) => {
                return Err(CacheError::Io {
                    path: p,
                    message: e.to_string(),
                })
            }
        };
        let file: CacheFile = serde_json::from_str(&text).map_err(|e| CacheError::Format {
            path: p.clone(),
            message: e.to_string(),
        })?;
        if file.header.as_ref() != Some(&header) {
            let warning = format!("{p}: cache was written for different settings; starting empty");
            log::warn!("{warning}");
            return Ok((Caches::new(header), Some(warning)));
        }
        Ok((
            Caches {
                file,
                stats: CacheStats::default(),
                read: true,
            },
            None,
        ))
    }

    pub fn save(&self, path: &Path) -> Result<(), CacheError> {
        let text = serde_json::to_string(&self.file).expect("caches serialize");
        std::fs::write(path, text).map_err(|e| CacheError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn guard_entries(&self) -> usize {
        self.file.guards.len()
    }

    pub fn flow_entries(&self) -> usize {
        self.file.tubes.len()
    }

    /// Move an entry to the most recent end of its bucket, evicting the
    /// least recent beyond the cap. Evicted tubes stay reachable by exact
    /// key.
    fn touch(&mut self, bucket_key: &str, key: String, rect: HyperRect) {
        let bucket = self.file.flows.entry(bucket_key.to_string()).or_default();
        if let Some(i) = bucket.iter().position(|e| e.key == key) {
            bucket.remove(i);
        }
        bucket.push_back(FlowEntry { rect, key });
        while bucket.len() > FLOW_BUCKET_CAP {
            bucket.pop_front();
        }
    }

    fn guard_key(aut: &HybridAutomaton, c: &Candidate, ends: &[HyperRect], modes: &[ModePair]) -> String {
        let t = aut.transition(c);
        let mut s = String::new();
        write!(s, "agent {} -> {}|guard {}|", c.agent, c.next, t.guard).expect("writing to a string");
        for (i, e) in &t.resets {
            write!(s, "reset {i} = {e}|").expect("writing to a string");
        }
        for (m, r) in modes.iter().zip(ends) {
            write!(s, "{m}").expect("writing to a string");
            canonical_rect(&mut s, r);
        }
        fingerprint(&s)
    }

    fn flow_bucket(aut: &HybridAutomaton, agent: usize, mode: &ModePair) -> String {
        fingerprint(&format!("{:?}|{mode}", aut.agents[agent].model))
    }
}

impl Memo for Caches {
    fn flow(
        &mut self,
        aut: &HybridAutomaton,
        agent: usize,
        rect: &HyperRect,
        mode: &ModePair,
        compute: &mut dyn FnMut() -> Result<LocalTube, ReachError>,
    ) -> Result<LocalTube, ReachError> {
        let bucket_key = Caches::flow_bucket(aut, agent, mode);
        let key = exact_key(&bucket_key, rect);
        if self.read {
            let hit = match self.file.tubes.get(&key) {
                Some(t) => Some((key.clone(), rect.clone(), t.clone())),
                None => self.file.flows.get(&bucket_key).and_then(|bucket| {
                    let e = bucket.iter().rev().find(|e| e.rect.contains(rect).unwrap_or(false))?;
                    Some((e.key.clone(), e.rect.clone(), self.file.tubes.get(&e.key)?.clone()))
                }),
            };
            if let Some((used, used_rect, tube)) = hit {
                self.touch(&bucket_key, used, used_rect);
                self.stats.flow_hits += 1;
                return Ok(tube);
            }
        }
        self.stats.flow_misses += 1;
        let tube = compute()?;
        self.file.tubes.insert(key.clone(), tube.clone());
        self.touch(&bucket_key, key, rect.clone());
        Ok(tube)
    }

    fn guard(
        &mut self,
        aut: &HybridAutomaton,
        c: &Candidate,
        ends: &[HyperRect],
        modes: &[ModePair],
        compute: &mut dyn FnMut() -> Result<GuardOutcome, ReachError>,
    ) -> Result<GuardOutcome, ReachError> {
        let key = Caches::guard_key(aut, c, ends, modes);
        if self.read {
            if let Some(o) = self.file.guards.get(&key) {
                self.stats.guard_hits += 1;
                return Ok(o.clone());
            }
        }
        self.stats.guard_misses += 1;
        let o = compute()?;
        self.file.guards.insert(key, o.clone());
        Ok(o)
    }
}

/// Verification that reuses and extends `caches`.
pub fn verify_inc(aut: &HybridAutomaton, settings: &RunSettings, caches: &mut Caches) -> Tree {
    verify_with(aut, settings, caches)
}
