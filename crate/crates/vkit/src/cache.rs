//! Checksummed result persistence.
//!
//! Entries are keyed by (module, parameters, format version); the key is
//! content-hashed into the file name and the payload carries a sha256
//! checksum. A checksum mismatch surfaces as an error; a version mismatch
//! silently invalidates the entry.

use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

const MAGIC: &str = "vkit-cache 1";

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CacheKey {
    pub module: String,
    pub params: String,
    pub version: u32,
}

impl CacheKey {
    pub fn new(module: &str, params: &str, version: u32) -> Self {
        Self {
            module: module.into(),
            params: params.into(),
            version,
        }
    }

    fn file_name(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.module.as_bytes());
        h.update([0]);
        h.update(self.params.as_bytes());
        h.update([0]);
        h.update(self.version.to_le_bytes());
        format!("{:x}.entry", h.finalize())
    }
}

#[derive(Clone, Debug)]
pub struct EntryInfo {
    pub module: String,
    pub params: String,
    pub version: u32,
    pub payload_len: usize,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// Open (creating if needed) a cache directory.
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    /// Resolution order: explicit flag, then VKIT_CACHE, then .vkit-cache.
    pub fn resolve_dir(flag: Option<PathBuf>) -> PathBuf {
        flag.or_else(|| std::env::var_os("VKIT_CACHE").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".vkit-cache"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn put(&self, key: &CacheKey, payload: &[u8]) -> Result<()> {
        let checksum = format!("{:x}", Sha256::digest(payload));
        let path = self.dir.join(key.file_name());
        let mut f = fs::File::create(&path)?;
        writeln!(f, "{MAGIC}")?;
        writeln!(f, "module {}", key.module)?;
        writeln!(f, "params {}", key.params)?;
        writeln!(f, "version {}", key.version)?;
        writeln!(f, "sha256 {checksum}")?;
        writeln!(f)?;
        f.write_all(payload)?;
        Ok(())
    }

    /// Returns the payload when present, version-matched and checksummed.
    pub fn get(&self, key: &CacheKey) -> Result<Option<Vec<u8>>> {
        let path = self.dir.join(key.file_name());
        let data = match fs::read(&path) {
            Ok(d) => d,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let (info, payload) = parse_entry(&data)?;
        if info.version != key.version {
            return Ok(None);
        }
        Ok(Some(payload))
    }

    pub fn entries(&self) -> Result<Vec<EntryInfo>> {
        let mut out = Vec::new();
        if !self.dir.exists() {
            return Ok(out);
        }
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "entry"))
            .collect();
        paths.sort();
        for p in paths {
            let data = fs::read(&p)?;
            let (info, _) = parse_entry(&data)?;
            out.push(info);
        }
        Ok(out)
    }

    pub fn clear(&self) -> Result<usize> {
        let mut n = 0;
        if !self.dir.exists() {
            return Ok(0);
        }
        for e in fs::read_dir(&self.dir)? {
            let p = e?.path();
            if p.extension().is_some_and(|x| x == "entry") {
                fs::remove_file(p)?;
                n += 1;
            }
        }
        Ok(n)
    }
}

fn parse_entry(data: &[u8]) -> Result<(EntryInfo, Vec<u8>)> {
    let bad = || Error::Cache("malformed cache entry".into());
    // header is ASCII lines up to a blank line
    let mut pos = 0;
    let mut lines: Vec<String> = Vec::new();
    loop {
        let nl = data[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(bad)?;
        let line = std::str::from_utf8(&data[pos..pos + nl]).map_err(|_| bad())?;
        pos += nl + 1;
        if line.is_empty() {
            break;
        }
        lines.push(line.to_string());
    }
    if lines.first().map(String::as_str) != Some(MAGIC) {
        return Err(bad());
    }
    let field = |name: &str| -> Result<String> {
        lines
            .iter()
            .find_map(|l| l.strip_prefix(&format!("{name} ")))
            .map(String::from)
            .ok_or_else(bad)
    };
    let info = EntryInfo {
        module: field("module")?,
        params: field("params")?,
        version: field("version")?.parse().map_err(|_| bad())?,
        payload_len: data.len() - pos,
    };
    let payload = data[pos..].to_vec();
    let checksum = field("sha256")?;
    let actual = format!("{:x}", Sha256::digest(&payload));
    if checksum != actual {
        return Err(Error::Cache(format!(
            "checksum mismatch for {}/{}",
            info.module, info.params
        )));
    }
    Ok((info, payload))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_version_invalidation() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let k1 = CacheKey::new("dims", "m=5 variant=framed", 1);
        assert!(cache.get(&k1).unwrap().is_none());
        cache.put(&k1, b"10").unwrap();
        assert_eq!(cache.get(&k1).unwrap().unwrap(), b"10");
        // same key, newer version: miss
        let k2 = CacheKey::new("dims", "m=5 variant=framed", 2);
        assert!(cache.get(&k2).unwrap().is_none());
        let entries = cache.entries().unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].module, "dims");
        assert_eq!(cache.clear().unwrap(), 1);
        assert!(cache.get(&k1).unwrap().is_none());
    }

    #[test]
    fn checksum_detects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let k = CacheKey::new("assoc", "D=4", 1);
        cache.put(&k, b"payload").unwrap();
        // corrupt the payload byte
        let file = std::fs::read_dir(dir.path())
            .unwrap()
            .next()
            .unwrap()
            .unwrap()
            .path();
        let mut data = std::fs::read(&file).unwrap();
        let n = data.len();
        data[n - 1] ^= 0xff;
        std::fs::write(&file, data).unwrap();
        assert!(matches!(cache.get(&k), Err(Error::Cache(_))));
    }

    #[test]
    fn env_resolution() {
        assert_eq!(
            Cache::resolve_dir(Some(PathBuf::from("/x"))),
            PathBuf::from("/x")
        );
    }
}
