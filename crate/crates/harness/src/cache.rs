//! On-disk result store: one JSON file per key, written atomically.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

const QUARANTINE: &str = "quarantine";

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Cache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File-system safe name; keys are graph hashes plus case ids.
    fn path(&self, key: &str) -> PathBuf {
        let name: String = key
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        self.dir.join(format!("{name}.json"))
    }

    /// Missing entries give `None`; unreadable ones are moved aside.
    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let path = self.path(key);
        let bytes = std::fs::read(&path).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(v) => Some(v),
            Err(_) => {
                self.quarantine(&path);
                None
            }
        }
    }

    fn quarantine(&self, path: &Path) {
        let target = self.dir.join(QUARANTINE);
        if std::fs::create_dir_all(&target).is_ok() {
            if let Some(name) = path.file_name() {
                let _ = std::fs::rename(path, target.join(name));
            }
        }
    }

    pub fn quarantined(&self) -> usize {
        std::fs::read_dir(self.dir.join(QUARANTINE)).map(|d| d.count()).unwrap_or(0)
    }

    pub fn put<T: Serialize>(&self, key: &str, value: &T) -> anyhow::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, value)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(key))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_get_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path()).unwrap();
        assert_eq!(c.get::<Vec<u32>>("k/1"), None);
        c.put("k/1", &vec![1u32, 2]).unwrap();
        assert_eq!(c.get::<Vec<u32>>("k/1"), Some(vec![1, 2]));
        c.put("k/1", &vec![3u32]).unwrap();
        assert_eq!(c.get::<Vec<u32>>("k/1"), Some(vec![3]));
    }

    #[test]
    fn corrupt_entries_are_quarantined() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path()).unwrap();
        c.put("bad", &7u32).unwrap();
        std::fs::write(c.path("bad"), b"{not json").unwrap();
        assert_eq!(c.get::<u32>("bad"), None);
        assert_eq!(c.quarantined(), 1);
        assert!(!c.path("bad").exists());
        c.put("bad", &8u32).unwrap();
        assert_eq!(c.get::<u32>("bad"), Some(8));
    }
}
