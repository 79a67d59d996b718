//! One JSON file per session under a data directory.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use kbdebug::api::SessionRecord;

#[derive(Clone, Debug)]
pub struct Store {
    dir: PathBuf,
}

/// Ids we hand out are uuids; anything else cannot name a session file.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}

impl Store {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Store> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Store { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Write-then-rename, so readers never see a partial file.
    pub fn save(&self, record: &SessionRecord) -> io::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer_pretty(&mut tmp, record)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(&record.session_id)).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn load(&self, id: &str) -> io::Result<Option<SessionRecord>> {
        if !valid_id(id) {
            return Ok(None);
        }
        match fs::read(self.path(id)) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kbdebug::logic::Dpi;
    use kbdebug::session::{start_session, SessionConfig};

    #[test]
    fn save_then_load_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let dpi = Dpi::from_json(r#"{"kb": ["A sub B", "B sub C"], "background": ["A(a)"], "negative_tests": [["C(a)"]]}"#).unwrap();
        let record = SessionRecord {
            session_id: "abc-1".into(),
            snapshot: start_session(dpi, SessionConfig::default()).unwrap(),
            created: "2026-01-01T00:00:00Z".into(),
            updated: "2026-01-01T00:00:00Z".into(),
        };
        store.save(&record).unwrap();
        assert_eq!(store.load("abc-1").unwrap(), Some(record));
        assert_eq!(store.load("missing").unwrap(), None);
        assert_eq!(store.load("../etc/passwd").unwrap(), None);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
