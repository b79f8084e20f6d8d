use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EmbedError, Embedder, EmbeddingVector};

#[derive(Serialize, Deserialize)]
struct Entry {
    provider: String,
    vector: Vec<f64>,
}

/// Wraps a provider with an on-disk cache at `<dir>/<ab>/<sha256>.json`,
/// keyed by the provider id and the text.
pub struct CachedEmbedder<E> {
    inner: E,
    dir: PathBuf,
}

impl<E: Embedder> CachedEmbedder<E> {
    pub fn new(inner: E, dir: impl Into<PathBuf>) -> Self {
        Self {
            inner,
            dir: dir.into(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, provider: &str, text: &str) -> PathBuf {
        let mut h = Sha256::new();
        h.update(provider.as_bytes());
        h.update([0u8]);
        h.update(text.as_bytes());
        let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        self.dir.join(&hex[..2]).join(format!("{hex}.json"))
    }

    fn load(&self, path: &Path, provider: &str) -> Option<EmbeddingVector> {
        let bytes = fs::read(path).ok()?;
        let entry: Entry = serde_json::from_slice(&bytes).ok()?;
        (entry.provider == provider && entry.vector.len() == self.inner.dimension())
            .then_some(entry.vector)
    }

    fn store(&self, path: &Path, provider: &str, vector: &[f64]) -> Result<(), EmbedError> {
        let parent = path.parent().unwrap_or(&self.dir);
        fs::create_dir_all(parent)?;
        let entry = Entry {
            provider: provider.to_owned(),
            vector: vector.to_vec(),
        };
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&serde_json::to_vec(&entry).map_err(std::io::Error::other)?)?;
        drop(f);
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

impl<E: Embedder> Embedder for CachedEmbedder<E> {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let provider = self.inner.id();
        let paths: Vec<PathBuf> = texts.iter().map(|t| self.path_for(&provider, t)).collect();
        let mut out: Vec<Option<EmbeddingVector>> =
            paths.iter().map(|p| self.load(p, &provider)).collect();
        let missing: Vec<usize> = (0..texts.len()).filter(|&i| out[i].is_none()).collect();
        if !missing.is_empty() {
            let batch: Vec<String> = missing.iter().map(|&i| texts[i].clone()).collect();
            let fresh = self.inner.embed_batch(&batch)?;
            for (&i, v) in missing.iter().zip(fresh) {
                self.store(&paths[i], &provider, &v)?;
                out[i] = Some(v);
            }
        }
        Ok(out.into_iter().map(|v| v.unwrap_or_default()).collect())
    }
}
