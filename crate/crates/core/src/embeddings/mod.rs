//! Sentence embeddings behind a small provider trait.
//!
//! Two providers ship with the crate: [`HashingEmbedder`], a deterministic
//! signed bag-of-words hash that needs no network, and [`RemoteEmbedder`],
//! which talks to an HTTP embedding service. Either can be wrapped in a
//! [`CachedEmbedder`] that stores vectors in a content-addressed directory.

mod cache;
mod config;
mod hashing;
mod remote;

use thiserror::Error;

pub use cache::CachedEmbedder;
pub use config::{
    build_provider, embed_batch, ProviderConfig, ProviderKind, ENV_EMBED_ENDPOINT, ENV_EMBED_MODEL,
};
pub use hashing::{tokenize, HashingEmbedder};
pub use remote::RemoteEmbedder;

/// Default vector width for both providers.
pub const DEFAULT_DIMENSION: usize = 384;

pub type EmbeddingVector = Vec<f64>;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding service unavailable after {attempts} attempt(s): {message}")]
    RemoteUnavailable { attempts: u32, message: String },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid embedding response: {0}")]
    InvalidResponse(String),
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error("embedding cache: {0}")]
    Cache(#[from] std::io::Error),
}

/// A source of fixed-width embedding vectors.
///
/// Implementations must be safe to call from several threads at once and
/// must return one vector per input text, in input order. Non-empty vectors
/// are unit length; text without tokens may map to the zero vector.
pub trait Embedder: Send + Sync {
    /// Stable identity of the provider and model, used as part of cache keys.
    fn id(&self) -> String;

    fn dimension(&self) -> usize;

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError>;
}

impl<E: Embedder + ?Sized> Embedder for std::sync::Arc<E> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        (**self).embed_batch(texts)
    }
}

/// Cosine of the angle between `a` and `b`; 0 when either has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, EmbedError> {
    if a.len() != b.len() {
        return Err(EmbedError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Scales `v` to unit length in place; the zero vector is left unchanged.
pub fn l2_normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_basics() {
        let v = [0.6, 0.8, 0.0];
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((cosine(&v, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn cosine_rejects_width_mismatch() {
        assert!(matches!(
            cosine(&[1.0], &[1.0, 0.0]),
            Err(EmbedError::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn normalize_leaves_zero_alone() {
        let mut z = vec![0.0; 3];
        l2_normalize(&mut z);
        assert_eq!(z, vec![0.0; 3]);
        let mut v = vec![3.0, 4.0];
        l2_normalize(&mut v);
        assert_eq!(v, vec![0.6, 0.8]);
    }
}
