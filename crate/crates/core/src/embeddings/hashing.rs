use sha2::{Digest, Sha256};

use super::{l2_normalize, EmbedError, Embedder, EmbeddingVector, DEFAULT_DIMENSION};

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Signed feature hashing over a bag of words.
///
/// Each token's SHA-256 digest picks a bucket (first eight bytes as a
/// little-endian integer, modulo the dimension) and a sign (lowest bit of
/// byte eight). Counts accumulate, then the vector is L2-normalized.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    dimension: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self {
            dimension: DEFAULT_DIMENSION,
        }
    }
}

impl HashingEmbedder {
    pub fn new(dimension: usize) -> Result<Self, EmbedError> {
        if dimension == 0 {
            return Err(EmbedError::Config("dimension must be positive".into()));
        }
        Ok(Self { dimension })
    }

    pub fn embed(&self, text: &str) -> EmbeddingVector {
        let mut v = vec![0.0; self.dimension];
        for token in tokenize(text) {
            let digest = Sha256::digest(token.as_bytes());
            let mut head = [0u8; 8];
            head.copy_from_slice(&digest[..8]);
            let bucket = (u64::from_le_bytes(head) % self.dimension as u64) as usize;
            let sign = if digest[8] & 1 == 0 { 1.0 } else { -1.0 };
            v[bucket] += sign;
        }
        l2_normalize(&mut v);
        v
    }
}

impl Embedder for HashingEmbedder {
    fn id(&self) -> String {
        format!("hashing-sha256-{}", self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        Ok(texts.iter().map(|t| self.embed(t)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::cosine;

    #[test]
    fn tokenizer_splits_and_lowercases() {
        assert_eq!(
            tokenize("Approve  the-Order!"),
            vec!["approve", "the", "order"]
        );
        assert_eq!(tokenize("Prüfen"), vec!["prüfen"]);
        assert!(tokenize(" ?! ").is_empty());
    }

    #[test]
    fn empty_text_is_zero() {
        let e = HashingEmbedder::default();
        assert!(e.embed("").iter().all(|x| *x == 0.0));
        assert!(e.embed("  --  ").iter().all(|x| *x == 0.0));
    }

    #[test]
    fn deterministic_and_unit_norm() {
        let e = HashingEmbedder::default();
        let a = e.embed("Check stock level");
        assert_eq!(a, e.embed("Check stock level"));
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_orders_cosine() {
        let e = HashingEmbedder::default();
        let base = e.embed("approve order");
        let near = cosine(&base, &e.embed("approve the order")).unwrap();
        let far = cosine(&base, &e.embed("reject shipment")).unwrap();
        // two shared tokens out of 2 and 3: 2 / (sqrt 2 * sqrt 3)
        assert!((near - 2.0 / 6f64.sqrt()).abs() < 1e-12);
        assert!(near > far);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(HashingEmbedder::new(0).is_err());
    }
}
