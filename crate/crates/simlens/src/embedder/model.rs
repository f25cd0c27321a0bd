//! Backend running a serialized transformer graph (ONNX) with a
//! single-file subword tokenizer definition.
//!
//! The graph must export last-layer hidden states (rank-3 output,
//! `[1, n, d]`) and attention probabilities (rank-4 outputs,
//! `[1, H, n, n]`). The last rank-4 output is taken as the last encoder
//! layer's attention. Paths not found as given are retried under the
//! directory named by `SIMLENS_MODEL_DIR`.

use std::path::{Path, PathBuf};

use ndarray::{Array2, Array3};
use tokenizers::Tokenizer;
use tract_onnx::prelude::*;

use super::{check_length, Backend, CodeFragment, EmbeddingMatrix, Token};
use super::{AttentionTensor, TokenSequence, MODEL_DIR_ENV};
use crate::error::{Result, SimlensError};

type OnnxPlan = tract_onnx::tract_hir::infer::InferenceSimplePlan<
    tract_onnx::tract_hir::infer::InferenceModel,
>;

pub struct ModelBackend {
    plan: OnnxPlan,
    input_names: Vec<String>,
    tokenizer: Tokenizer,
}

impl std::fmt::Debug for ModelBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelBackend")
            .field("input_names", &self.input_names)
            .finish_non_exhaustive()
    }
}

/// Try `path` as given, then under `SIMLENS_MODEL_DIR`.
fn resolve(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if let Ok(dir) = std::env::var(MODEL_DIR_ENV) {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

impl ModelBackend {
    pub fn load(model_path: &Path, tokenizer_path: &Path) -> Result<Self> {
        let tokenizer_path = resolve(tokenizer_path);
        let tokenizer = Tokenizer::from_file(&tokenizer_path)
            .map_err(|e| SimlensError::TokenizerLoad(format!("{}: {e}", tokenizer_path.display())))?;

        let model_path = resolve(model_path);
        let model = tract_onnx::onnx()
            .model_for_path(&model_path)
            .map_err(|e| SimlensError::ModelLoad(format!("{}: {e}", model_path.display())))?;
        let input_names = model
            .inputs
            .iter()
            .map(|o| model.node(o.node).name.clone())
            .collect();
        let plan = model
            .into_runnable()
            .map_err(|e| SimlensError::ModelLoad(format!("{}: {e}", model_path.display())))?;
        Ok(Self {
            plan,
            input_names,
            tokenizer,
        })
    }

    fn forward(&self, seq: &TokenSequence) -> Result<TVec<TValue>> {
        let n = seq.len();
        let ids: Vec<i64> = seq.tokens.iter().map(|t| t.token_id as i64).collect();
        let mut inputs: TVec<TValue> = tvec!();
        for name in &self.input_names {
            let tensor: Tensor = match name.as_str() {
                "input_ids" => Array2::from_shape_vec((1, n), ids.clone()).unwrap().into(),
                "attention_mask" => Array2::<i64>::ones((1, n)).into(),
                "token_type_ids" => Array2::<i64>::zeros((1, n)).into(),
                "position_ids" => {
                    Array2::from_shape_vec((1, n), (0..n as i64).collect()).unwrap().into()
                }
                other => {
                    return Err(SimlensError::ModelLoad(format!(
                        "unsupported model input `{other}`"
                    )))
                }
            };
            inputs.push(tensor.into());
        }
        self.plan
            .run(inputs)
            .map_err(|e| SimlensError::ModelLoad(format!("inference failed: {e}")))
    }
}

fn to_f64_view(value: &TValue) -> Result<ndarray::ArrayD<f64>> {
    if let Ok(view) = value.to_array_view::<f32>() {
        return Ok(view.mapv(f64::from));
    }
    value
        .to_array_view::<f64>()
        .map(|v| v.to_owned())
        .map_err(|e| SimlensError::ModelLoad(format!("unexpected output dtype: {e}")))
}

impl Backend for ModelBackend {
    fn tokenize(&self, fragment: &CodeFragment) -> Result<TokenSequence> {
        fragment.validate()?;
        let encoding = self
            .tokenizer
            .encode(fragment.source.as_str(), true)
            .map_err(|e| SimlensError::TokenizerLoad(format!("encoding failed: {e}")))?;
        let ids = encoding.get_ids();
        let surfaces = encoding.get_tokens();
        let offsets = encoding.get_offsets();
        let specials = encoding.get_special_tokens_mask();
        let mut tokens = Vec::with_capacity(ids.len());
        for i in 0..ids.len() {
            tokens.push(Token {
                token_id: ids[i],
                surface: surfaces[i].clone(),
                char_span: (offsets[i].0, offsets[i].1),
                is_special: specials[i] == 1,
            });
        }
        check_length(tokens.len())?;
        Ok(TokenSequence {
            fragment_id: fragment.id.clone(),
            tokens,
        })
    }

    fn embed(&self, seq: &TokenSequence, _fragment: &CodeFragment) -> Result<EmbeddingMatrix> {
        if seq.is_empty() {
            return Err(SimlensError::EmptyInput);
        }
        let outputs = self.forward(seq)?;
        let n = seq.len();
        // Last-layer hidden states: the first rank-3 output shaped [1, n, d].
        for value in outputs.iter() {
            let arr = to_f64_view(value)?;
            if arr.ndim() == 3 && arr.shape()[0] == 1 && arr.shape()[1] == n {
                let d = arr.shape()[2];
                let flat: Vec<f64> = arr.iter().cloned().collect();
                let values = Array2::from_shape_vec((n, d), flat).unwrap();
                return Ok(EmbeddingMatrix {
                    fragment_id: seq.fragment_id.clone(),
                    values,
                });
            }
        }
        Err(SimlensError::DimensionMismatch {
            expected: n,
            got: outputs.first().map(|v| v.shape().iter().product()).unwrap_or(0),
        })
    }

    fn attentions(&self, seq: &TokenSequence, _fragment: &CodeFragment) -> Result<AttentionTensor> {
        if seq.is_empty() {
            return Err(SimlensError::EmptyInput);
        }
        let outputs = self.forward(seq)?;
        let n = seq.len();
        // Last rank-4 output shaped [1, H, n, n] = last layer's attention.
        let mut last: Option<Array3<f64>> = None;
        for value in outputs.iter() {
            let arr = to_f64_view(value)?;
            if arr.ndim() == 4 && arr.shape()[0] == 1 && arr.shape()[2] == n && arr.shape()[3] == n {
                let h = arr.shape()[1];
                let flat: Vec<f64> = arr.iter().cloned().collect();
                last = Some(Array3::from_shape_vec((h, n, n), flat).unwrap());
            }
        }
        match last {
            Some(values) => Ok(AttentionTensor {
                fragment_id: seq.fragment_id.clone(),
                values,
            }),
            None => Err(SimlensError::AttentionUnavailable(
                "no [1, H, n, n] output found; export the graph with attention outputs".into(),
            )),
        }
    }
}
