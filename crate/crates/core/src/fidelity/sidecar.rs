//! Client for an external embedding process speaking line-delimited JSON
//! over stdin/stdout.
//!
//! The process must first print `{"op":"hello","dim":D,"deterministic":true}`.
//! Each request is `{"id":N,"op":"embed","format":"gray224","image":B64}` where
//! `B64` is the base64 of 224*224 row-major 8-bit gray samples. Replies are
//! `{"id":N,"embedding":[...],"dim":D}` or `{"id":N,"error":"..."}`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use base64::Engine;
use serde::Deserialize;
use serde_json::json;

use super::preprocess::{resize_bilinear, EVAL_SIDE};
use super::semantic::EmbeddingProvider;
use crate::error::{Error, Result};
use crate::media::GrayImage;

const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Deserialize)]
struct Hello {
    op: String,
    dim: usize,
    #[serde(default)]
    deterministic: bool,
    #[serde(default)]
    model: Option<String>,
}

#[derive(Debug, Deserialize)]
struct Reply {
    id: i64,
    #[serde(default)]
    embedding: Option<Vec<f64>>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    error: Option<String>,
}

pub struct SidecarProvider {
    command: String,
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    dim: usize,
    model: Option<String>,
    next_id: i64,
}

fn provider_err(msg: impl Into<String>) -> Error {
    Error::Provider(msg.into())
}

impl SidecarProvider {
    /// Start `command` through the shell and complete the handshake.
    pub fn spawn(command: &str) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| provider_err(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut me = Self { command: command.to_string(), child, stdin, stdout, dim: 0, model: None, next_id: 0 };
        let line = me.read_line()?;
        let hello: Hello =
            serde_json::from_str(&line).map_err(|e| provider_err(format!("bad handshake `{line}`: {e}")))?;
        if hello.op != "hello" {
            return Err(provider_err(format!("expected hello, got op `{}`", hello.op)));
        }
        if !hello.deterministic {
            return Err(provider_err("provider does not declare deterministic evaluation"));
        }
        if hello.dim == 0 {
            return Err(provider_err("provider declared dim 0"));
        }
        me.dim = hello.dim;
        me.model = hello.model;
        Ok(me)
    }

    fn read_line(&mut self) -> Result<String> {
        let mut line = String::new();
        let n = self.stdout.read_line(&mut line).map_err(|e| provider_err(format!("read failed: {e}")))?;
        if n == 0 {
            return Err(provider_err("provider closed its output"));
        }
        Ok(line.trim_end().to_string())
    }

    fn encode(image: &GrayImage) -> String {
        let img = if image.width == EVAL_SIDE && image.height == EVAL_SIDE {
            image.clone()
        } else {
            resize_bilinear(image, EVAL_SIDE, EVAL_SIDE)
        };
        let raw: Vec<u8> = img.data.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
        base64::engine::general_purpose::STANDARD.encode(raw)
    }
}

impl EmbeddingProvider for SidecarProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&mut self, image: &GrayImage) -> Result<Vec<f64>> {
        let id = self.next_id;
        self.next_id += 1;
        let req = json!({"id": id, "op": "embed", "format": "gray224", "image": Self::encode(image)});
        writeln!(self.stdin, "{req}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| provider_err(format!("write failed: {e}")))?;
        let line = self.read_line()?;
        let reply: Reply = serde_json::from_str(&line).map_err(|e| provider_err(format!("bad reply: {e}")))?;
        if reply.id != id {
            return Err(provider_err(format!("reply id {} does not match request {id}", reply.id)));
        }
        if let Some(e) = reply.error {
            return Err(provider_err(format!("request {id}: {e}")));
        }
        let emb = reply.embedding.ok_or_else(|| provider_err("reply has neither embedding nor error"))?;
        if emb.len() != self.dim || reply.dim.is_some_and(|d| d != self.dim) {
            return Err(provider_err(format!("embedding dim {} differs from handshake {}", emb.len(), self.dim)));
        }
        let norm = emb.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(provider_err(format!("embedding norm {norm} is not 1")));
        }
        Ok(emb)
    }

    fn name(&self) -> String {
        match &self.model {
            Some(m) => format!("sidecar:{m}"),
            None => format!("sidecar:{}", self.command),
        }
    }
}

impl Drop for SidecarProvider {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
