//! Thin async client for the okgd detection service. Request/response types
//! live in `okgd_core::api`; this crate only does HTTP.

use okgd_core::api::{
    BenchRequest, BenchResponse, CreateSessionRequest, CreateSessionResponse, DetectRequest,
    DetectResponse, ErrorBody, PushFramesRequest, PushFramesResponse, SessionStatus,
    SynthRequest, SynthResponse,
};
use okgd_core::Frame;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    /// The service answered with a non-2xx status.
    #[error("service returned {status}: {message}")]
    Api { status: u16, message: String },
    /// Transport or decoding failure.
    #[error(transparent)]
    Http(#[from] reqwest::Error),
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8787`.
    pub fn new(base: impl Into<String>) -> Self {
        let mut base = base.into();
        while base.ends_with('/') {
            base.pop();
        }
        Client { base, http: reqwest::Client::new() }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T> {
        let status = resp.status();
        if status.is_success() {
            Ok(resp.json().await?)
        } else {
            let message = match resp.json::<ErrorBody>().await {
                Ok(body) => body.error,
                Err(_) => status.to_string(),
            };
            Err(ClientError::Api { status: status.as_u16(), message })
        }
    }

    async fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        path: &str,
        req: &Req,
    ) -> Result<Resp> {
        let resp = self
            .http
            .post(format!("{}{path}", self.base))
            .json(req)
            .send()
            .await?;
        Self::decode(resp).await
    }

    async fn get<Resp: DeserializeOwned>(&self, path: &str) -> Result<Resp> {
        let resp = self.http.get(format!("{}{path}", self.base)).send().await?;
        Self::decode(resp).await
    }

    pub async fn health(&self) -> Result<()> {
        let _: serde_json::Value = self.get("/healthz").await?;
        Ok(())
    }

    pub async fn detect(&self, req: &DetectRequest) -> Result<DetectResponse> {
        self.post("/v1/detect", req).await
    }

    pub async fn synth(&self, req: &SynthRequest) -> Result<SynthResponse> {
        self.post("/v1/synth", req).await
    }

    pub async fn bench(&self, req: &BenchRequest) -> Result<BenchResponse> {
        self.post("/v1/bench", req).await
    }

    pub async fn create_session(&self, req: &CreateSessionRequest) -> Result<CreateSessionResponse> {
        self.post("/v1/sessions", req).await
    }

    pub async fn session_status(&self, id: &str) -> Result<SessionStatus> {
        self.get(&format!("/v1/sessions/{id}")).await
    }

    pub async fn push_frames(&self, id: &str, frames: Vec<Frame>) -> Result<PushFramesResponse> {
        self.post(&format!("/v1/sessions/{id}/frames"), &PushFramesRequest { frames })
            .await
    }

    pub async fn session_result(&self, id: &str) -> Result<DetectResponse> {
        self.get(&format!("/v1/sessions/{id}/result")).await
    }

    pub async fn delete_session(&self, id: &str) -> Result<()> {
        let resp = self
            .http
            .delete(format!("{}/v1/sessions/{id}", self.base))
            .send()
            .await?;
        let status = resp.status();
        if status.is_success() {
            Ok(())
        } else {
            let message = match resp.json::<ErrorBody>().await {
                Ok(body) => body.error,
                Err(_) => status.to_string(),
            };
            Err(ClientError::Api { status: status.as_u16(), message })
        }
    }
}
