//! JSON-over-HTTP text client: `POST {prompt, image_id?}` → `{text}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use spatialqa::cot::{ClientError, TextClient};

pub const LLM_URL_VAR: &str = "SPATIALQA_LLM_URL";
pub const VLM_URL_VAR: &str = "SPATIALQA_VLM_URL";
pub const API_KEY_VAR: &str = "SPATIALQA_API_KEY";

#[derive(Serialize)]
struct Request<'a> {
    prompt: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    image_id: Option<&'a str>,
}

#[derive(Deserialize)]
struct Reply {
    text: String,
}

pub struct HttpClient {
    url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(url: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
        Self {
            url: url.into(),
            api_key,
            agent,
        }
    }

    /// Endpoint from `url_var`, bearer token from `SPATIALQA_API_KEY` if set.
    pub fn from_env(url_var: &str) -> Result<Self, String> {
        let url = std::env::var(url_var).map_err(|_| format!("{url_var} is not set"))?;
        let key = std::env::var(API_KEY_VAR).ok().filter(|k| !k.is_empty());
        Ok(Self::new(url, key, Duration::from_secs(120)))
    }
}

impl TextClient for HttpClient {
    fn send(&self, prompt: &str, image_id: Option<&str>) -> Result<String, ClientError> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let fail = |e: ureq::Error| ClientError(format!("{}: {e}", self.url));
        let mut resp = req.send_json(Request { prompt, image_id }).map_err(fail)?;
        let reply: Reply = resp.body_mut().read_json().map_err(fail)?;
        Ok(reply.text)
    }
}

#[cfg(test)]
mod tests {
    use std::net::TcpListener;

    use super::*;
    use crate::testutil::serve;

    #[test]
    fn speaks_the_wire_format() {
        let (url, server) = serve(2, |body, auth| format!("{body}|{auth}"));
        let client = HttpClient::new(&url, Some("k3y".into()), Duration::from_secs(10));
        let reply = client.send("how far?", Some("img7")).unwrap();
        assert_eq!(reply, r#"{"image_id":"img7","prompt":"how far?"}|Bearer k3y"#);
        let anon = HttpClient::new(&url, None, Duration::from_secs(10));
        assert_eq!(anon.send("hi", None).unwrap(), r#"{"prompt":"hi"}|"#);
        server.join().unwrap();
    }

    #[test]
    fn refused_connection_is_a_client_error() {
        let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let client = HttpClient::new(format!("http://127.0.0.1:{port}/"), None, Duration::from_secs(2));
        assert!(client.send("x", None).is_err());
    }
}
