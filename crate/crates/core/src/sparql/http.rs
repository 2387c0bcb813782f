use std::io::Read;
use std::time::Duration;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use crate::kg::{TermTriple, RDF_TYPE};

use super::bgp::{render_count, render_page};
use super::{tsv, BgpQuery, QueryJob, SparqlBackend, SparqlError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub url: String,
    /// Graph IRI scoped with `FROM`.
    pub graph: Option<String>,
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub retries: u32,
    /// Ask for gzip content encoding.
    pub compress: bool,
    pub type_predicate: String,
    #[serde(default, skip_serializing)]
    pub bearer_token: Option<String>,
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        EndpointConfig {
            url: url.into(),
            graph: None,
            timeout: Duration::from_secs(60),
            retries: 2,
            compress: true,
            type_predicate: RDF_TYPE.to_string(),
            bearer_token: None,
        }
    }

    pub fn validate(&self) -> Result<(), SparqlError> {
        if self.url.is_empty() {
            return Err(SparqlError::UnsupportedParams("endpoint url is empty".into()));
        }
        if self.timeout.is_zero() {
            return Err(SparqlError::UnsupportedParams("timeout must be positive".into()));
        }
        Ok(())
    }
}

/// Endpoint client speaking the SPARQL protocol with POSTed form queries.
pub struct HttpBackend {
    config: EndpointConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(config: EndpointConfig) -> Result<Self, SparqlError> {
        config.validate()?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpBackend { config, agent })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    fn query_once(&self, query: &str) -> Result<String, SparqlError> {
        let mut req = self
            .agent
            .post(&self.config.url)
            .header("Accept", "text/tab-separated-values");
        if self.config.compress {
            req = req.header("Accept-Encoding", "gzip");
        }
        if let Some(token) = &self.config.bearer_token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req
            .send_form([("query", query)])
            .map_err(|e| SparqlError::EndpointUnreachable(e.to_string()))?;
        let status = resp.status().as_u16();
        let gzipped = resp
            .headers()
            .get("content-encoding")
            .and_then(|v| v.to_str().ok())
            .is_some_and(|v| v.eq_ignore_ascii_case("gzip"));
        let raw = resp
            .body_mut()
            .with_config()
            .limit(u64::MAX)
            .read_to_vec()
            .map_err(|e| SparqlError::EndpointUnreachable(e.to_string()))?;
        let bytes = if gzipped {
            let mut out = Vec::new();
            MultiGzDecoder::new(&raw[..])
                .read_to_end(&mut out)
                .map_err(|e| SparqlError::BadResponse(format!("gzip: {e}")))?;
            out
        } else {
            raw
        };
        let body = String::from_utf8(bytes)
            .map_err(|_| SparqlError::BadResponse("response is not UTF-8".into()))?;
        match status {
            200..=299 => Ok(body),
            _ => Err(SparqlError::QueryRejected { status, body }),
        }
    }

    /// Sends `query`, retrying transport failures and 5xx responses.
    pub fn query(&self, query: &str) -> Result<String, SparqlError> {
        let mut attempt = 0;
        loop {
            match self.query_once(query) {
                Ok(body) => return Ok(body),
                Err(e) if attempt < self.config.retries && retryable(&e) => {
                    attempt += 1;
                    log::warn!("query attempt {attempt} failed: {e}; retrying");
                    std::thread::sleep(Duration::from_millis(50 << attempt.min(6)));
                }
                Err(e) => return Err(e),
            }
        }
    }
}

fn retryable(e: &SparqlError) -> bool {
    match e {
        SparqlError::EndpointUnreachable(_) => true,
        SparqlError::QueryRejected { status, .. } => *status >= 500,
        _ => false,
    }
}

impl SparqlBackend for HttpBackend {
    fn id(&self) -> String {
        format!("endpoint:{}", self.config.url)
    }

    fn count(&self, bgp: &BgpQuery, branch: usize) -> Result<u64, SparqlError> {
        let body = self.query(&render_count(bgp, branch, self.config.graph.as_deref()))?;
        tsv::parse_count(&body).map_err(SparqlError::BadResponse)
    }

    fn fetch(&self, bgp: &BgpQuery, job: &QueryJob) -> Result<Vec<TermTriple>, SparqlError> {
        let query = render_page(bgp, job.branch, self.config.graph.as_deref(), job.limit, job.offset);
        let body = self.query(&query)?;
        tsv::parse_triples(&body).map_err(SparqlError::BadResponse)
    }
}
