//! Change request description updates through the hosting service's REST
//! API (GitLab v4 merge request resource).

use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};

use super::ServiceError;

pub const LINK_BEGIN: &str = "<!-- codecity:link:begin -->";
pub const LINK_END: &str = "<!-- codecity:link:end -->";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GhsConfig {
    pub base_url: String,
    pub project_id: String,
    pub cr_id: String,
    pub token_env_var: String,
}

impl GhsConfig {
    /// Reads the access token from the configured variable through `env`.
    pub fn token(&self, env: impl Fn(&str) -> Option<String>) -> Result<String, ServiceError> {
        env(&self.token_env_var)
            .filter(|t| !t.is_empty())
            .ok_or_else(|| ServiceError::Credentials(format!("no token in ${}", self.token_env_var)))
    }

    fn endpoint(&self) -> String {
        format!(
            "{}/api/v4/projects/{}/merge_requests/{}",
            self.base_url.trim_end_matches('/'),
            utf8_percent_encode(&self.project_id, NON_ALPHANUMERIC),
            utf8_percent_encode(&self.cr_id, NON_ALPHANUMERIC)
        )
    }
}

fn block(link: &str) -> String {
    format!("{LINK_BEGIN}\n[Open the software-city comparison]({link})\n{LINK_END}")
}

/// Replaces the first marker block with one carrying `link`, drops any
/// further blocks, and appends a block when none exists.
pub fn upsert_marker_block(description: &str, link: &str) -> String {
    let mut out = String::with_capacity(description.len() + 128);
    let mut rest = description;
    let mut placed = false;
    while let Some(b) = rest.find(LINK_BEGIN) {
        let Some(e) = rest[b..].find(LINK_END) else { break };
        out.push_str(&rest[..b]);
        if !placed {
            out.push_str(&block(link));
            placed = true;
        }
        rest = &rest[b + e + LINK_END.len()..];
    }
    out.push_str(rest);
    if !placed {
        let sep = if out.is_empty() || out.ends_with("\n\n") {
            ""
        } else if out.ends_with('\n') {
            "\n"
        } else {
            "\n\n"
        };
        out.push_str(sep);
        out.push_str(&block(link));
    }
    out
}

#[derive(Deserialize)]
struct MergeRequest {
    #[serde(default)]
    description: Option<String>,
}

fn classify(status: reqwest::StatusCode, body: String) -> ServiceError {
    match status.as_u16() {
        401 | 403 => ServiceError::Credentials(format!("hosting service answered {status}")),
        404 => ServiceError::NotFound("change request".into()),
        s if s >= 500 => ServiceError::Transport(format!("hosting service answered {status}")),
        s => ServiceError::Remote { status: s, body },
    }
}

fn transport(e: reqwest::Error) -> ServiceError {
    ServiceError::Transport(e.to_string())
}

/// Fetches the change request description, upserts the link block and
/// writes it back when it changed. Returns the resulting description.
pub async fn upsert_cr_link(client: &reqwest::Client, ghs: &GhsConfig, token: &str, link: &str) -> Result<String, ServiceError> {
    let url = ghs.endpoint();
    let resp = client.get(&url).header("PRIVATE-TOKEN", token).send().await.map_err(transport)?;
    let status = resp.status();
    if !status.is_success() {
        let body = resp.text().await.unwrap_or_default();
        return Err(classify(status, body));
    }
    let mr: MergeRequest = resp.json().await.map_err(transport)?;
    let current = mr.description.unwrap_or_default();
    let updated = upsert_marker_block(&current, link);
    if updated == current {
        return Ok(updated);
    }
    let resp = client
        .put(&url)
        .header("PRIVATE-TOKEN", token)
        .json(&serde_json::json!({ "description": updated }))
        .send()
        .await
        .map_err(transport)?;
    let status = resp.status();
    if !status.is_success() {
        let body = resp.text().await.unwrap_or_default();
        return Err(classify(status, body));
    }
    Ok(updated)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appended_once() {
        let d = upsert_marker_block("Fixes the owner form.", "https://v/x");
        assert_eq!(d.matches(LINK_BEGIN).count(), 1);
        assert!(d.starts_with("Fixes the owner form.\n\n<!--"));
        assert_eq!(upsert_marker_block(&d, "https://v/x"), d);
    }

    #[test]
    fn replaced_in_place() {
        let d = format!("intro\n{LINK_BEGIN}\nold\n{LINK_END}\noutro");
        let u = upsert_marker_block(&d, "https://v/new");
        assert!(u.starts_with("intro\n") && u.ends_with("\noutro"));
        assert!(u.contains("(https://v/new)") && !u.contains("old"));
    }

    #[test]
    fn duplicate_blocks_collapse() {
        let d = format!("{LINK_BEGIN}a{LINK_END} mid {LINK_BEGIN}b{LINK_END}");
        let u = upsert_marker_block(&d, "L");
        assert_eq!(u.matches(LINK_BEGIN).count(), 1);
        assert!(u.ends_with(" mid "));
    }

    #[test]
    fn empty_description() {
        assert!(upsert_marker_block("", "L").starts_with(LINK_BEGIN));
    }

    #[test]
    fn endpoint_encodes_project_path() {
        let g = GhsConfig { base_url: "http://h/".into(), project_id: "group/app".into(), cr_id: "7".into(), token_env_var: "T".into() };
        assert_eq!(g.endpoint(), "http://h/api/v4/projects/group%2Fapp/merge_requests/7");
        assert!(matches!(g.token(|_| None), Err(ServiceError::Credentials(_))));
        assert_eq!(g.token(|_| Some("x".into())).unwrap(), "x");
    }
}
