use super::jsonapi::JsonApiSpec;
use crate::vsql::OperatorInvocation;
use crate::vtable::{AttributeProcessorSpec, FetchContext, Operator, OperatorError, SourceRecord};

/// A JSON API source with fixed defaults and optional attribute processors.
#[derive(Debug, Clone)]
pub struct Preset {
    spec: JsonApiSpec,
    processors: Vec<AttributeProcessorSpec>,
}

impl Preset {
    pub fn new(spec: JsonApiSpec, processors: Vec<AttributeProcessorSpec>) -> Self {
        Self { spec, processors }
    }

    pub fn spec(&self) -> &JsonApiSpec {
        &self.spec
    }
}

impl Operator for Preset {
    fn check_args(&self, inv: &OperatorInvocation) -> Result<(), String> {
        for r in &self.spec.required {
            if inv.arg(r).is_none() {
                return Err(format!("missing '{r}'"));
            }
        }
        Ok(())
    }

    fn fetch(
        &self,
        inv: &OperatorInvocation,
        ctx: &FetchContext<'_>,
    ) -> Result<Vec<SourceRecord>, OperatorError> {
        self.spec.fetch(inv, ctx)
    }

    fn processors(&self, _inv: &OperatorInvocation) -> Vec<AttributeProcessorSpec> {
        self.processors.clone()
    }
}

fn spec(url: &str, records: &str, attrs: &str, token_env: &str, required: &[&str]) -> JsonApiSpec {
    JsonApiSpec {
        url: Some(url.to_string()),
        records: Some(records.to_string()),
        attrs: Some(attrs.to_string()),
        token_env: Some(token_env.to_string()),
        required: required.iter().map(|s| s.to_string()).collect(),
    }
}

/// `(twitterapi key:...)`: tweets with a `sentiment` column derived from `text`.
pub fn twitter_preset(sentiment_address: Option<String>, timeout_ms: u64) -> Preset {
    Preset::new(
        spec(
            "https://api.twitter.com/1.1/search/tweets.json?q={key}",
            "statuses[*]",
            "id=id_str,username=user.screen_name,text",
            "VWEAVE_TWITTER_TOKEN",
            &["key"],
        ),
        vec![AttributeProcessorSpec::sentiment(
            "text",
            sentiment_address,
            timeout_ms,
        )],
    )
}

/// `(foursqr key:... near:...)`: venue search.
pub fn foursquare_preset() -> Preset {
    Preset::new(
        spec(
            "https://api.foursquare.com/v2/venues/search?query={key}&near={near}",
            "response.venues[*]",
            "id,name,category=categories[0].name,hereNow.count,contact",
            "VWEAVE_FOURSQUARE_TOKEN",
            &["key", "near"],
        ),
        vec![],
    )
}

/// `(yelp key:... near:...)`: business search.
pub fn yelp_preset() -> Preset {
    Preset::new(
        spec(
            "https://api.yelp.com/v3/businesses/search?term={key}&location={near}",
            "businesses[*]",
            "id,name,rating",
            "VWEAVE_YELP_TOKEN",
            &["key", "near"],
        ),
        vec![],
    )
}
