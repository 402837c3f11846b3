//! F1@5 / F1@M scoring, present / absent / semi-present splits, and
//! sentence-count bucket analysis.

mod attention;
mod buckets;
mod normalize;
mod report;
mod score;
mod split;

pub use attention::{attention_dump, AttentionCondition, AttentionDump, AttentionStep};
pub use buckets::{
    bucket_analysis, bucketize, quantile_edges, relative_gain, BucketAnalysis, BucketComparison,
    BucketGains, BucketMeans, SentenceBucket,
};
pub use normalize::{normalize_and_dedup, normalize_phrase, normalize_token, MatchConfig, Stemmer};
pub use report::{
    evaluate, DocScores, DocSplitScore, MetricsReport, PredictionRecord, SplitSummary, Splits,
    REPORT_VERSION,
};
pub use score::{f1_at_5, f1_at_k, f1_at_m, Prf, Scored};
pub use split::{split_eval, SplitInputs, SplitPair};
