//! Published CROANN error rates (%), reproduced for side-by-side reports.

use croann::stats::Stats;

#[derive(Debug, Clone, Copy)]
pub struct PublishedRow {
    pub dataset: &'static str,
    pub train: Stats,
    pub validation: Stats,
    pub test: Stats,
}

const fn stats(mean: f64, std: f64, min: f64, max: f64) -> Stats {
    Stats {
        mean,
        std,
        min,
        max,
    }
}

pub const PUBLISHED: &[PublishedRow] = &[
    PublishedRow {
        dataset: "iris",
        train: stats(2.00, 3.68, 0.00, 5.33),
        validation: stats(4.32, 2.16, 2.70, 8.10),
        test: stats(1.31, 1.77, 0.00, 7.89),
    },
    PublishedRow {
        dataset: "cancer",
        train: stats(3.89, 0.72, 3.21, 5.61),
        validation: stats(3.54, 0.42, 2.86, 4.00),
        test: stats(1.06, 0.67, 0.00, 2.29),
    },
    PublishedRow {
        dataset: "diabetes",
        train: stats(16.55, 2.73, 15.89, 18.23),
        validation: stats(16.04, 3.01, 14.58, 17.71),
        test: stats(19.67, 5.38, 17.19, 23.44),
    },
];

pub fn published(dataset: &str) -> Option<&'static PublishedRow> {
    PUBLISHED.iter().find(|r| r.dataset == dataset)
}
