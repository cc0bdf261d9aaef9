#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "viewgraph/config.hpp"
#include "viewgraph/dataio.hpp"
#include "viewgraph/model.hpp"
#include "viewgraph/tensor.hpp"

namespace viewgraph {

/// Fraction of shapes whose most probable class equals the label (ties go to
/// the lowest class index). Throws on an empty dataset.
double accuracy(const ModelParams& params, const TrainConfig& config, const Dataset& dataset);

/// Global feature F of every shape, one row per sample.
Matrix global_features(const ModelParams& params, const TrainConfig& config, const Dataset& dataset);

enum class Distance { euclidean, cosine };
enum class RetrievalRange { test_test, test_train, train_train, all_all };

std::string to_string(Distance d);
std::string to_string(RetrievalRange r);
Distance parse_distance(const std::string& s);
RetrievalRange parse_range(const std::string& s);

/// Queries ranked against a gallery. A gallery item whose id equals the
/// query's id is the query itself and is left out of its ranking.
struct RetrievalRun {
    Matrix queries;
    std::vector<std::size_t> query_labels;
    std::vector<std::size_t> query_ids;
    Matrix gallery;
    std::vector<std::size_t> gallery_labels;
    std::vector<std::size_t> gallery_ids;
    Distance distance = Distance::euclidean;
    RetrievalRange range = RetrievalRange::test_test;

    void validate() const;
};

/// Query set ranked against itself (test-test / train-train).
RetrievalRun self_retrieval(Matrix features, std::vector<std::size_t> labels, Distance distance,
                            RetrievalRange range);

/// Queries against a disjoint gallery.
RetrievalRun cross_retrieval(Matrix queries, std::vector<std::size_t> query_labels, Matrix gallery,
                             std::vector<std::size_t> gallery_labels, Distance distance, RetrievalRange range);

double feature_distance(std::span<const double> a, std::span<const double> b, Distance distance);

/// Gallery indices by increasing distance (ties by index), self-match removed.
std::vector<std::size_t> rank_gallery(const RetrievalRun& run, std::size_t query);

/// Relevance (same label) of each ranked gallery item.
std::vector<bool> ranked_relevance(const RetrievalRun& run, std::size_t query);

/// Average precision per query; a query without relevant items scores 0.
std::vector<double> average_precisions(const RetrievalRun& run);
double mean_average_precision(const RetrievalRun& run);

struct CutoffMetrics {
    double precision = 0.0;  // P@N
    double recall = 0.0;     // R@N
    double f1 = 0.0;         // F1@N
    double map = 0.0;        // mAP@N
    double ndcg = 0.0;       // NDCG@N

    friend bool operator==(const CutoffMetrics&, const CutoffMetrics&) = default;
};

struct ShrecMetrics {
    CutoffMetrics micro;  // mean over queries
    CutoffMetrics macro;  // mean over classes of per-class means
    std::vector<CutoffMetrics> per_query;
};

/// Metrics at cutoff N for one ranked relevance list; `relevant` is the number
/// of relevant gallery items for the query.
CutoffMetrics cutoff_metrics(const std::vector<bool>& relevance, std::size_t relevant, std::size_t cutoff);

/// P@N, R@N, F1@N, mAP@N, NDCG@N (binary gains, log2 discount). Without an
/// explicit cutoff, N per query is the number of relevant gallery items.
ShrecMetrics shrec_metrics(const RetrievalRun& run, std::optional<std::size_t> cutoff = std::nullopt);

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
};

/// Interpolated precision at `points` recall levels 0, 1/(points-1), ..., 1,
/// averaged over queries.
std::vector<PrPoint> pr_curve(const RetrievalRun& run, std::size_t points = 11);

/// Header: recall,precision
void write_pr_curve_csv(std::ostream& out, const std::vector<PrPoint>& curve);

/// Header: average,P@N,R@N,F1@N,mAP@N,NDCG@N with rows `micro` and `macro`.
void write_metrics_csv(std::ostream& out, const ShrecMetrics& metrics);

}  // namespace viewgraph
