#include "viewgraph/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>

#include "viewgraph/error.hpp"

namespace viewgraph {

double accuracy(const ModelParams& params, const TrainConfig& config, const Dataset& dataset) {
    if (dataset.empty()) throw InvalidArgument("accuracy of an empty dataset is undefined");
    std::size_t correct = 0;
    for (const auto& s : dataset.samples)
        correct += predicted_class(forward(s, params, config).probabilities) == s.label ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

Matrix global_features(const ModelParams& params, const TrainConfig& config, const Dataset& dataset) {
    Matrix out(dataset.size(), config.features);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Vector f = forward(dataset.samples[i], params, config).feature;
        std::copy(f.begin(), f.end(), out.row(i).begin());
    }
    return out;
}

std::string to_string(Distance d) { return d == Distance::cosine ? "cosine" : "euclidean"; }

std::string to_string(RetrievalRange r) {
    switch (r) {
        case RetrievalRange::test_test: return "test-test";
        case RetrievalRange::test_train: return "test-train";
        case RetrievalRange::train_train: return "train-train";
        case RetrievalRange::all_all: return "all-all";
    }
    return "test-test";
}

Distance parse_distance(const std::string& s) {
    if (s == "euclidean") return Distance::euclidean;
    if (s == "cosine") return Distance::cosine;
    throw InvalidArgument("unknown distance '" + s + "'");
}

RetrievalRange parse_range(const std::string& s) {
    for (auto r : {RetrievalRange::test_test, RetrievalRange::test_train, RetrievalRange::train_train,
                   RetrievalRange::all_all})
        if (to_string(r) == s) return r;
    throw InvalidArgument("unknown retrieval range '" + s + "'");
}

void RetrievalRun::validate() const {
    if (queries.rows() == 0 || gallery.rows() == 0) throw InvalidArgument("retrieval sets must be nonempty");
    if (queries.cols() != gallery.cols()) throw InvalidArgument("query and gallery feature dimensions differ");
    if (query_labels.size() != queries.rows() || query_ids.size() != queries.rows())
        throw InvalidArgument("query labels/ids do not match query count");
    if (gallery_labels.size() != gallery.rows() || gallery_ids.size() != gallery.rows())
        throw InvalidArgument("gallery labels/ids do not match gallery count");
}

RetrievalRun self_retrieval(Matrix features, std::vector<std::size_t> labels, Distance distance,
                            RetrievalRange range) {
    RetrievalRun run;
    std::vector<std::size_t> ids(features.rows());
    std::iota(ids.begin(), ids.end(), 0);
    run.queries = features;
    run.gallery = std::move(features);
    run.query_labels = labels;
    run.gallery_labels = std::move(labels);
    run.query_ids = ids;
    run.gallery_ids = std::move(ids);
    run.distance = distance;
    run.range = range;
    run.validate();
    return run;
}

RetrievalRun cross_retrieval(Matrix queries, std::vector<std::size_t> query_labels, Matrix gallery,
                             std::vector<std::size_t> gallery_labels, Distance distance, RetrievalRange range) {
    RetrievalRun run;
    run.query_ids.resize(queries.rows());
    std::iota(run.query_ids.begin(), run.query_ids.end(), 0);
    run.gallery_ids.resize(gallery.rows());
    std::iota(run.gallery_ids.begin(), run.gallery_ids.end(), queries.rows());
    run.queries = std::move(queries);
    run.gallery = std::move(gallery);
    run.query_labels = std::move(query_labels);
    run.gallery_labels = std::move(gallery_labels);
    run.distance = distance;
    run.range = range;
    run.validate();
    return run;
}

double feature_distance(std::span<const double> a, std::span<const double> b, Distance distance) {
    if (a.size() != b.size()) throw InvalidArgument("feature_distance: length mismatch");
    if (distance == Distance::euclidean) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    }
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 1.0;
    return 1.0 - dot(a, b) / (na * nb);
}

std::vector<std::size_t> rank_gallery(const RetrievalRun& run, std::size_t query) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(run.gallery.rows());
    for (std::size_t g = 0; g < run.gallery.rows(); ++g) {
        if (run.gallery_ids[g] == run.query_ids[query]) continue;
        scored.emplace_back(feature_distance(run.queries.row(query), run.gallery.row(g), run.distance), g);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<std::size_t> order;
    order.reserve(scored.size());
    for (const auto& s : scored) order.push_back(s.second);
    return order;
}

std::vector<bool> ranked_relevance(const RetrievalRun& run, std::size_t query) {
    const auto order = rank_gallery(run, query);
    std::vector<bool> rel(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) rel[k] = run.gallery_labels[order[k]] == run.query_labels[query];
    return rel;
}

std::vector<double> average_precisions(const RetrievalRun& run) {
    run.validate();
    std::vector<double> ap(run.queries.rows(), 0.0);
    for (std::size_t q = 0; q < ap.size(); ++q) {
        const auto rel = ranked_relevance(run, q);
        const auto relevant = static_cast<std::size_t>(std::count(rel.begin(), rel.end(), true));
        ap[q] = cutoff_metrics(rel, relevant, rel.size()).map;
    }
    return ap;
}

double mean_average_precision(const RetrievalRun& run) {
    const auto ap = average_precisions(run);
    double s = 0.0;
    for (double v : ap) s += v;
    return s / static_cast<double>(ap.size());
}

CutoffMetrics cutoff_metrics(const std::vector<bool>& relevance, std::size_t relevant, std::size_t cutoff) {
    CutoffMetrics m;
    if (relevant == 0 || cutoff == 0) return m;
    const std::size_t n = std::min(cutoff, relevance.size());
    std::size_t hits = 0;
    double precision_sum = 0.0;
    double dcg = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!relevance[k]) continue;
        ++hits;
        precision_sum += static_cast<double>(hits) / static_cast<double>(k + 1);
        dcg += 1.0 / std::log2(static_cast<double>(k + 2));
    }
    double ideal = 0.0;
    for (std::size_t k = 0; k < std::min(relevant, cutoff); ++k) ideal += 1.0 / std::log2(static_cast<double>(k + 2));

    m.precision = static_cast<double>(hits) / static_cast<double>(cutoff);
    m.recall = static_cast<double>(hits) / static_cast<double>(relevant);
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.map = precision_sum / static_cast<double>(std::min(relevant, cutoff));
    m.ndcg = dcg / ideal;
    return m;
}

namespace {

void accumulate(CutoffMetrics& into, const CutoffMetrics& m) {
    into.precision += m.precision;
    into.recall += m.recall;
    into.f1 += m.f1;
    into.map += m.map;
    into.ndcg += m.ndcg;
}

CutoffMetrics scaled(CutoffMetrics m, double s) {
    m.precision *= s;
    m.recall *= s;
    m.f1 *= s;
    m.map *= s;
    m.ndcg *= s;
    return m;
}

}  // namespace

ShrecMetrics shrec_metrics(const RetrievalRun& run, std::optional<std::size_t> cutoff) {
    run.validate();
    ShrecMetrics out;
    std::map<std::size_t, std::pair<CutoffMetrics, std::size_t>> by_class;
    for (std::size_t q = 0; q < run.queries.rows(); ++q) {
        const auto rel = ranked_relevance(run, q);
        const auto relevant = static_cast<std::size_t>(std::count(rel.begin(), rel.end(), true));
        const CutoffMetrics m = cutoff_metrics(rel, relevant, cutoff.value_or(relevant));
        out.per_query.push_back(m);
        accumulate(out.micro, m);
        auto& slot = by_class[run.query_labels[q]];
        accumulate(slot.first, m);
        ++slot.second;
    }
    out.micro = scaled(out.micro, 1.0 / static_cast<double>(run.queries.rows()));
    for (const auto& [label, slot] : by_class)
        accumulate(out.macro, scaled(slot.first, 1.0 / static_cast<double>(slot.second)));
    out.macro = scaled(out.macro, 1.0 / static_cast<double>(by_class.size()));
    return out;
}

std::vector<PrPoint> pr_curve(const RetrievalRun& run, std::size_t points) {
    run.validate();
    if (points < 2) throw InvalidArgument("a PR curve needs at least two recall levels");
    std::vector<PrPoint> curve(points);
    for (std::size_t i = 0; i < points; ++i)
        curve[i].recall = static_cast<double>(i) / static_cast<double>(points - 1);

    for (std::size_t q = 0; q < run.queries.rows(); ++q) {
        const auto rel = ranked_relevance(run, q);
        const auto relevant = static_cast<std::size_t>(std::count(rel.begin(), rel.end(), true));
        if (relevant == 0) continue;
        // Running max of precision from the tail gives the interpolated value
        // at each rank; recall is non-decreasing along the ranking.
        std::vector<double> precision(rel.size()), recall(rel.size());
        std::size_t hits = 0;
        for (std::size_t k = 0; k < rel.size(); ++k) {
            hits += rel[k] ? 1 : 0;
            precision[k] = static_cast<double>(hits) / static_cast<double>(k + 1);
            recall[k] = static_cast<double>(hits) / static_cast<double>(relevant);
        }
        for (std::size_t k = rel.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
        std::size_t k = 0;
        for (auto& pt : curve) {
            while (k < rel.size() && recall[k] < pt.recall) ++k;
            if (k < rel.size()) pt.precision += precision[k];
        }
    }
    for (auto& pt : curve) pt.precision /= static_cast<double>(run.queries.rows());
    return curve;
}

void write_pr_curve_csv(std::ostream& out, const std::vector<PrPoint>& curve) {
    out << "recall,precision\n" << std::setprecision(17);
    for (const auto& pt : curve) out << pt.recall << ',' << pt.precision << '\n';
}

void write_metrics_csv(std::ostream& out, const ShrecMetrics& m) {
    out << "average,P@N,R@N,F1@N,mAP@N,NDCG@N\n" << std::setprecision(17);
    auto row = [&](const char* name, const CutoffMetrics& c) {
        out << name << ',' << c.precision << ',' << c.recall << ',' << c.f1 << ',' << c.map << ',' << c.ndcg << '\n';
    };
    row("micro", m.micro);
    row("macro", m.macro);
}

}  // namespace viewgraph
