// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "oracles/oracles.hpp"
#include "viewgraph/checkpoint.hpp"
#include "viewgraph/correlation.hpp"
#include "viewgraph/error.hpp"
#include "viewgraph/evalmetrics.hpp"
#include "viewgraph/semantics.hpp"
#include "viewgraph/trainer.hpp"

using namespace viewgraph;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Vector random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Vector v(n);
    for (double& x : v) x = g(rng);
    return v;
}

std::vector<Vec3> random_dirs(std::size_t v, std::mt19937_64& rng) {
    std::vector<Vec3> out;
    for (std::size_t j = 0; j < v; ++j) {
        const Vector d = random_vector(3, rng);
        const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        out.push_back({d[0] / n, d[1] / n, d[2] / n});
    }
    return out;
}

ModelParams random_params(const TrainConfig& c, std::mt19937_64& rng) {
    ModelParams p = ModelParams::initialize(c, rng());
    std::normal_distribution<double> g(0.0, 0.5);
    for (auto& b : blocks(p))
        for (double& v : b.values) v = g(rng);
    return p;
}

double simplex_error(std::span<const double> p) {
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) return 1.0;
        s += v;
    }
    return std::abs(s - 1.0);
}

// 1 --------------------------------------------------------------------------
Outcome gradient_certification() {
    TrainConfig c;
    c.views = 3;
    c.patterns = 4;
    c.features = 5;
    c.classes = 3;
    c.feature_dim = 6;
    const auto t0 = Clock::now();
    const GradCheckReport r = grad_check(c, 1);
    const double secs = seconds_since(t0);
    std::size_t checked = 0;
    for (const auto& b : r.blocks) checked += b.checked;
    const bool all_blocks = r.blocks.size() == blocks(ModelParams::zeros(c)).size();
    return {r.passed(1e-5) && secs < 30.0 && all_blocks,
            fmt("max rel err %.3g over %.0f coords, %.2f s", r.max_error(), static_cast<double>(checked), secs)};
}

// 2 --------------------------------------------------------------------------
Outcome algebraic_invariants() {
    std::mt19937_64 rng(2);
    std::size_t failures = 0;
    double worst_simplex = 0.0, worst_c = 0.0, worst_cj = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        TrainConfig c;
        c.views = 1 + rng() % 6;
        c.patterns = 2 + rng() % 5;
        c.features = 1 + rng() % 4;
        c.classes = 2 + rng() % 3;
        c.feature_dim = 1 + rng() % 5;
        c.sigma = 20.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const ModelParams p = random_params(c, rng);
        ShapeSample s{rng() % c.classes, Matrix(c.views, c.feature_dim), random_dirs(c.views, rng)};
        for (double& v : s.features.flat()) v = random_vector(1, rng, 2.0)[0];
        const ForwardTrace t = forward(s, p, c);

        for (const auto& d : t.embeddings) worst_simplex = std::max(worst_simplex, simplex_error(d));
        worst_simplex = std::max({worst_simplex, simplex_error(t.alpha), simplex_error(t.probabilities)});

        const ViewGraph g(s.directions, c.sigma);
        for (std::size_t j = 0; j < c.views; ++j) {
            const std::size_t k = rng() % c.views;
            worst_c = std::max(worst_c, std::abs(pattern_correlation(t.embeddings[j], t.embeddings[k]).sum() - 1.0));
            double weight = 0.0;
            for (std::size_t m = 0; m < c.views; ++m) weight += g.similarity(j, m);
            worst_cj = std::max(worst_cj, std::abs(t.correlations[j].sum() - weight));
            if (g.similarity(j, j) != 1.0) ++failures;
            for (std::size_t m = 0; m < c.views; ++m) {
                const double sjm = g.similarity(j, m);
                if (sjm != g.similarity(m, j) || !(sjm > 0.0) || sjm > 1.0) ++failures;
            }
        }
        // Monotonicity in the edge length.
        const double e1 = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const double e2 = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const double sg = 0.1 + c.sigma;
        if (e1 < e2 && !(spatial_similarity(e1, sg) > spatial_similarity(e2, sg))) ++failures;
        if (e1 > e2 && !(spatial_similarity(e1, sg) < spatial_similarity(e2, sg))) ++failures;
    }
    const bool pass = failures == 0 && worst_simplex <= 1e-9 && worst_c <= 1e-9 && worst_cj <= 1e-8;
    return {pass, fmt("simplex %.2g, |sum c - 1| %.2g, |sum C_j - sum s| %.2g", worst_simplex, worst_c, worst_cj) +
                      ", " + std::to_string(failures) + " similarity violations"};
}

// 3 --------------------------------------------------------------------------
Outcome permutation_invariance() {
    std::mt19937_64 rng(3);
    TrainConfig c;
    c.views = 12;
    c.patterns = 8;
    c.features = 16;
    c.classes = 4;
    c.feature_dim = 32;
    const ModelParams p = random_params(c, rng);
    double worst_f = 0.0, worst_alpha = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        ShapeSample s{rng() % c.classes, Matrix(c.views, c.feature_dim), random_dirs(c.views, rng)};
        for (double& v : s.features.flat()) v = random_vector(1, rng)[0];
        std::vector<std::size_t> perm(c.views);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        ShapeSample q = s;
        for (std::size_t i = 0; i < c.views; ++i) {
            q.directions[i] = s.directions[perm[i]];
            for (std::size_t k = 0; k < c.feature_dim; ++k) q.features(i, k) = s.features(perm[i], k);
        }
        const ForwardTrace a = forward(s, p, c);
        const ForwardTrace b = forward(q, p, c);
        worst_f = std::max(worst_f, max_abs_diff(a.feature, b.feature));
        for (std::size_t i = 0; i < c.views; ++i) worst_alpha = std::max(worst_alpha, std::abs(b.alpha[i] - a.alpha[perm[i]]));
    }
    return {worst_f < 1e-10 && worst_alpha < 1e-10, fmt("max |dF| %.3g, max |d alpha| %.3g", worst_f, worst_alpha)};
}

// 4 --------------------------------------------------------------------------
Outcome kernel_equivalence() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> beta_dist(0.01, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng() % 15, dim = 1 + rng() % 16;
        const double beta = beta_dist(rng);
        oracle::Mat phi(n);
        for (auto& row : phi) row = random_vector(dim, rng);
        const Vector f = random_vector(dim, rng);
        LatentMapParams p{Matrix(n, dim), Vector(n)};
        for (std::size_t k = 0; k < n; ++k) {
            double sq = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                p.filters(k, i) = 2.0 * beta * phi[k][i];
                sq += phi[k][i] * phi[k][i];
            }
            p.offsets[k] = -beta * sq;
        }
        worst = std::max(worst, max_abs_diff(embed(f, p), oracle::gaussian_kernel_embedding(f, phi, beta)));
    }
    return {worst <= 1e-12, fmt("max abs diff %.3g over 1000 instances", worst)};
}

// 5, 6 -----------------------------------------------------------------------
struct SyntheticTask {
    Dataset train, test;
};

const SyntheticTask& synthetic_task() {
    static const SyntheticTask task = [] {
        auto [tr, te] = generate_synthetic_split(4, 50, 50, 12, 32, 0.1, 7);
        return SyntheticTask{std::move(tr), std::move(te)};
    }();
    return task;
}

TrainConfig synthetic_config(std::uint64_t seed) {
    TrainConfig c;
    c.patterns = 8;
    c.features = 16;
    c.sigma = 10.0;
    c.learning_rate = 0.009;
    c.epochs = 50;
    c.plateau_window = 0;
    c.seed = seed;
    return c;
}

Outcome synthetic_learning() {
    const auto& task = synthetic_task();
    const TrainConfig c = synthetic_config(7);
    const auto t0 = Clock::now();
    const TrainResult r = train(task.train, c);
    const double secs = seconds_since(t0);
    const TrainConfig bound = bind_to_dataset(c, task.train);
    const double train_acc = accuracy(r.params, bound, task.train);
    const double test_acc = accuracy(r.params, bound, task.test);
    return {train_acc >= 0.95 && test_acc >= 0.90 && secs < 300.0,
            fmt("train %.1f%%, test %.1f%%, %.1f s", 100.0 * train_acc, 100.0 * test_acc, secs)};
}

Outcome ablation_direction() {
    const auto& task = synthetic_task();
    const std::vector<std::pair<std::string, std::function<void(AblationFlags&)>>> variants{
        {"full", [](AblationFlags&) {}},
        {"no-spatiality", [](AblationFlags& f) { f.no_spatiality = true; }},
        {"no-attention", [](AblationFlags& f) { f.no_attention = true; }},
        {"mean-pool", [](AblationFlags& f) { f.mean_pool = true; }},
        {"max-pool", [](AblationFlags& f) { f.max_pool = true; }},
    };
    std::vector<double> mean_acc(variants.size(), 0.0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (std::size_t v = 0; v < variants.size(); ++v) {
            TrainConfig c = synthetic_config(seed);
            variants[v].second(c.flags);
            const TrainResult r = train(task.train, c);
            mean_acc[v] += accuracy(r.params, bind_to_dataset(c, task.train), task.test) / 5.0;
        }
    }
    bool pass = true;
    std::string detail;
    for (std::size_t v = 0; v < variants.size(); ++v) {
        if (v > 0 && mean_acc[0] < mean_acc[v] - 0.01) pass = false;
        detail += (v ? ", " : "") + variants[v].first + fmt(" %.1f%%", 100.0 * mean_acc[v]);
    }
    return {pass, detail};
}

// 7 --------------------------------------------------------------------------
oracle::Retrieval to_oracle(const RetrievalRun& run) {
    oracle::Retrieval r;
    for (std::size_t i = 0; i < run.queries.rows(); ++i)
        r.queries.emplace_back(run.queries.row(i).begin(), run.queries.row(i).end());
    for (std::size_t i = 0; i < run.gallery.rows(); ++i)
        r.gallery.emplace_back(run.gallery.row(i).begin(), run.gallery.row(i).end());
    r.query_labels = run.query_labels;
    r.query_ids = run.query_ids;
    r.gallery_labels = run.gallery_labels;
    r.gallery_ids = run.gallery_ids;
    return r;
}

bool same(const CutoffMetrics& m, const oracle::Metrics& o) {
    return m.precision == o.p && m.recall == o.r && m.f1 == o.f1 && m.map == o.map && m.ndcg == o.ndcg;
}

Outcome metric_oracle() {
    std::mt19937_64 rng(7);
    std::size_t mismatches = 0, queries = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 99, dim = 1 + rng() % 4, classes = 1 + rng() % 5;
        Matrix f(n, dim);
        for (double& v : f.flat()) v = static_cast<double>(rng() % 5);
        std::vector<std::size_t> labels(n);
        for (auto& l : labels) l = rng() % classes;
        const RetrievalRun run = self_retrieval(std::move(f), std::move(labels), Distance::euclidean,
                                                RetrievalRange::test_test);
        const oracle::Retrieval ref = to_oracle(run);
        const auto ap = average_precisions(run);
        const ShrecMetrics s = shrec_metrics(run);
        for (std::size_t q = 0; q < n; ++q, ++queries) {
            const auto rel = oracle::naive_relevance(ref, q);
            const std::size_t relevant = oracle::count_relevant(rel);
            if (ap[q] != oracle::naive_cutoff(rel, relevant, rel.size()).map) ++mismatches;
            if (!same(s.per_query[q], oracle::naive_cutoff(rel, relevant, relevant))) ++mismatches;
        }
    }

    Matrix six(6, 1);
    const double xs[] = {0, 1, 4, 2, 3, 10};
    for (std::size_t i = 0; i < 6; ++i) six(i, 0) = xs[i];
    const RetrievalRun run = self_retrieval(six, {0, 0, 0, 1, 1, 1}, Distance::euclidean, RetrievalRange::test_test);
    const oracle::Retrieval ref = to_oracle(run);
    const ShrecMetrics s = shrec_metrics(run);
    bool six_ok = std::abs(average_precisions(run)[0] - 0.75) < 1e-15;
    for (std::size_t q = 0; q < 6; ++q) {
        const auto rel = oracle::naive_relevance(ref, q);
        six_ok = six_ok && same(s.per_query[q], oracle::naive_cutoff(rel, oracle::count_relevant(rel),
                                                                      oracle::count_relevant(rel)));
    }
    six_ok = six_ok && std::abs(mean_average_precision(run) - oracle::naive_map(ref)) < 1e-15;
    return {mismatches == 0 && six_ok, std::to_string(mismatches) + " mismatches over " + std::to_string(queries) +
                                           " queries; 6-item example " + (six_ok ? "matches" : "differs")};
}

// 8 --------------------------------------------------------------------------
Outcome determinism() {
    const Dataset ds = generate_synthetic(3, 8, 6, 8, 0.1, 8);
    TrainConfig c;
    c.patterns = 5;
    c.features = 6;
    c.epochs = 5;
    c.batch_size = 4;
    c.seed = 8;
    auto checkpoint_bytes = [&](const TrainConfig& cfg) {
        const TrainResult r = train(ds, cfg);
        return serialize_checkpoint({bind_to_dataset(cfg, ds), r.params});
    };
    const auto a = checkpoint_bytes(c);
    const auto b = checkpoint_bytes(c);
    TrainConfig threaded = c;
    threaded.threads = 3;
    const auto t = checkpoint_bytes(threaded);
    TrainConfig s0 = c;
    s0.sigma = 0.0;
    TrainConfig ns = c;
    ns.flags.no_spatiality = true;
    const auto z = checkpoint_bytes(s0);
    const auto n = checkpoint_bytes(ns);
    const bool repeat = a == b;
    const bool threads = a == t;
    const bool spatial = z == n && z != a;
    return {repeat && threads && spatial, std::string("repeat ") + (repeat ? "identical" : "differs") +
                                              ", threads " + (threads ? "identical" : "differ") +
                                              ", sigma 0 vs no-spatiality " + (spatial ? "identical" : "differ")};
}

// 9 --------------------------------------------------------------------------
Outcome format_robustness() {
    Dataset ds = generate_synthetic(3, 3, 5, 4, 0.1, 9);
    const auto clean = serialize_dataset(ds);
    ds.samples[1].directions[0] = {0.0, 1.0, 0.0};
    const auto per_shape = serialize_dataset(ds);
    std::mt19937_64 rng(9);
    std::size_t typed = 0, accepted = 0, untyped = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        auto bytes = trial % 2 ? clean : per_shape;
        switch (rng() % 3) {
            case 0: bytes.resize(rng() % bytes.size()); break;
            case 1:
                for (int k = 0; k < 1 + static_cast<int>(rng() % 8); ++k)
                    bytes[rng() % bytes.size()] = static_cast<std::byte>(rng() & 0xff);
                break;
            default:
                bytes[rng() % std::min<std::size_t>(bytes.size(), 40)] = static_cast<std::byte>(rng() & 0xff);
                bytes.resize(bytes.size() - rng() % 16);
                break;
        }
        try {
            (void)deserialize_dataset(bytes);
            ++accepted;
        } catch (const FormatError&) {
            ++typed;
        } catch (const IoError&) {
            ++typed;
        } catch (const ValidationError&) {
            ++typed;
        } catch (...) {
            ++untyped;
        }
    }
    return {untyped == 0, std::to_string(typed) + " typed errors, " + std::to_string(accepted) +
                              " still-valid files, " + std::to_string(untyped) + " untyped"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient certification", gradient_certification},
        {"algebraic invariants (10000 cases)", algebraic_invariants},
        {"view permutation invariance", permutation_invariance},
        {"kernel / decoupled filter equivalence", kernel_equivalence},
        {"synthetic task learning", synthetic_learning},
        {"ablation direction (5 seeds)", ablation_direction},
        {"retrieval metric oracle equivalence", metric_oracle},
        {"determinism and sigma 0 checkpoints", determinism},
        {"dataset format robustness (1000-case fuzz)", format_robustness},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
