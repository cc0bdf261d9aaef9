#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "viewgraph/checkpoint.hpp"
#include "viewgraph/dataio.hpp"
#include "viewgraph/error.hpp"
#include "viewgraph/evalmetrics.hpp"
#include "viewgraph/hash.hpp"
#include "viewgraph/log.hpp"
#include "viewgraph/trainer.hpp"

namespace viewgraph::cli {
namespace {

using json = nlohmann::ordered_json;

json config_json(const TrainConfig& c) {
    return json{{"learning_rate", c.learning_rate},
                {"sigma", c.sigma},
                {"patterns", c.patterns},
                {"features", c.features},
                {"views", c.views},
                {"feature_dim", c.feature_dim},
                {"classes", c.classes},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"seed", c.seed},
                {"flags", describe(c.flags)},
                {"include_self", c.include_self},
                {"threads", c.threads},
                {"plateau_tolerance", c.plateau_tolerance},
                {"plateau_window", c.plateau_window}};
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

/// Run record written next to a command's outputs.
struct RunManifest {
    std::string command;
    json config;
    std::uint64_t seed = 0;
    std::string dataset_hash;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    std::string started_at = utc_now();

    void write(const std::string& path) const {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json j{{"command", command},   {"config", config},         {"seed", seed},
               {"dataset_hash", dataset_hash}, {"outputs", outputs}, {"started_at", started_at},
               {"wall_clock_seconds", seconds}};
        std::ofstream f(path);
        if (!f) throw IoError("cannot write manifest " + path);
        f << j.dump(2) << '\n';
    }
};

struct TrainFlags {
    TrainConfig config;
    bool exclude_self = false;
};

void add_model_options(CLI::App& cmd, TrainFlags& t) {
    auto& c = t.config;
    cmd.add_option("--lr", c.learning_rate, "SGD learning rate")->capture_default_str();
    cmd.add_option("--sigma", c.sigma, "Spatial similarity decay")->capture_default_str();
    cmd.add_option("--patterns", c.patterns, "Latent semantic patterns N")->capture_default_str();
    cmd.add_option("--features", c.features, "Global feature dimension F")->capture_default_str();
    cmd.add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd.add_flag("--no-spatiality", c.flags.no_spatiality, "Force all spatial similarities to 1");
    cmd.add_flag("--no-attention", c.flags.no_attention, "Uniform attention weights");
    cmd.add_flag("--no-attention-c", c.flags.no_attention_c, "Score views with all-ones in place of C_j");
    cmd.add_flag("--no-attention-wf", c.flags.no_attention_wf, "Score views with all-ones in place of W_F");
    cmd.add_flag("--no-latent", c.flags.no_latent, "Use raw view features instead of latent embeddings");
    cmd.add_flag("--no-correlation", c.flags.no_correlation, "Sum embeddings instead of outer products");
    cmd.add_flag("--mean-pool", c.flags.mean_pool, "Mean-pool embeddings, bypassing the view graph");
    cmd.add_flag("--max-pool", c.flags.max_pool, "Max-pool embeddings, bypassing the view graph");
    cmd.add_flag("--drop-attention-wf-grad", c.flags.drop_attention_wf_gradient,
                 "Update W_F with the classifier-path gradient only");
    cmd.add_flag("--exclude-self", t.exclude_self, "Leave the j'=j pair out of the cumulative correlation");
}

void require_compatible(const TrainConfig& config, const Dataset& ds) {
    if (ds.empty()) throw ValidationError("dataset is empty");
    if (ds.views() != config.views || ds.feature_dim() != config.feature_dim || ds.classes() != config.classes)
        throw ValidationError("dataset (V=" + std::to_string(ds.views()) + ", D=" + std::to_string(ds.feature_dim()) +
                              ", L=" + std::to_string(ds.classes()) + ") does not match checkpoint (V=" +
                              std::to_string(config.views) + ", D=" + std::to_string(config.feature_dim) +
                              ", L=" + std::to_string(config.classes) + ")");
}

std::vector<std::size_t> labels_of(const Dataset& ds) {
    std::vector<std::size_t> l;
    for (const auto& s : ds.samples) l.push_back(s.label);
    return l;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << std::setprecision(17);
    return f;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-view shape aggregation over spherical view graphs"};
    app.name(args.empty() ? "viewgraph" : args.front());
    app.require_subcommand(1);
    app.fallthrough();
    std::size_t threads = 1;
    app.add_option("--threads", threads, "Worker threads (results do not depend on it)")->capture_default_str();

    std::function<int()> action;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic view-feature dataset");
    struct {
        std::size_t classes = 0, per_class = 0, test_per_class = 0, views = 20, dim = 64;
        double noise = 0.1;
        std::uint64_t seed = 1;
        std::string out, test_out, manifest;
    } sy;
    synth->add_option("--classes", sy.classes, "Number of classes L")->required();
    synth->add_option("--per-class", sy.per_class, "Shapes per class")->required();
    synth->add_option("--test-per-class", sy.test_per_class, "Held-out shapes per class (needs --test-out)");
    synth->add_option("--views", sy.views, "Views per shape V")->capture_default_str();
    synth->add_option("--dim", sy.dim, "Feature dimension D_low")->capture_default_str();
    synth->add_option("--noise", sy.noise, "Gaussian feature noise")->capture_default_str();
    synth->add_option("--seed", sy.seed, "Random seed")->capture_default_str();
    synth->add_option("--out", sy.out, "Output dataset path")->required();
    synth->add_option("--test-out", sy.test_out, "Output path for the held-out split");
    synth->add_option("--manifest", sy.manifest, "Run manifest path (default <out>.manifest.json)");
    synth->callback([&] {
        action = [&] {
            RunManifest m;
            m.command = "synth";
            m.seed = sy.seed;
            m.config = json{{"classes", sy.classes}, {"per_class", sy.per_class}, {"test_per_class", sy.test_per_class},
                            {"views", sy.views},     {"dim", sy.dim},             {"noise", sy.noise}};
            if (sy.test_per_class > 0 && sy.test_out.empty())
                throw CLI::ValidationError("--test-per-class", "requires --test-out");
            auto [train, test] = generate_synthetic_split(sy.classes, sy.per_class, sy.test_per_class, sy.views,
                                                          sy.dim, sy.noise, sy.seed);
            if (sy.test_per_class == 0) train.split = Split::unspecified;
            save_dataset(train, sy.out);
            m.outputs.push_back(sy.out);
            if (sy.test_per_class > 0) {
                save_dataset(test, sy.test_out);
                m.outputs.push_back(sy.test_out);
            }
            m.dataset_hash = file_hash(sy.out);
            m.write(sy.manifest.empty() ? sy.out + ".manifest.json" : sy.manifest);
            out << json{{"dataset", sy.out}, {"samples", train.size()}, {"hash", m.dataset_hash}}.dump() << '\n';
            return kExitOk;
        };
    });

    // import
    auto* import = app.add_subcommand("import", "Convert a CSV manifest of per-shape feature files");
    std::string import_manifest, import_out, import_split = "unspecified";
    import->add_option("--manifest", import_manifest, "CSV manifest with header file,class")->required();
    import->add_option("--out", import_out, "Output dataset path")->required();
    import->add_option("--split", import_split, "Split tag")
        ->check(CLI::IsMember({"train", "test", "unspecified"}))
        ->capture_default_str();
    import->callback([&] {
        action = [&] {
            Dataset ds = import_csv(import_manifest);
            ds.split = import_split == "train" ? Split::train : import_split == "test" ? Split::test : Split::unspecified;
            save_dataset(ds, import_out);
            out << json{{"dataset", import_out}, {"samples", ds.size()}, {"classes", ds.classes()},
                        {"hash", file_hash(import_out)}}
                       .dump()
                << '\n';
            return kExitOk;
        };
    });

    // train
    auto* trainc = app.add_subcommand("train", "Train a model with mini-batch SGD");
    TrainFlags tf;
    std::string train_data, train_out, train_log, train_manifest;
    add_model_options(*trainc, tf);
    trainc->add_option("--data", train_data, "Training dataset (3DVG-D)")->required();
    trainc->add_option("--out", train_out, "Checkpoint path (3DVG-M)")->required();
    trainc->add_option("--epochs", tf.config.epochs, "Maximum epochs")->capture_default_str();
    trainc->add_option("--batch-size", tf.config.batch_size, "Mini-batch size")->capture_default_str();
    trainc->add_option("--plateau-window", tf.config.plateau_window, "Early-stop window in epochs (0 disables)")
        ->capture_default_str();
    trainc->add_option("--plateau-tol", tf.config.plateau_tolerance, "Early-stop relative loss change")
        ->capture_default_str();
    trainc->add_option("--log", train_log, "JSON-lines epoch log (default stdout)");
    trainc->add_option("--manifest", train_manifest, "Run manifest path (default <out>.manifest.json)");
    trainc->callback([&] {
        action = [&] {
            RunManifest m;
            m.command = "train";
            const Dataset ds = load_dataset(train_data);
            m.dataset_hash = file_hash(train_data);
            tf.config.include_self = !tf.exclude_self;
            tf.config.threads = threads;
            const TrainConfig config = bind_to_dataset(tf.config, ds);
            m.config = config_json(config);
            m.seed = config.seed;

            std::ofstream log_file;
            if (!train_log.empty()) log_file = open_output(train_log);
            std::ostream& log_out = train_log.empty() ? out : log_file;
            const TrainResult r = train(ds, config, [&](const EpochRecord& e) {
                log_out << json{{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}}.dump() << '\n';
            });
            save_checkpoint({config, r.params}, train_out);
            m.outputs.push_back(train_out);
            if (!train_log.empty()) m.outputs.push_back(train_log);
            m.write(train_manifest.empty() ? train_out + ".manifest.json" : train_manifest);
            log_out << json{{"event", "done"},
                            {"epochs_run", r.log.size()},
                            {"early_stopped", r.early_stopped},
                            {"final_loss", r.log.empty() ? 0.0 : r.log.back().loss},
                            {"final_accuracy", r.log.empty() ? 0.0 : r.log.back().accuracy},
                            {"initial_params_digest", params_digest(r.initial)},
                            {"params_digest", params_digest(r.params)},
                            {"checkpoint", train_out}}
                           .dump()
                    << '\n';
            return kExitOk;
        };
    });

    // eval
    auto* evalc = app.add_subcommand("eval", "Classification accuracy and loss of a checkpoint");
    std::string eval_ckpt, eval_data;
    evalc->add_option("--checkpoint", eval_ckpt, "Checkpoint (3DVG-M)")->required();
    evalc->add_option("--data", eval_data, "Dataset (3DVG-D)")->required();
    evalc->callback([&] {
        action = [&] {
            const Checkpoint cp = load_checkpoint(eval_ckpt);
            const Dataset ds = load_dataset(eval_data);
            require_compatible(cp.config, ds);
            const double acc = accuracy(cp.params, cp.config, ds);
            const double loss = mean_loss(ds.samples, cp.params, cp.config);
            out << json{{"accuracy", acc}, {"loss", loss}, {"samples", ds.size()}, {"split", to_string(ds.split)}}
                       .dump()
                << '\n';
            return kExitOk;
        };
    });

    // retrieve
    auto* retr = app.add_subcommand("retrieve", "Retrieval metrics on learned global features");
    std::string r_ckpt, r_query, r_gallery, r_distance = "euclidean", r_range = "test-test", r_pr, r_metrics;
    std::size_t r_points = 11, r_cutoff = 0;
    retr->add_option("--checkpoint", r_ckpt, "Checkpoint (3DVG-M)")->required();
    retr->add_option("--query", r_query, "Query dataset")->required();
    retr->add_option("--gallery", r_gallery, "Gallery dataset (default: the query set, self-matches removed)");
    retr->add_option("--distance", r_distance, "Feature distance")
        ->check(CLI::IsMember({"euclidean", "cosine"}))
        ->capture_default_str();
    retr->add_option("--range", r_range, "Range tag recorded with the results")
        ->check(CLI::IsMember({"test-test", "test-train", "train-train", "all-all"}))
        ->capture_default_str();
    retr->add_option("--cutoff", r_cutoff, "Fixed @N cutoff (0: per-query relevance class size)")
        ->capture_default_str();
    retr->add_option("--points", r_points, "Recall levels on the PR curve")->capture_default_str();
    retr->add_option("--pr-csv", r_pr, "Write the PR curve as CSV (recall,precision)");
    retr->add_option("--metrics-csv", r_metrics, "Write micro/macro metrics as CSV");
    retr->callback([&] {
        action = [&] {
            const Checkpoint cp = load_checkpoint(r_ckpt);
            const Dataset q = load_dataset(r_query);
            require_compatible(cp.config, q);
            const Distance dist = parse_distance(r_distance);
            const RetrievalRange range = parse_range(r_range);
            RetrievalRun run;
            if (r_gallery.empty() || r_gallery == r_query) {
                run = self_retrieval(global_features(cp.params, cp.config, q), labels_of(q), dist, range);
            } else {
                const Dataset g = load_dataset(r_gallery);
                require_compatible(cp.config, g);
                run = cross_retrieval(global_features(cp.params, cp.config, q), labels_of(q),
                                      global_features(cp.params, cp.config, g), labels_of(g), dist, range);
            }
            const double map = mean_average_precision(run);
            const ShrecMetrics sm =
                shrec_metrics(run, r_cutoff == 0 ? std::nullopt : std::optional<std::size_t>(r_cutoff));
            if (!r_pr.empty()) {
                auto f = open_output(r_pr);
                write_pr_curve_csv(f, pr_curve(run, r_points));
            }
            if (!r_metrics.empty()) {
                auto f = open_output(r_metrics);
                write_metrics_csv(f, sm);
            }
            auto metrics = [](const CutoffMetrics& c) {
                return json{{"P@N", c.precision}, {"R@N", c.recall}, {"F1@N", c.f1}, {"mAP@N", c.map},
                            {"NDCG@N", c.ndcg}};
            };
            out << json{{"range", to_string(range)},       {"distance", to_string(dist)},
                        {"queries", run.queries.rows()},   {"gallery", run.gallery.rows()},
                        {"mAP", map},                      {"micro", metrics(sm.micro)},
                        {"macro", metrics(sm.macro)}}
                       .dump()
                << '\n';
            return kExitOk;
        };
    });

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every parameter block");
    TrainFlags gf;
    gf.config.patterns = 4;
    gf.config.features = 5;
    gf.config.views = 3;
    gf.config.classes = 3;
    gf.config.feature_dim = 6;
    double gc_tol = 1e-5;
    std::size_t gc_shapes = 2;
    add_model_options(*gc, gf);
    gc->add_option("--views", gf.config.views, "Views V")->capture_default_str();
    gc->add_option("--classes", gf.config.classes, "Classes L")->capture_default_str();
    gc->add_option("--dim", gf.config.feature_dim, "Feature dimension D_low")->capture_default_str();
    gc->add_option("--shapes", gc_shapes, "Random shapes in the objective")->capture_default_str();
    gc->add_option("--tolerance", gc_tol, "Pass threshold on relative error")->capture_default_str();
    gc->callback([&] {
        action = [&] {
            gf.config.include_self = !gf.exclude_self;
            GradCheckOptions opts;
            opts.shapes = gc_shapes;
            const GradCheckReport report = grad_check(gf.config, gf.config.seed, opts);
            for (const auto& b : report.blocks)
                out << json{{"block", b.name}, {"checked", b.checked}, {"max_relative_error", b.max_relative_error}}
                           .dump()
                    << '\n';
            const bool ok = report.passed(gc_tol);
            out << json{{"max_relative_error", report.max_error()}, {"tolerance", gc_tol}, {"passed", ok}}.dump()
                << '\n';
            return ok ? kExitOk : kExitFailure;
        };
    });

    // attention-dump
    auto* ad = app.add_subcommand("attention-dump", "Per-view attention weights of every shape as CSV");
    std::string ad_ckpt, ad_data, ad_out;
    ad->add_option("--checkpoint", ad_ckpt, "Checkpoint (3DVG-M)")->required();
    ad->add_option("--data", ad_data, "Dataset (3DVG-D)")->required();
    ad->add_option("--out", ad_out, "CSV path (default stdout)");
    ad->callback([&] {
        action = [&] {
            const Checkpoint cp = load_checkpoint(ad_ckpt);
            if (cp.config.flags.pooled()) throw ValidationError("pooling models have no attention weights");
            const Dataset ds = load_dataset(ad_data);
            require_compatible(cp.config, ds);
            std::ofstream file;
            if (!ad_out.empty()) file = open_output(ad_out);
            std::ostream& csv = ad_out.empty() ? out : file;
            csv << std::setprecision(17) << "shape,label,view,alpha,x,y,z,marker\n";
            for (std::size_t i = 0; i < ds.size(); ++i) {
                const auto& s = ds.samples[i];
                const ForwardTrace t = forward(s, cp.params, cp.config);
                const auto hi = static_cast<std::size_t>(std::max_element(t.alpha.begin(), t.alpha.end()) - t.alpha.begin());
                const auto lo = static_cast<std::size_t>(std::min_element(t.alpha.begin(), t.alpha.end()) - t.alpha.begin());
                for (std::size_t j = 0; j < t.alpha.size(); ++j) {
                    const char* marker = j == hi ? "max" : j == lo ? "min" : "";
                    csv << i << ',' << s.label << ',' << j << ',' << t.alpha[j] << ',' << s.directions[j][0] << ','
                        << s.directions[j][1] << ',' << s.directions[j][2] << ',' << marker << '\n';
                }
            }
            return kExitOk;
        };
    });

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    if (threads < 1) {
        err << "error: --threads must be >= 1\n";
        return kExitUsage;
    }
    try {
        return action();
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        log::error(e.what());
        err << "numerical failure: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace viewgraph::cli
