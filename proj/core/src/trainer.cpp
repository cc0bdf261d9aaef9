#include "viewgraph/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "viewgraph/error.hpp"
#include "viewgraph/log.hpp"

namespace viewgraph {
namespace {

constexpr std::uint64_t kShuffleStream = 0x5851f42d4c957f2dULL;

std::string parameter_norms(const ModelParams& params) {
    std::ostringstream out;
    for (const auto& b : blocks(params)) {
        double s = 0.0;
        for (double v : b.values) s += v * v;
        out << ' ' << b.name << '=' << std::sqrt(s);
    }
    return out.str();
}

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
};

Evaluation evaluate(const Dataset& dataset, const ModelParams& params, const TrainConfig& config) {
    Evaluation e;
    std::size_t correct = 0;
    for (const auto& s : dataset.samples) {
        const ForwardTrace t = forward(s, params, config);
        e.loss += sample_loss(t.probabilities, s.label).value;
        correct += predicted_class(t.probabilities) == s.label ? 1 : 0;
    }
    e.loss /= static_cast<double>(dataset.size());
    e.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
    return e;
}

}  // namespace

TrainConfig bind_to_dataset(TrainConfig config, const Dataset& dataset) {
    if (dataset.empty()) throw InvalidArgument("dataset is empty");
    config.views = dataset.views();
    config.feature_dim = dataset.feature_dim();
    config.classes = dataset.classes();
    config = config.canonical();
    config.validate();
    return config;
}

Gradients batch_gradients(std::span<const ShapeSample* const> batch, const ModelParams& params,
                          const TrainConfig& config, double* loss) {
    if (batch.empty()) throw InvalidArgument("empty batch");
    const double weight = 1.0 / static_cast<double>(batch.size());
    std::vector<Gradients> per_shape(batch.size());
    std::vector<double> losses(batch.size(), 0.0);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const ForwardTrace t = forward(*batch[i], params, config);
            losses[i] = sample_loss(t.probabilities, batch[i]->label).value;
            per_shape[i] = backward(t, *batch[i], params, config, weight);
        }
    };

    const std::size_t workers = std::min(config.threads, batch.size());
    if (workers <= 1) {
        work(0, batch.size());
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::size_t chunk = (batch.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(batch.size(), begin + chunk);
            pool.emplace_back([&, w, begin, end] {
                try {
                    work(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    Gradients total = Gradients::zeros(config);
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        total += per_shape[i];
        loss_sum += losses[i];
    }
    if (loss) *loss = loss_sum * weight;
    return total;
}

void sgd_step(ModelParams& params, const Gradients& grads, double learning_rate) {
    auto dst = blocks(params);
    const auto src = blocks(grads.params);
    for (std::size_t b = 0; b < dst.size(); ++b) {
        if (dst[b].values.size() != src[b].values.size()) throw InvalidArgument("gradient shape mismatch");
        for (std::size_t i = 0; i < dst[b].values.size(); ++i) dst[b].values[i] -= learning_rate * src[b].values[i];
    }
}

TrainResult train(const Dataset& dataset, const TrainConfig& requested,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
    if (dataset.empty()) throw InvalidArgument("cannot train on an empty dataset");
    dataset.validate();
    const TrainConfig config = bind_to_dataset(requested, dataset);

    TrainResult result;
    result.initial = ModelParams::initialize(config, config.seed);
    result.params = result.initial;

    std::mt19937_64 shuffle_rng(config.seed ^ kShuffleStream);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<const ShapeSample*> batch;
            for (std::size_t i = start; i < end; ++i) batch.push_back(&dataset.samples[order[i]]);
            double loss = 0.0;
            const Gradients g = batch_gradients(batch, result.params, config, &loss);
            if (!std::isfinite(loss))
                throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(batch_index) + "; parameter norms:" +
                                     parameter_norms(result.params));
            sgd_step(result.params, g, config.learning_rate);
        }

        const Evaluation e = evaluate(dataset, result.params, config);
        if (!std::isfinite(e.loss))
            throw NumericalError("non-finite training loss after epoch " + std::to_string(epoch) +
                                 "; parameter norms:" + parameter_norms(result.params));
        const EpochRecord record{epoch, e.loss, e.accuracy};
        result.log.push_back(record);
        log::info("epoch " + std::to_string(epoch) + " loss " + std::to_string(e.loss) + " accuracy " +
                  std::to_string(e.accuracy));
        if (on_epoch) on_epoch(record);

        const std::size_t w = config.plateau_window;
        if (w > 0 && result.log.size() > w) {
            const double before = result.log[result.log.size() - 1 - w].loss;
            const double change = std::abs(e.loss - before) / std::max(std::abs(before), 1e-300);
            if (change < config.plateau_tolerance) {
                result.early_stopped = true;
                break;
            }
        }
    }
    return result;
}

double GradCheckReport::max_error() const {
    double m = 0.0;
    for (const auto& b : blocks) m = std::max(m, b.max_relative_error);
    return m;
}

GradCheckReport grad_check(const TrainConfig& requested, std::uint64_t seed, const GradCheckOptions& options) {
    const TrainConfig config = requested.canonical();
    config.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    ModelParams params = ModelParams::initialize(config, seed);
    for (auto& b : blocks(params))
        for (double& v : b.values) v = 0.5 * normal(rng);

    const std::vector<Vec3> dirs =
        config.views == 1 ? std::vector<Vec3>{{0.0, 0.0, 1.0}} : default_viewpoints(config.views);
    std::uniform_int_distribution<std::size_t> label(0, config.classes - 1);
    std::vector<ShapeSample> shapes;
    for (std::size_t i = 0; i < options.shapes; ++i) {
        ShapeSample s{label(rng), Matrix(config.views, config.feature_dim), dirs};
        for (double& v : s.features.flat()) v = normal(rng);
        shapes.push_back(std::move(s));
    }

    Gradients analytic = Gradients::zeros(config);
    for (const auto& s : shapes)
        analytic += backward(forward(s, params, config), s, params, config, 1.0 / static_cast<double>(shapes.size()));
    if (options.corrupt) options.corrupt(analytic);

    GradCheckReport report;
    auto param_blocks = blocks(params);
    const auto grad_blocks = blocks(analytic.params);
    for (std::size_t b = 0; b < param_blocks.size(); ++b) {
        auto values = param_blocks[b].values;
        std::vector<std::size_t> coords(values.size());
        std::iota(coords.begin(), coords.end(), 0);
        if (coords.size() > options.max_coordinates) {
            std::shuffle(coords.begin(), coords.end(), rng);
            coords.resize(options.subsample);
        }
        BlockError err{std::string(param_blocks[b].name), 0.0, coords.size()};
        for (std::size_t i : coords) {
            const double saved = values[i];
            values[i] = saved + options.step;
            const double up = mean_loss(shapes, params, config);
            values[i] = saved - options.step;
            const double down = mean_loss(shapes, params, config);
            values[i] = saved;
            const double numeric = (up - down) / (2.0 * options.step);
            const double a = grad_blocks[b].values[i];
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
            err.max_relative_error = std::max(err.max_relative_error, rel);
        }
        report.blocks.push_back(std::move(err));
    }
    return report;
}

}  // namespace viewgraph
