#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "viewgraph/config.hpp"
#include "viewgraph/dataio.hpp"
#include "viewgraph/model.hpp"

namespace viewgraph {

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double loss = 0.0;      // mean training loss after the epoch's updates
    double accuracy = 0.0;  // training accuracy after the epoch's updates
};

struct TrainResult {
    ModelParams initial;
    ModelParams params;
    std::vector<EpochRecord> log;
    bool early_stopped = false;
};

/// Copies `config` with the dataset's V, D_low and L filled in, canonicalized.
TrainConfig bind_to_dataset(TrainConfig config, const Dataset& dataset);

/// Gradient of the mean loss over `batch`. Per-shape gradients are summed in
/// batch order so the result does not depend on config.threads.
Gradients batch_gradients(std::span<const ShapeSample* const> batch, const ModelParams& params,
                          const TrainConfig& config, double* loss = nullptr);

/// params -= learning_rate * grads.
void sgd_step(ModelParams& params, const Gradients& grads, double learning_rate);

/// Mini-batch SGD. Initialization uses config.seed; shuffling uses a separate
/// stream derived from it. Throws NumericalError on a non-finite loss.
TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

struct BlockError {
    std::string name;
    double max_relative_error = 0.0;
    std::size_t checked = 0;
};

struct GradCheckReport {
    std::vector<BlockError> blocks;
    double max_error() const;
    bool passed(double tolerance = 1e-5) const { return max_error() < tolerance; }
};

struct GradCheckOptions {
    std::size_t shapes = 2;
    double step = 1e-5;
    /// Blocks larger than this are checked on a seeded random subsample of this many coordinates.
    std::size_t max_coordinates = 10000;
    std::size_t subsample = 200;
    /// Applied to the analytic gradient before comparison (test hook).
    std::function<void(Gradients&)> corrupt;
};

/// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
inline constexpr double kGradCheckFloor = 1e-4;

/// Central-difference check of `backward` on random parameters and shapes with
/// the dimensions of `config` (classes, views, feature_dim must be set).
GradCheckReport grad_check(const TrainConfig& config, std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace viewgraph
