#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace viewgraph {

/// Degraded model variants used for ablation runs.
struct AblationFlags {
    bool no_spatiality = false;    // every spatial similarity forced to 1
    bool no_attention = false;     // alpha_j = 1/V
    bool no_attention_c = false;   // scores computed from all-ones in place of C_j
    bool no_attention_wf = false;  // scores computed from all-ones in place of W_F
    bool no_latent = false;        // raw view features replace the latent embeddings
    bool no_correlation = false;   // d_j + d_j' replaces the outer product
    bool mean_pool = false;        // elementwise mean of the embeddings, no view graph
    bool max_pool = false;         // elementwise max of the embeddings, no view graph
    /// Update W_F with the classifier-path gradient only.
    bool drop_attention_wf_gradient = false;

    bool pooled() const noexcept { return mean_pool || max_pool; }
    std::uint32_t to_bits() const noexcept;
    static AblationFlags from_bits(std::uint32_t bits);

    friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct TrainConfig {
    double learning_rate = 0.009;
    double sigma = 10.0;
    std::size_t patterns = 128;   // N
    std::size_t features = 256;   // F
    std::size_t views = 20;       // V
    std::size_t feature_dim = 64;  // D_low
    std::size_t classes = 0;      // L
    std::size_t epochs = 100;
    std::size_t batch_size = 16;
    std::uint64_t seed = 1;
    AblationFlags flags;
    bool include_self = true;
    /// Worker threads for per-shape forward/backward; results do not depend on it.
    std::size_t threads = 1;
    /// Early stop when the training loss changes by less than this (relative)
    /// over `plateau_window` epochs. A window of 0 disables early stopping.
    double plateau_tolerance = 1e-5;
    std::size_t plateau_window = 5;

    /// Throws InvalidArgument on inconsistent settings.
    void validate() const;

    /// no_spatiality and sigma == 0 describe the same model; both map to
    /// {sigma = 0, no_spatiality = true}.
    TrainConfig canonical() const;

    /// Length of the per-view vectors entering the correlation stage.
    std::size_t embedding_dim() const noexcept { return flags.no_latent ? feature_dim : patterns; }
    /// Row count of C_j / C.
    std::size_t correlation_rows() const noexcept { return embedding_dim(); }
    /// Column count of C_j / C: 1 for summation or pooling variants.
    std::size_t correlation_cols() const noexcept {
        return (flags.no_correlation || flags.pooled()) ? 1 : embedding_dim();
    }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

std::string describe(const AblationFlags& flags);

}  // namespace viewgraph
