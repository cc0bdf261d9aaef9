#include "viewgraph/config.hpp"

#include <cmath>

#include "viewgraph/error.hpp"

namespace viewgraph {

std::uint32_t AblationFlags::to_bits() const noexcept {
    std::uint32_t b = 0;
    b |= no_spatiality ? 1u << 0 : 0u;
    b |= no_attention ? 1u << 1 : 0u;
    b |= no_attention_c ? 1u << 2 : 0u;
    b |= no_attention_wf ? 1u << 3 : 0u;
    b |= no_latent ? 1u << 4 : 0u;
    b |= no_correlation ? 1u << 5 : 0u;
    b |= mean_pool ? 1u << 6 : 0u;
    b |= max_pool ? 1u << 7 : 0u;
    b |= drop_attention_wf_gradient ? 1u << 8 : 0u;
    return b;
}

AblationFlags AblationFlags::from_bits(std::uint32_t b) {
    if (b >> 9) throw FormatError("unknown ablation flag bits");
    AblationFlags f;
    f.no_spatiality = b & (1u << 0);
    f.no_attention = b & (1u << 1);
    f.no_attention_c = b & (1u << 2);
    f.no_attention_wf = b & (1u << 3);
    f.no_latent = b & (1u << 4);
    f.no_correlation = b & (1u << 5);
    f.mean_pool = b & (1u << 6);
    f.max_pool = b & (1u << 7);
    f.drop_attention_wf_gradient = b & (1u << 8);
    return f;
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw InvalidArgument("learning rate must be finite and >= 0");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be finite and >= 0");
    if (!flags.no_latent && patterns < 2) throw InvalidArgument("need at least two latent patterns");
    if (features < 1 || views < 1 || feature_dim < 1 || classes < 1)
        throw InvalidArgument("model dimensions must be >= 1");
    if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
    if (threads < 1) throw InvalidArgument("thread count must be >= 1");
    if (flags.mean_pool && flags.max_pool) throw InvalidArgument("mean_pool and max_pool are exclusive");
}

TrainConfig TrainConfig::canonical() const {
    TrainConfig c = *this;
    if (c.flags.no_spatiality || c.sigma == 0.0) {
        c.flags.no_spatiality = true;
        c.sigma = 0.0;
    }
    return c;
}

std::string describe(const AblationFlags& f) {
    std::string s;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!s.empty()) s += ',';
        s += name;
    };
    add(f.no_spatiality, "no-spatiality");
    add(f.no_attention, "no-attention");
    add(f.no_attention_c, "no-attention-c");
    add(f.no_attention_wf, "no-attention-wf");
    add(f.no_latent, "no-latent");
    add(f.no_correlation, "no-correlation");
    add(f.mean_pool, "mean-pool");
    add(f.max_pool, "max-pool");
    add(f.drop_attention_wf_gradient, "drop-attention-wf-grad");
    return s.empty() ? "full" : s;
}

}  // namespace viewgraph
