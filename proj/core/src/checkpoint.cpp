#include "viewgraph/checkpoint.hpp"

#include "binary_io.hpp"
#include "viewgraph/error.hpp"
#include "viewgraph/hash.hpp"

namespace viewgraph {
namespace {

constexpr std::string_view kMagic = "3DVG-M";
constexpr std::uint32_t kVersion = 1;

std::uint32_t narrow(std::size_t v) {
    if (v > 0xffffffffu) throw FormatError("dimension does not fit the checkpoint format");
    return static_cast<std::uint32_t>(v);
}

void write_blocks(detail::ByteWriter& out, const ModelParams& params) {
    const auto bs = blocks(params);
    out.u32(narrow(bs.size()));
    for (const auto& b : bs) {
        out.u32(narrow(b.name.size()));
        out.bytes(b.name);
        out.u32(narrow(b.rows));
        out.u32(narrow(b.cols));
        for (double v : b.values) out.f64(v);
    }
}

}  // namespace

std::vector<std::byte> serialize_checkpoint(const Checkpoint& cp) {
    check_params(cp.params, cp.config);
    detail::ByteWriter out;
    out.bytes(kMagic);
    out.u32(kVersion);
    const TrainConfig& c = cp.config;
    out.u32(narrow(c.feature_dim));
    out.u32(narrow(c.patterns));
    out.u32(narrow(c.features));
    out.u32(narrow(c.views));
    out.u32(narrow(c.classes));
    out.f64(c.sigma);
    out.f64(c.learning_rate);
    out.u32(narrow(c.epochs));
    out.u32(narrow(c.batch_size));
    out.u64(c.seed);
    out.u32(c.flags.to_bits());
    out.u8(c.include_self ? 1 : 0);
    write_blocks(out, cp.params);
    return std::move(out.buffer());
}

Checkpoint deserialize_checkpoint(std::span<const std::byte> bytes) {
    detail::ByteReader in(bytes);
    if (in.remaining() < kMagic.size() || in.bytes(kMagic.size(), "magic") != kMagic)
        throw FormatError("bad magic: not a 3DVG-M checkpoint");
    const std::uint32_t version = in.u32("version");
    if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));

    Checkpoint cp;
    TrainConfig& c = cp.config;
    c.feature_dim = in.u32("D_low");
    c.patterns = in.u32("N");
    c.features = in.u32("F");
    c.views = in.u32("V");
    c.classes = in.u32("L");
    c.sigma = in.f64("sigma");
    c.learning_rate = in.f64("learning_rate");
    c.epochs = in.u32("epochs");
    c.batch_size = in.u32("batch_size");
    c.seed = in.u64("seed");
    c.flags = AblationFlags::from_bits(in.u32("ablation bits"));
    c.include_self = in.u8("include_self") != 0;
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("checkpoint config: ") + e.what());
    }

    // Bound the payload before allocating anything sized by the header.
    const long double n = c.flags.no_latent ? 0.0L : static_cast<long double>(c.patterns);
    const long double rows = static_cast<long double>(c.correlation_rows());
    const long double cols = static_cast<long double>(c.correlation_cols());
    const long double l = static_cast<long double>(c.classes);
    const long double f = static_cast<long double>(c.features);
    const long double values = n * static_cast<long double>(c.feature_dim) + n + l * rows + cols + f + 2 * l +
                               f * rows * cols + f + l * f + l;
    if (values * 8 > static_cast<long double>(in.remaining()))
        throw IoError("truncated checkpoint: config implies more parameters than the file holds");

    cp.params = ModelParams::zeros(c);
    auto expected = blocks(cp.params);
    const std::uint32_t count = in.u32("block count");
    if (count != expected.size()) throw FormatError("checkpoint has " + std::to_string(count) + " parameter blocks");
    for (auto& b : expected) {
        const std::uint32_t len = in.u32("block name length");
        const std::string name = in.bytes(len, "block name");
        const std::uint32_t rows = in.u32("block rows");
        const std::uint32_t cols = in.u32("block cols");
        if (name != b.name || rows != b.rows || cols != b.cols)
            throw FormatError("checkpoint block '" + name + "' (" + std::to_string(rows) + "x" + std::to_string(cols) +
                              ") does not match expected '" + std::string(b.name) + "'");
        in.require(b.values.size() * 8, b.name);
        for (double& v : b.values) v = in.f64(b.name);
    }
    if (in.remaining() != 0) throw FormatError("trailing bytes after checkpoint payload");
    return cp;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    detail::write_file(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::string& path) { return deserialize_checkpoint(detail::read_file(path)); }

std::string params_digest(const ModelParams& params) {
    detail::ByteWriter out;
    write_blocks(out, params);
    return git_blob_hash(out.buffer());
}

}  // namespace viewgraph
