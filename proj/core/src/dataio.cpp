#include "viewgraph/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "viewgraph/error.hpp"

namespace viewgraph {
namespace {

constexpr std::string_view kMagic = "3DVG-D";
constexpr std::uint32_t kVersion = 1;

std::string sample_tag(std::size_t i) { return "sample " + std::to_string(i) + ": "; }

bool shares_directions(const Dataset& ds) {
    const auto& first = ds.samples.front().directions;
    return std::all_of(ds.samples.begin(), ds.samples.end(),
                       [&](const ShapeSample& s) { return s.directions == first; });
}

std::uint32_t checked_u32(std::size_t v, std::string_view field) {
    if (v > std::numeric_limits<std::uint32_t>::max())
        throw FormatError(std::string(field) + " does not fit the file format");
    return static_cast<std::uint32_t>(v);
}

Vec3 read_direction(detail::ByteReader& in, std::string_view field) {
    Vec3 d;
    for (double& c : d) c = in.f64(field);
    return d;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t start = cell.find_first_not_of(' ');
        out.push_back(start == std::string::npos ? std::string() : cell.substr(start));
    }
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(where + ": not a number: '" + s + "'");
    }
}

}  // namespace

std::string to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::test: return "test";
        case Split::unspecified: break;
    }
    return "unspecified";
}

void Dataset::validate() const {
    if (class_names.empty()) throw ValidationError("dataset has no classes");
    if (samples.empty()) return;
    const std::size_t v = views();
    const std::size_t d = feature_dim();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.features.rows() != v || s.features.cols() != d)
            throw ValidationError(sample_tag(i) + "feature matrix is " + std::to_string(s.features.rows()) + "x" +
                                      std::to_string(s.features.cols()) + ", expected " + std::to_string(v) +
                                      "x" + std::to_string(d),
                                  static_cast<long>(i));
        if (s.directions.size() != v)
            throw ValidationError(sample_tag(i) + "direction count does not match view count", static_cast<long>(i));
        if (s.label >= class_names.size())
            throw ValidationError(sample_tag(i) + "label " + std::to_string(s.label) + " outside [0, " +
                                      std::to_string(class_names.size()) + ")",
                                  static_cast<long>(i));
        if (!all_finite(s.features.flat()))
            throw ValidationError(sample_tag(i) + "non-finite feature value", static_cast<long>(i));
        for (const auto& dir : s.directions) {
            const double n = norm(dir);
            if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitNormTolerance)
                throw ValidationError(sample_tag(i) + "view direction is not unit length", static_cast<long>(i));
        }
    }
}

std::vector<std::byte> serialize_dataset(const Dataset& ds) {
    if (ds.empty()) throw FormatError("cannot serialize an empty dataset");
    if (ds.feature_dim() == 0) throw FormatError("feature dimension must be positive");
    if (ds.views() == 0) throw FormatError("view count must be positive");
    ds.validate();

    const bool shared = shares_directions(ds);
    detail::ByteWriter out;
    out.bytes(kMagic);
    out.u32(kVersion);
    out.u32(checked_u32(ds.classes(), "class count"));
    out.u32(checked_u32(ds.views(), "view count"));
    out.u32(checked_u32(ds.feature_dim(), "feature dimension"));
    out.u32(checked_u32(ds.size(), "sample count"));
    out.u8(shared ? 0 : 1);
    out.u8(static_cast<std::uint8_t>(ds.split));
    for (const auto& name : ds.class_names) {
        out.u32(checked_u32(name.size(), "class name length"));
        out.bytes(name);
    }
    if (shared)
        for (const auto& dir : ds.samples.front().directions)
            for (double c : dir) out.f64(c);
    for (const auto& s : ds.samples) {
        out.u32(static_cast<std::uint32_t>(s.label));
        if (!shared)
            for (const auto& dir : s.directions)
                for (double c : dir) out.f64(c);
        for (double f : s.features.flat()) out.f32(static_cast<float>(f));
    }
    return std::move(out.buffer());
}

Dataset deserialize_dataset(std::span<const std::byte> bytes) {
    detail::ByteReader in(bytes);
    if (in.remaining() < kMagic.size() || in.bytes(kMagic.size(), "magic") != kMagic)
        throw FormatError("bad magic: not a 3DVG-D dataset");
    const std::uint32_t version = in.u32("version");
    if (version != kVersion) throw FormatError("unsupported dataset version " + std::to_string(version));

    const std::uint32_t classes = in.u32("class count");
    const std::uint32_t views = in.u32("view count");
    const std::uint32_t dim = in.u32("feature dimension");
    const std::uint32_t count = in.u32("sample count");
    const std::uint8_t per_shape = in.u8("per_shape_dirs flag");
    const std::uint8_t split = in.u8("split tag");
    if (classes == 0) throw FormatError("header: class count is zero");
    if (views == 0) throw FormatError("header: view count is zero");
    if (dim == 0) throw FormatError("header: feature dimension is zero");
    if (count == 0) throw FormatError("header: sample count is zero");
    if (per_shape > 1) throw FormatError("header: per_shape_dirs flag must be 0 or 1");
    if (split > 2) throw FormatError("header: unknown split tag " + std::to_string(split));

    Dataset ds;
    ds.split = static_cast<Split>(split);
    ds.class_names.reserve(std::min<std::size_t>(classes, in.remaining() / 4));
    for (std::uint32_t a = 0; a < classes; ++a) {
        const std::uint32_t len = in.u32("class name length");
        ds.class_names.push_back(in.bytes(len, "class name"));
    }

    // Bound the payload before allocating anything sized by the header.
    const long double dir_bytes = static_cast<long double>(views) * 3 * 8;
    const long double per_sample = 4.0L + (per_shape ? dir_bytes : 0.0L) + static_cast<long double>(views) * dim * 4;
    const long double expected = (per_shape ? 0.0L : dir_bytes) + per_sample * count;
    if (expected > static_cast<long double>(in.remaining()))
        throw IoError("truncated file: header promises " + std::to_string(static_cast<unsigned long long>(expected)) +
                      " payload bytes after offset " + std::to_string(in.offset()) + ", " +
                      std::to_string(in.remaining()) + " available");
    if (expected < static_cast<long double>(in.remaining()))
        throw FormatError("trailing bytes after dataset payload");

    std::vector<Vec3> shared_dirs;
    if (!per_shape) {
        shared_dirs.resize(views);
        for (auto& d : shared_dirs) d = read_direction(in, "shared directions");
    }
    ds.samples.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        auto& s = ds.samples[i];
        s.label = in.u32("label");
        if (per_shape) {
            s.directions.resize(views);
            for (auto& d : s.directions) d = read_direction(in, "directions");
        } else {
            s.directions = shared_dirs;
        }
        s.features = Matrix(views, dim);
        for (double& f : s.features.flat()) f = static_cast<double>(in.f32("features"));
    }
    ds.validate();
    for (auto& s : ds.samples)
        for (auto& d : s.directions) d = checked_unit(d);
    return ds;
}

Dataset load_dataset(const std::string& path) { return deserialize_dataset(detail::read_file(path)); }

void save_dataset(const Dataset& dataset, const std::string& path) {
    detail::write_file(path, serialize_dataset(dataset));
}

std::pair<Dataset, Dataset> generate_synthetic_split(std::size_t classes, std::size_t train_per_class,
                                                     std::size_t test_per_class, std::size_t views,
                                                     std::size_t feature_dim, double noise, std::uint64_t seed) {
    if (classes < 1 || train_per_class < 1 || views < 1 || feature_dim < 1)
        throw InvalidArgument("synthetic dataset counts must be >= 1");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidArgument("noise must be finite and >= 0");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::vector<Vec3> dirs = views == 1 ? std::vector<Vec3>{{0.0, 0.0, 1.0}} : default_viewpoints(views);

    std::vector<Matrix> prototypes;
    std::vector<Vector> offsets;
    for (std::size_t a = 0; a < classes; ++a) {
        Matrix proto(feature_dim, 3);
        for (double& v : proto.flat()) v = normal(rng);
        Vector mu(feature_dim);
        for (double& v : mu) v = normal(rng);
        prototypes.push_back(std::move(proto));
        offsets.push_back(std::move(mu));
    }

    auto make = [&](std::size_t per_class, Split split) {
        Dataset ds;
        ds.split = split;
        for (std::size_t a = 0; a < classes; ++a) ds.class_names.push_back("class" + std::to_string(a));
        for (std::size_t i = 0; i < per_class; ++i)
            for (std::size_t a = 0; a < classes; ++a) {
                ShapeSample s{a, Matrix(views, feature_dim), dirs};
                for (std::size_t j = 0; j < views; ++j) {
                    const Vector clean = matvec(prototypes[a], dirs[j]);
                    for (std::size_t k = 0; k < feature_dim; ++k) {
                        const double f = clean[k] + offsets[a][k] + noise * normal(rng);
                        s.features(j, k) = static_cast<double>(static_cast<float>(f));
                    }
                }
                ds.samples.push_back(std::move(s));
            }
        return ds;
    };
    Dataset train = make(train_per_class, Split::train);
    Dataset test = test_per_class > 0 ? make(test_per_class, Split::test) : Dataset{};
    if (test_per_class == 0) test.class_names = train.class_names;
    return {std::move(train), std::move(test)};
}

Dataset generate_synthetic(std::size_t classes, std::size_t shapes_per_class, std::size_t views,
                           std::size_t feature_dim, double noise, std::uint64_t seed) {
    Dataset ds = generate_synthetic_split(classes, shapes_per_class, 0, views, feature_dim, noise, seed).first;
    ds.split = Split::unspecified;
    return ds;
}

Dataset import_csv(const std::string& manifest_path) {
    std::ifstream manifest(manifest_path);
    if (!manifest) throw IoError("cannot open manifest " + manifest_path);
    const auto base = std::filesystem::path(manifest_path).parent_path();

    std::string line;
    if (!std::getline(manifest, line)) throw FormatError(manifest_path + ": empty manifest");
    const auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "file" || header[1] != "class")
        throw FormatError(manifest_path + ": header must be 'file,class'");

    std::vector<std::pair<std::string, std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(manifest, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 2 || cells[0].empty() || cells[1].empty())
            throw FormatError(manifest_path + ":" + std::to_string(line_no) + ": expected 'file,class'");
        rows.emplace_back(cells[0], cells[1]);
    }
    if (rows.empty()) throw FormatError(manifest_path + ": no shapes listed");

    std::map<std::string, std::size_t> class_ids;
    for (const auto& r : rows) class_ids.emplace(r.second, 0);
    Dataset ds;
    for (auto& [name, id] : class_ids) {
        id = ds.class_names.size();
        ds.class_names.push_back(name);
    }

    for (const auto& [file, cls] : rows) {
        const std::string path = (base / file).string();
        std::ifstream in(path);
        if (!in) throw IoError("cannot open shape file " + path);
        std::vector<std::vector<double>> values;
        std::size_t row_no = 0;
        while (std::getline(in, line)) {
            ++row_no;
            if (line.empty() || line == "\r") continue;
            const auto cells = split_csv_line(line);
            if (cells.size() < 4) throw FormatError(path + ":" + std::to_string(row_no) + ": need x,y,z and features");
            std::vector<double> row;
            for (const auto& c : cells) row.push_back(parse_double(c, path + ":" + std::to_string(row_no)));
            values.push_back(std::move(row));
        }
        if (values.empty()) throw FormatError(path + ": no views");
        const std::size_t dim = values.front().size() - 3;
        ShapeSample s{class_ids.at(cls), Matrix(values.size(), dim), {}};
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j].size() != dim + 3) throw FormatError(path + ": rows have different lengths");
            Vec3 dir{values[j][0], values[j][1], values[j][2]};
            const double n = norm(dir);
            if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitNormTolerance)
                throw ValidationError(path + ": view " + std::to_string(j) + " direction is not unit length",
                                      static_cast<long>(ds.samples.size()));
            s.directions.push_back(checked_unit(dir));
            for (std::size_t k = 0; k < dim; ++k)
                s.features(j, k) = static_cast<double>(static_cast<float>(values[j][k + 3]));
        }
        ds.samples.push_back(std::move(s));
    }
    ds.validate();
    return ds;
}

}  // namespace viewgraph
