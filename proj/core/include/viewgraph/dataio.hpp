#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "viewgraph/geometry.hpp"
#include "viewgraph/tensor.hpp"

namespace viewgraph {

/// One 3D shape: its class and one low-level feature row per view.
struct ShapeSample {
    std::size_t label = 0;
    Matrix features;              // V x D_low, values exactly representable as float
    std::vector<Vec3> directions;  // V unit directions

    std::size_t views() const noexcept { return features.rows(); }

    friend bool operator==(const ShapeSample&, const ShapeSample&) = default;
};

enum class Split : std::uint8_t { unspecified = 0, train = 1, test = 2 };

std::string to_string(Split split);

struct Dataset {
    std::vector<ShapeSample> samples;
    std::vector<std::string> class_names;
    Split split = Split::unspecified;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
    std::size_t classes() const noexcept { return class_names.size(); }
    std::size_t views() const noexcept { return samples.empty() ? 0 : samples.front().views(); }
    std::size_t feature_dim() const noexcept { return samples.empty() ? 0 : samples.front().features.cols(); }

    /// Throws ValidationError (with sample index) on the first broken invariant:
    /// inconsistent V or D_low, label outside [0, L), non-finite features, or
    /// non-unit directions.
    void validate() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Serialized "3DVG-D" container:
///
///   magic "3DVG-D" | u32 version (1)
///   u32 L | u32 V | u32 D_low | u32 M | u8 per_shape_dirs | u8 split
///   L x (u32 byte length, UTF-8 class name)
///   if !per_shape_dirs: V x 3 f64 shared directions
///   M x (u32 label, [V x 3 f64 directions if per_shape_dirs], V x D_low f32 features)
///
/// All integers and floats are little-endian.
std::vector<std::byte> serialize_dataset(const Dataset& dataset);
Dataset deserialize_dataset(std::span<const std::byte> bytes);

Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& dataset, const std::string& path);

/// Desk-scale surrogate for CNN view features. Each class a draws a prototype
/// A_a (D_low x 3) and offset mu_a; view j of a shape gets
/// f_j = A_a dir_j + mu_a + noise * N(0, 1), rounded to float.
Dataset generate_synthetic(std::size_t classes, std::size_t shapes_per_class, std::size_t views,
                           std::size_t feature_dim, double noise, std::uint64_t seed);

/// Train and test sets drawn from the same class prototypes. The train half is
/// identical to generate_synthetic(classes, train_per_class, ...).
std::pair<Dataset, Dataset> generate_synthetic_split(std::size_t classes, std::size_t train_per_class,
                                                     std::size_t test_per_class, std::size_t views,
                                                     std::size_t feature_dim, double noise, std::uint64_t seed);

/// Imports a manifest CSV with header `file,class`; each row names a per-shape
/// CSV (relative to the manifest) with V rows `x,y,z,f_1,...,f_D`. Class ids
/// follow the sorted class names.
Dataset import_csv(const std::string& manifest_path);

}  // namespace viewgraph
