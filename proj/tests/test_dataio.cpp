#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "viewgraph/dataio.hpp"
#include "viewgraph/error.hpp"

using namespace viewgraph;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("viewgraph_test_dataio_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Byte offset of the first sample's label in a shared-direction file.
std::size_t first_label_offset(const Dataset& ds) {
    std::size_t off = 6 + 4 + 16 + 2;
    for (const auto& n : ds.class_names) off += 4 + n.size();
    return off + ds.views() * 3 * 8;
}

void put_u32(std::vector<std::byte>& bytes, std::size_t off, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes[off + i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
}

}  // namespace

TEST_CASE("round trip preserves every field") {
    for (std::size_t views : {1, 5, 12}) {
        Dataset ds = generate_synthetic(3, 2, views, 7, 0.3, 1);
        ds.split = Split::test;
        CHECK(deserialize_dataset(serialize_dataset(ds)) == ds);
    }
}

TEST_CASE("per-shape directions round trip") {
    Dataset ds = generate_synthetic(2, 2, 4, 3, 0.1, 2);
    ds.samples[1].directions[0] = {0.0, 1.0, 0.0};
    ds.samples[1].directions[1] = {0.0, 0.0, 1.0};
    CHECK(deserialize_dataset(serialize_dataset(ds)) == ds);
}

TEST_CASE("files are written and overwritten") {
    const fs::path dir = scratch_dir("files");
    const std::string path = (dir / "a.3dvg").string();
    const Dataset a = generate_synthetic(2, 3, 4, 3, 0.1, 3);
    const Dataset b = generate_synthetic(3, 1, 6, 2, 0.1, 4);
    save_dataset(a, path);
    CHECK(load_dataset(path) == a);
    save_dataset(b, path);
    CHECK(load_dataset(path) == b);
    CHECK_THROWS_AS(load_dataset((dir / "missing.3dvg").string()), IoError);
}

TEST_CASE("label equal to the class count is a validation error") {
    const Dataset ds = generate_synthetic(3, 2, 4, 3, 0.1, 5);
    auto bytes = serialize_dataset(ds);
    put_u32(bytes, first_label_offset(ds), 3);
    try {
        (void)deserialize_dataset(bytes);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.sample() == 0);
    }
    Dataset broken = ds;
    broken.samples[4].label = 3;
    try {
        broken.validate();
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.sample() == 4);
    }
}

TEST_CASE("in-memory invariants") {
    Dataset ds = generate_synthetic(2, 2, 4, 3, 0.1, 6);
    Dataset nan = ds;
    nan.samples[2].features(1, 1) = NAN;
    CHECK_THROWS_AS(nan.validate(), ValidationError);
    Dataset dirs = ds;
    dirs.samples[1].directions[0] = {1.0, 1.0, 0.0};
    CHECK_THROWS_AS(dirs.validate(), ValidationError);
    Dataset views = ds;
    views.samples[3].features = Matrix(3, 3);
    CHECK_THROWS_AS(views.validate(), ValidationError);
    CHECK_THROWS_AS(serialize_dataset(Dataset{}), FormatError);
}

TEST_CASE("truncation and garbage") {
    const Dataset ds = generate_synthetic(2, 2, 4, 3, 0.1, 7);
    const auto bytes = serialize_dataset(ds);
    for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{12}, bytes.size() / 2, bytes.size() - 1}) {
        CAPTURE(cut);
        const std::span<const std::byte> head(bytes.data(), cut);
        CHECK_THROWS(deserialize_dataset(head));
    }
    CHECK_THROWS_AS(deserialize_dataset(std::span<const std::byte>(bytes.data(), bytes.size() - 1)), IoError);
    auto extra = bytes;
    extra.push_back(std::byte{0});
    CHECK_THROWS_AS(deserialize_dataset(extra), FormatError);
    auto magic = bytes;
    magic[0] = std::byte{'X'};
    CHECK_THROWS_AS(deserialize_dataset(magic), FormatError);
}

TEST_CASE("zero header counts are format errors") {
    const Dataset ds = generate_synthetic(2, 2, 4, 3, 0.1, 8);
    for (std::size_t field = 0; field < 4; ++field) {
        auto bytes = serialize_dataset(ds);
        put_u32(bytes, 10 + 4 * field, 0);
        CHECK_THROWS_AS(deserialize_dataset(bytes), FormatError);
    }
}

TEST_CASE("random corruption only raises typed errors") {
    const Dataset ds = generate_synthetic(3, 2, 4, 3, 0.1, 9);
    const auto clean = serialize_dataset(ds);
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 500; ++trial) {
        auto bytes = clean;
        const int flips = 1 + static_cast<int>(rng() % 4);
        for (int f = 0; f < flips; ++f) bytes[rng() % bytes.size()] = static_cast<std::byte>(rng() & 0xff);
        if (rng() % 3 == 0) bytes.resize(rng() % bytes.size());
        try {
            const Dataset d = deserialize_dataset(bytes);
            d.validate();
        } catch (const FormatError&) {
        } catch (const IoError&) {
        } catch (const ValidationError&) {
        } catch (const std::exception& e) {
            FAIL("untyped error: " << e.what());
        }
    }
}

TEST_CASE("synthetic generator") {
    const Dataset a = generate_synthetic(4, 3, 6, 5, 0.2, 11);
    CHECK(a == generate_synthetic(4, 3, 6, 5, 0.2, 11));
    CHECK_FALSE(a == generate_synthetic(4, 3, 6, 5, 0.2, 12));
    CHECK(a.size() == 12);
    CHECK(a.class_names.front() == "class0");
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.samples[i].label == i % 4);
    for (const auto& s : a.samples)
        for (double v : s.features.flat()) CHECK(static_cast<double>(static_cast<float>(v)) == v);

    const auto [tr, te] = generate_synthetic_split(4, 3, 2, 6, 5, 0.2, 11);
    CHECK(tr.samples == a.samples);
    CHECK(te.size() == 8);
    CHECK(te.split == Split::test);
    CHECK_THROWS_AS(generate_synthetic(0, 3, 6, 5, 0.2, 1), InvalidArgument);
    CHECK_THROWS_AS(generate_synthetic(2, 3, 6, 5, -1.0, 1), InvalidArgument);
}

TEST_CASE("noise-free shapes sit exactly on their class prototype") {
    const Dataset ds = generate_synthetic(5, 4, 6, 8, 0.0, 13);
    // Nearest neighbour among the first shape of each class recovers every label.
    for (const auto& s : ds.samples) {
        std::size_t best = 0;
        double best_d = 1e300;
        for (std::size_t a = 0; a < 5; ++a) {
            double d = 0.0;
            const auto& proto = ds.samples[a].features.flat();
            for (std::size_t i = 0; i < proto.size(); ++i) d += (proto[i] - s.features.flat()[i]) * (proto[i] - s.features.flat()[i]);
            if (d < best_d) {
                best_d = d;
                best = a;
            }
        }
        CHECK(best == s.label);
        CHECK(best_d == 0.0);
    }
}

TEST_CASE("CSV import") {
    const fs::path dir = scratch_dir("csv");
    {
        std::ofstream m(dir / "manifest.csv");
        m << "file,class\nchair1.csv,chair\ntable1.csv,table\nchair2.csv,chair\n";
        std::ofstream a(dir / "chair1.csv");
        a << "1,0,0,0.5,1.5\n0,1,0,2,3\n";
        std::ofstream b(dir / "table1.csv");
        b << "1,0,0,7,8\n0,1,0,9,10\n";
        std::ofstream c(dir / "chair2.csv");
        c << "1,0,0,0.1,0.2\n0,1,0,0.3,0.4\n";
    }
    const Dataset ds = import_csv((dir / "manifest.csv").string());
    REQUIRE(ds.size() == 3);
    CHECK(ds.class_names == std::vector<std::string>{"chair", "table"});
    CHECK(ds.samples[1].label == 1);
    CHECK(ds.samples[2].label == 0);
    CHECK(ds.samples[0].features(1, 1) == 3.0);
    CHECK(ds.samples[2].features(0, 0) == static_cast<double>(0.1f));

    {
        std::ofstream bad(dir / "table1.csv");
        bad << "1,0,0,7,8\n0,2,0,9,10\n";
    }
    CHECK_THROWS_AS(import_csv((dir / "manifest.csv").string()), ValidationError);
    {
        std::ofstream bad(dir / "table1.csv");
        bad << "1,0,0,7,x\n0,1,0,9,10\n";
    }
    CHECK_THROWS_AS(import_csv((dir / "manifest.csv").string()), FormatError);
    {
        std::ofstream m(dir / "manifest.csv");
        m << "path,label\n";
    }
    CHECK_THROWS_AS(import_csv((dir / "manifest.csv").string()), FormatError);
    CHECK_THROWS_AS(import_csv((dir / "nope.csv").string()), IoError);
}
