#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viewgraph/error.hpp"

namespace viewgraph::detail {

/// Little-endian append-only byte sink.
class ByteWriter {
public:
    void bytes(std::string_view s) {
        for (char c : s) buf_.push_back(static_cast<std::byte>(c));
    }
    void u8(std::uint8_t v) { buf_.push_back(static_cast<std::byte>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    std::vector<std::byte>& buffer() noexcept { return buf_; }

private:
    std::vector<std::byte> buf_;
};

/// Bounds-checked little-endian reader. Running past the end raises IoError
/// naming the field and byte offset.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::byte> data) : data_(data) {}

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    void require(std::size_t n, std::string_view field) const {
        if (n > remaining())
            throw IoError("truncated file: need " + std::to_string(n) + " bytes for " + std::string(field) +
                          " at offset " + std::to_string(pos_) + ", " + std::to_string(remaining()) +
                          " available");
    }

    std::string bytes(std::size_t n, std::string_view field) {
        require(n, field);
        std::string s(n, '\0');
        for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<char>(data_[pos_ + i]);
        pos_ += n;
        return s;
    }
    std::uint8_t u8(std::string_view field) {
        require(1, field);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::uint32_t u32(std::string_view field) {
        require(4, field);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64(std::string_view field) {
        require(8, field);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    float f32(std::string_view field) { return std::bit_cast<float>(u32(field)); }
    double f64(std::string_view field) { return std::bit_cast<double>(u64(field)); }

private:
    std::span<const std::byte> data_;
    std::size_t pos_ = 0;
};

std::vector<std::byte> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::byte> data);

}  // namespace viewgraph::detail
