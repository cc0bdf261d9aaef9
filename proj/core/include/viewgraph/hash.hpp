#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace viewgraph {

/// Hex SHA-1 of "blob <size>\0" + data, i.e. the id `git hash-object` prints.
std::string git_blob_hash(std::span<const std::byte> data);

/// git_blob_hash of a file's contents.
std::string file_hash(const std::string& path);

}  // namespace viewgraph
