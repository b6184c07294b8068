#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "vquel/model.hpp"

namespace vquel {

/// Reads the containers of one commit from a data directory, recursively:
///
///   <name>.csv + <name>.schema.json   relation `name`; the sidecar maps
///                                     column to type (int, float, bool,
///                                     string, timestamp) in schema order
///   <path>.jsonl                      file container `path`, one JSON
///                                     record per line
///
/// A CSV header names every schema column once, in any order, plus an
/// optional `_rid` column. An empty unquoted cell is null; `""` is the empty
/// string. Any other file is rejected. Throws RepositoryError.
std::vector<Container> ingest_directory(const std::filesystem::path& dir);

/// JSON array of `[child ref, parent ref]` pairs. A child version of `@`
/// means the version being committed.
std::vector<ProvenanceEdge> ingest_provenance(const std::filesystem::path& file);

/// `Name <email>` or a bare name.
Author parse_author(std::string_view text);

}  // namespace vquel
