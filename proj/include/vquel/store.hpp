#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vquel/graph.hpp"
#include "vquel/model.hpp"

namespace vquel {

/// Difference between a container and its base, keyed by record id.
struct ContainerDelta {
    std::vector<Record> added;
    std::vector<RecordId> removed;
    std::vector<Record> modified;  // full new field map per id

    bool empty() const { return added.empty() && removed.empty() && modified.empty(); }
    bool operator==(const ContainerDelta&) const = default;
};

/// Delta turning `base` into `target`. Both must have unique record ids.
ContainerDelta diff_records(std::span<const Record> base, std::span<const Record> target);

/// Applies a delta; throws RepositoryError when it does not fit the base.
/// The result is sorted by record id.
std::vector<Record> apply_delta(std::span<const Record> base, const ContainerDelta& delta);

struct StorageEntry {
    enum class Kind { Snapshot, Delta };

    Kind kind = Kind::Snapshot;
    std::string base;              // storage ref, deltas only
    std::vector<Record> records;   // snapshots only
    ContainerDelta delta;          // deltas only
};

/// Per-container metadata kept in the manifest.
struct ContainerInfo {
    std::string name;
    ContainerKind kind = ContainerKind::Relation;
    bool changed = true;
    std::vector<Column> schema;
    std::string storage_ref;
    int chain_depth = 0;  // number of deltas between this entry and its snapshot
};

struct VersionInfo {
    std::string id;
    Author author;
    Timestamp creation_ts;
    std::string commit_msg;
    std::vector<std::string> parents;
    std::vector<std::string> children;
    std::vector<ContainerInfo> containers;
};

/// On-disk repository with delta-compressed container storage.
///
/// Layout under the root directory:
///   manifest.json            version index (JSON array of version objects)
///   objects/<ref>.json       snapshot or delta per stored container
///   prov/<version>.json      record-level provenance edges of a version
///   LOCK                     held exclusively while a commit runs
///
/// Each container is stored as a delta against the same-named container of
/// the first parent, or as a snapshot when no such container exists or the
/// delta chain would exceed kMaxDeltaChain entries.
class VersionStore {
public:
    static constexpr int kMaxDeltaChain = 10;

    /// Creates a repository; the directory must be absent or empty.
    static VersionStore init(const std::filesystem::path& root);
    static VersionStore open(const std::filesystem::path& root);

    const std::filesystem::path& root() const { return root_; }

    /// Commits a new immutable version and returns its id.
    std::string commit(CommitRequest request);

    /// Fully materialized version including provenance and child edges.
    VersionNode checkout(std::string_view id) const;

    /// Materializes every version into an in-memory repository.
    Repository load() const;

    std::vector<std::string> ancestors(std::string_view id, std::optional<unsigned> hops = {}) const;
    std::vector<std::string> descendants(std::string_view id, std::optional<unsigned> hops = {}) const;
    std::vector<std::string> neighborhood(std::string_view id, std::optional<unsigned> hops,
                                          HopMode mode = HopMode::Within) const;

    /// Versions newest first (creation_ts desc, then id desc). With a
    /// container name, only versions where that container changed.
    std::vector<const VersionInfo*> log(std::optional<std::string_view> container = {}) const;

    /// Versions in commit order.
    const std::vector<VersionInfo>& versions() const { return versions_; }
    const VersionInfo* find(std::string_view id) const;
    std::size_t size() const { return versions_.size(); }

    StorageEntry read_entry(std::string_view storage_ref) const;

    /// Total size of everything under objects/.
    std::uintmax_t object_bytes() const;

    // graph.hpp concept
    bool contains(std::string_view id) const { return find(id) != nullptr; }
    std::span<const std::string> parents_of(std::string_view id) const;
    std::span<const std::string> children_of(std::string_view id) const;

private:
    explicit VersionStore(std::filesystem::path root) : root_(std::move(root)) {}

    void read_manifest();
    void write_manifest() const;
    void rebuild_index();
    std::vector<Record> materialize(std::string_view storage_ref,
                                    std::map<std::string, std::vector<Record>, std::less<>>* cache) const;
    VersionNode checkout_with(std::string_view id,
                              std::map<std::string, std::vector<Record>, std::less<>>* cache) const;
    const ContainerInfo* container_info(std::string_view storage_ref) const;

    std::filesystem::path root_;
    std::vector<VersionInfo> versions_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::map<std::string, const ContainerInfo*, std::less<>> refs_;
};

}  // namespace vquel
