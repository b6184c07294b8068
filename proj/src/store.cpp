#include "vquel/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "vquel/error.hpp"
#include "vquel/json_codec.hpp"

namespace vquel {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kObjects = "objects";
constexpr const char* kProv = "prov";
constexpr const char* kLock = "LOCK";

class FileLock {
public:
    explicit FileLock(const fs::path& path) {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ < 0) throw RepositoryError("cannot open lock file " + path.string());
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw RepositoryError("cannot lock " + path.string());
        }
    }
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw RepositoryError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw RepositoryError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_new_file(const fs::path& path, const std::string& content) {
    if (fs::exists(path)) throw RepositoryError("refusing to overwrite " + path.string());
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw RepositoryError("cannot write " + path.string());
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw RepositoryError("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

json delta_to_json(const StorageEntry& e) {
    json removed = json::array();
    for (RecordId rid : e.delta.removed) removed.push_back(rid);
    return json{{"kind", "delta"},
                {"base", e.base},
                {"added", records_to_json(e.delta.added)},
                {"removed", removed},
                {"modified", records_to_json(e.delta.modified)}};
}

json entry_to_json(const StorageEntry& e) {
    if (e.kind == StorageEntry::Kind::Snapshot) return json{{"kind", "snapshot"}, {"records", records_to_json(e.records)}};
    return delta_to_json(e);
}

StorageEntry entry_from_json(const json& j) {
    StorageEntry e;
    std::string kind = j.value("kind", "");
    if (kind == "snapshot") {
        e.kind = StorageEntry::Kind::Snapshot;
        e.records = records_from_json(j.at("records"));
    } else if (kind == "delta") {
        e.kind = StorageEntry::Kind::Delta;
        e.base = j.at("base").get<std::string>();
        e.delta.added = records_from_json(j.at("added"));
        for (const auto& rid : j.at("removed")) e.delta.removed.push_back(rid.get<RecordId>());
        e.delta.modified = records_from_json(j.at("modified"));
    } else {
        throw RepositoryError("unknown storage entry kind '" + kind + "'");
    }
    return e;
}

json version_to_json(const VersionInfo& v) {
    json author{{"name", v.author.name}};
    author["email"] = v.author.email ? json(*v.author.email) : json(nullptr);
    json containers = json::array();
    for (const auto& c : v.containers) {
        json jc{{"name_or_path", c.name},
                {"kind", std::string(to_string(c.kind))},
                {"changed", c.changed},
                {"storage_ref", c.storage_ref},
                {"chain_depth", c.chain_depth}};
        if (c.kind == ContainerKind::Relation) {
            json schema = json::array();
            for (const auto& col : c.schema) schema.push_back({{"name", col.name}, {"type", to_string(col.type)}});
            jc["schema"] = schema;
        }
        containers.push_back(std::move(jc));
    }
    return json{{"id", v.id},
                {"author", author},
                {"creation_ts", format_timestamp(v.creation_ts)},
                {"commit_msg", v.commit_msg},
                {"parents", v.parents},
                {"containers", containers}};
}

VersionInfo version_from_json(const json& j) {
    VersionInfo v;
    v.id = j.at("id").get<std::string>();
    const auto& author = j.at("author");
    v.author.name = author.at("name").get<std::string>();
    if (author.contains("email") && author["email"].is_string()) v.author.email = author["email"].get<std::string>();
    auto ts = parse_timestamp(j.at("creation_ts").get<std::string>());
    if (!ts) throw RepositoryError("bad creation_ts for version " + v.id);
    v.creation_ts = *ts;
    v.commit_msg = j.value("commit_msg", "");
    v.parents = j.at("parents").get<std::vector<std::string>>();
    for (const auto& jc : j.at("containers")) {
        ContainerInfo c;
        c.name = jc.at("name_or_path").get<std::string>();
        std::string kind = jc.at("kind").get<std::string>();
        if (kind == "relation") {
            c.kind = ContainerKind::Relation;
        } else if (kind == "file") {
            c.kind = ContainerKind::File;
        } else {
            throw RepositoryError("unknown container kind '" + kind + "'");
        }
        c.changed = jc.at("changed").get<bool>();
        c.storage_ref = jc.at("storage_ref").get<std::string>();
        c.chain_depth = jc.value("chain_depth", 0);
        if (jc.contains("schema")) {
            for (const auto& col : jc["schema"]) {
                auto type = parse_column_type(col.at("type").get<std::string>());
                if (!type) throw RepositoryError("unknown column type in " + c.name);
                c.schema.push_back({col.at("name").get<std::string>(), *type});
            }
        }
        v.containers.push_back(std::move(c));
    }
    return v;
}

json provenance_to_json(const std::vector<ProvenanceEdge>& edges) {
    json out = json::array();
    for (const auto& e : edges) out.push_back(json::array({e.child.to_string(), e.parent.to_string()}));
    return out;
}

std::vector<ProvenanceEdge> provenance_from_json(const json& j) {
    std::vector<ProvenanceEdge> out;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2) throw RepositoryError("provenance entries are [child, parent] pairs");
        auto child = RecordRef::parse(pair[0].get<std::string>());
        auto parent = RecordRef::parse(pair[1].get<std::string>());
        if (!child || !parent) throw RepositoryError("malformed record reference in provenance: " + pair.dump());
        out.push_back({*child, *parent});
    }
    return out;
}

// Commit-time view of the store: materializes versions on demand.
class StoreContext : public CommitContext {
public:
    explicit StoreContext(const VersionStore& store) : store_(store) {}

    bool contains(std::string_view id) const override { return store_.contains(id); }

    const VersionNode& materialize(std::string_view id) const override {
        auto it = cache_.find(id);
        if (it == cache_.end()) it = cache_.emplace(std::string(id), store_.checkout(id)).first;
        return it->second;
    }

    std::vector<std::string> ancestors_of(std::string_view id) const override { return store_.ancestors(id); }

private:
    const VersionStore& store_;
    mutable std::map<std::string, VersionNode, std::less<>> cache_;
};

}  // namespace

ContainerDelta diff_records(std::span<const Record> base, std::span<const Record> target) {
    std::map<RecordId, const Record*> before;
    for (const auto& r : base) before.emplace(r.rid, &r);
    std::map<RecordId, const Record*> after;
    for (const auto& r : target) after.emplace(r.rid, &r);

    ContainerDelta delta;
    for (const auto& [rid, rec] : after) {
        auto it = before.find(rid);
        if (it == before.end()) {
            delta.added.push_back(*rec);
        } else if (it->second->fields != rec->fields) {
            delta.modified.push_back(*rec);
        }
    }
    for (const auto& [rid, rec] : before) {
        if (!after.contains(rid)) delta.removed.push_back(rid);
    }
    return delta;
}

std::vector<Record> apply_delta(std::span<const Record> base, const ContainerDelta& delta) {
    std::map<RecordId, FieldMap> rows;
    for (const auto& r : base) rows.emplace(r.rid, r.fields);
    for (RecordId rid : delta.removed) {
        if (rows.erase(rid) == 0) throw RepositoryError("delta removes unknown record " + std::to_string(rid));
    }
    for (const auto& r : delta.modified) {
        auto it = rows.find(r.rid);
        if (it == rows.end()) throw RepositoryError("delta modifies unknown record " + std::to_string(r.rid));
        it->second = r.fields;
    }
    for (const auto& r : delta.added) {
        if (!rows.emplace(r.rid, r.fields).second) {
            throw RepositoryError("delta adds existing record " + std::to_string(r.rid));
        }
    }
    std::vector<Record> out;
    out.reserve(rows.size());
    for (auto& [rid, fields] : rows) out.push_back(Record{rid, std::move(fields)});
    return out;
}

VersionStore VersionStore::init(const fs::path& root) {
    std::error_code ec;
    if (fs::exists(root, ec)) {
        if (!fs::is_directory(root, ec)) throw RepositoryError(root.string() + " exists and is not a directory");
        if (!fs::is_empty(root, ec)) throw RepositoryError(root.string() + " exists and is not empty");
    }
    fs::create_directories(root / kObjects, ec);
    if (ec) throw RepositoryError("cannot create " + root.string() + ": " + ec.message());
    fs::create_directories(root / kProv, ec);
    if (ec) throw RepositoryError("cannot create " + root.string() + ": " + ec.message());
    VersionStore store(root);
    store.write_manifest();
    return store;
}

VersionStore VersionStore::open(const fs::path& root) {
    if (!fs::exists(root / kManifest)) throw RepositoryError(root.string() + " is not a repository (no manifest.json)");
    VersionStore store(root);
    store.read_manifest();
    return store;
}

void VersionStore::read_manifest() {
    json j = read_json(root_ / kManifest);
    if (!j.is_array()) throw RepositoryError("manifest.json must hold a JSON array of versions");
    std::vector<VersionInfo> versions;
    try {
        for (const auto& v : j) versions.push_back(version_from_json(v));
    } catch (const json::exception& e) {
        throw RepositoryError(std::string("malformed manifest: ") + e.what());
    }
    versions_ = std::move(versions);
    rebuild_index();
}

void VersionStore::rebuild_index() {
    index_.clear();
    refs_.clear();
    for (std::size_t i = 0; i < versions_.size(); ++i) {
        versions_[i].children.clear();
        if (!index_.emplace(versions_[i].id, i).second) {
            throw RepositoryError("manifest lists version '" + versions_[i].id + "' twice");
        }
    }
    for (auto& v : versions_) {
        for (const auto& p : v.parents) {
            auto it = index_.find(p);
            if (it == index_.end()) throw RepositoryError("version " + v.id + " has unknown parent " + p);
            versions_[it->second].children.push_back(v.id);
        }
        for (const auto& c : v.containers) refs_.emplace(c.storage_ref, &c);
    }
}

void VersionStore::write_manifest() const {
    json j = json::array();
    for (const auto& v : versions_) j.push_back(version_to_json(v));
    write_atomic(root_ / kManifest, j.dump(2) + "\n");
}

const VersionInfo* VersionStore::find(std::string_view id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &versions_[it->second];
}

const ContainerInfo* VersionStore::container_info(std::string_view storage_ref) const {
    auto it = refs_.find(storage_ref);
    return it == refs_.end() ? nullptr : it->second;
}

std::span<const std::string> VersionStore::parents_of(std::string_view id) const {
    const VersionInfo* v = find(id);
    if (v == nullptr) return {};
    return v->parents;
}

std::span<const std::string> VersionStore::children_of(std::string_view id) const {
    const VersionInfo* v = find(id);
    if (v == nullptr) return {};
    return v->children;
}

std::string VersionStore::commit(CommitRequest request) {
    FileLock lock(root_ / kLock);
    read_manifest();

    std::string id = request.id;
    if (id.empty()) {
        do {
            id = generate_version_id(versions_.size() + 1);
        } while (contains(id));
    }

    StoreContext context(*this);
    VersionNode node = prepare_commit(std::move(request), id, context);
    const VersionInfo* first_parent = node.parents.empty() ? nullptr : find(node.parents.front());

    VersionInfo info;
    info.id = node.id;
    info.author = node.author;
    info.creation_ts = node.creation_ts;
    info.commit_msg = node.commit_msg;
    info.parents = node.parents;

    std::vector<std::pair<std::string, StorageEntry>> entries;
    for (std::size_t i = 0; i < node.containers.size(); ++i) {
        const Container& c = node.containers[i];
        ContainerInfo ci{c.name, c.kind, c.changed, c.schema, node.id + "." + std::to_string(i), 0};

        const ContainerInfo* base = nullptr;
        if (first_parent != nullptr) {
            for (const auto& pc : first_parent->containers) {
                if (pc.name == c.name && pc.kind == c.kind) base = &pc;
            }
        }
        StorageEntry entry;
        if (base != nullptr && base->chain_depth + 1 <= kMaxDeltaChain) {
            const Container* base_content = context.materialize(first_parent->id).container(c.name);
            entry.kind = StorageEntry::Kind::Delta;
            entry.base = base->storage_ref;
            entry.delta = diff_records(base_content->records, c.records);
            ci.chain_depth = base->chain_depth + 1;
        } else {
            entry.kind = StorageEntry::Kind::Snapshot;
            entry.records = c.records;
        }
        entries.emplace_back(ci.storage_ref, std::move(entry));
        info.containers.push_back(std::move(ci));
    }

    for (const auto& [ref, entry] : entries) {
        write_new_file(root_ / kObjects / (ref + ".json"), entry_to_json(entry).dump() + "\n");
    }
    if (!node.provenance.empty()) {
        write_new_file(root_ / kProv / (node.id + ".json"), provenance_to_json(node.provenance).dump() + "\n");
    }

    versions_.push_back(std::move(info));
    rebuild_index();
    write_manifest();
    return id;
}

StorageEntry VersionStore::read_entry(std::string_view storage_ref) const {
    try {
        return entry_from_json(read_json(root_ / kObjects / (std::string(storage_ref) + ".json")));
    } catch (const json::exception& e) {
        throw RepositoryError("malformed storage entry " + std::string(storage_ref) + ": " + e.what());
    }
}

std::vector<Record> VersionStore::materialize(std::string_view storage_ref,
                                              std::map<std::string, std::vector<Record>, std::less<>>* cache) const {
    if (cache != nullptr) {
        if (auto it = cache->find(storage_ref); it != cache->end()) return it->second;
    }
    StorageEntry entry = read_entry(storage_ref);
    std::vector<Record> records;
    if (entry.kind == StorageEntry::Kind::Snapshot) {
        records = std::move(entry.records);
        std::ranges::sort(records, {}, &Record::rid);
    } else {
        if (container_info(entry.base) == nullptr) {
            throw RepositoryError("delta " + std::string(storage_ref) + " has unknown base " + entry.base);
        }
        records = apply_delta(materialize(entry.base, cache), entry.delta);
    }
    if (cache != nullptr) cache->emplace(std::string(storage_ref), records);
    return records;
}

VersionNode VersionStore::checkout_with(std::string_view id,
                                        std::map<std::string, std::vector<Record>, std::less<>>* cache) const {
    const VersionInfo* info = find(id);
    if (info == nullptr) throw NotFoundError("unknown version '" + std::string(id) + "'");
    VersionNode node;
    node.id = info->id;
    node.author = info->author;
    node.creation_ts = info->creation_ts;
    node.commit_msg = info->commit_msg;
    node.parents = info->parents;
    node.children = info->children;
    for (const auto& ci : info->containers) {
        Container c{ci.kind, ci.name, ci.schema, materialize(ci.storage_ref, cache), ci.changed};
        node.containers.push_back(std::move(c));
    }
    fs::path prov = root_ / kProv / (info->id + ".json");
    if (fs::exists(prov)) node.provenance = provenance_from_json(read_json(prov));
    return node;
}

VersionNode VersionStore::checkout(std::string_view id) const {
    return checkout_with(id, nullptr);
}

Repository VersionStore::load() const {
    Repository repo;
    std::map<std::string, std::vector<Record>, std::less<>> cache;
    for (const auto& v : versions_) repo.insert(checkout_with(v.id, &cache));
    return repo;
}

std::vector<std::string> VersionStore::ancestors(std::string_view id, std::optional<unsigned> hops) const {
    return vquel::ancestors(*this, id, hops);
}

std::vector<std::string> VersionStore::descendants(std::string_view id, std::optional<unsigned> hops) const {
    return vquel::descendants(*this, id, hops);
}

std::vector<std::string> VersionStore::neighborhood(std::string_view id, std::optional<unsigned> hops,
                                                    HopMode mode) const {
    return vquel::neighborhood(*this, id, hops, mode);
}

std::vector<const VersionInfo*> VersionStore::log(std::optional<std::string_view> container) const {
    std::vector<const VersionInfo*> out;
    for (const auto& v : versions_) {
        if (container) {
            auto it = std::ranges::find(v.containers, *container, &ContainerInfo::name);
            if (it == v.containers.end() || !it->changed) continue;
        }
        out.push_back(&v);
    }
    std::ranges::sort(out, [](const VersionInfo* a, const VersionInfo* b) {
        return std::tie(a->creation_ts, a->id) > std::tie(b->creation_ts, b->id);
    });
    return out;
}

std::uintmax_t VersionStore::object_bytes() const {
    std::uintmax_t total = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root_ / kObjects)) {
        if (entry.is_regular_file()) total += entry.file_size();
    }
    return total;
}

}  // namespace vquel
