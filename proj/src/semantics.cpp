#include "vquel/semantics.hpp"

namespace vquel {

std::string_view to_string(EntityKind kind) {
    switch (kind) {
        case EntityKind::Version: return "version";
        case EntityKind::Relation: return "relation";
        case EntityKind::File: return "file";
        case EntityKind::Record: return "record";
        case EntityKind::Row: return "derived row";
        case EntityKind::Unknown: return "entity";
    }
    return "entity";
}

bool is_traversal_step(std::string_view name) {
    return name == "P" || name == "D" || name == "N";
}

StepInfo classify_step(EntityKind on, std::string_view name) {
    if (name == "all") return {StepClass::All, on, "all"};
    auto scalar = [](std::string_view attr) { return StepInfo{StepClass::Scalar, EntityKind::Unknown, std::string(attr)}; };
    switch (on) {
        case EntityKind::Version:
            if (name == "Relations") return {StepClass::Set, EntityKind::Relation, {}};
            if (name == "Files") return {StepClass::Set, EntityKind::File, {}};
            if (name == "parents" || name == "children" || is_traversal_step(name)) {
                return {StepClass::Set, EntityKind::Version, {}};
            }
            if (name == "author") return {StepClass::Author, EntityKind::Unknown, "author"};
            if (name == "id" || name == "commit_id") return scalar("id");
            if (name == "creation_ts" || name == "commit_ts") return scalar("creation_ts");
            if (name == "commit_msg" || name == "commit_message") return scalar("commit_msg");
            return {};
        case EntityKind::Relation:
        case EntityKind::File:
            if (name == "Tuples" || name == "Records") return {StepClass::Set, EntityKind::Record, {}};
            if (name == "name" || name == "full_path") return scalar("name");
            if (name == "changed") return scalar("changed");
            return {};
        case EntityKind::Record:
            if (name == "parents" || name == "children") return {StepClass::Set, EntityKind::Record, {}};
            return scalar(name);
        case EntityKind::Row:
            return scalar(name);
        case EntityKind::Unknown:
            if (name == "Relations") return {StepClass::Set, EntityKind::Relation, {}};
            if (name == "Files") return {StepClass::Set, EntityKind::File, {}};
            if (name == "Tuples" || name == "Records") return {StepClass::Set, EntityKind::Record, {}};
            if (name == "parents" || name == "children" || is_traversal_step(name)) {
                return {StepClass::Set, EntityKind::Unknown, {}};
            }
            if (name == "author") return {StepClass::Author, EntityKind::Unknown, "author"};
            return scalar(name);
    }
    return {};
}

}  // namespace vquel
