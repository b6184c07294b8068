#pragma once

#include <string>
#include <string_view>

namespace vquel {

/// What an iterator or path step ranges over.
enum class EntityKind { Version, Relation, File, Record, Row, Unknown };

std::string_view to_string(EntityKind kind);

enum class StepClass {
    Set,       // enumerates entities of `result`
    Scalar,    // yields a value
    Author,    // `V.author`; `.name` / `.email` follow
    All,       // the `.all` pseudo-attribute
    Invalid,
};

struct StepInfo {
    StepClass cls = StepClass::Invalid;
    EntityKind result = EntityKind::Unknown;  // for Set
    std::string attribute;                    // canonical attribute name for Scalar
};

/// Classifies `name` applied to an entity of kind `on`. Traversal steps
/// (`P`, `D`, `N`) are sets on versions only; version attribute aliases
/// (`commit_id`, `commit_ts`, `commit_message`) map to canonical names.
StepInfo classify_step(EntityKind on, std::string_view name);

bool is_traversal_step(std::string_view name);

}  // namespace vquel
