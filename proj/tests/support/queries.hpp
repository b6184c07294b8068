#pragma once

#include <string>
#include <vector>

namespace vquel::testing {

/// One worked example query together with the fixture it runs against.
struct NamedQuery {
    std::string name;     // also the golden file stem
    std::string fixture;  // Fixture::name
    std::string text;
};

/// The sixteen worked examples, in order.
const std::vector<NamedQuery>& example_queries();

/// Filter shorthand and its spelled-out form, for the single-version case
/// and the cross-version employee diff.
struct EquivalentPair {
    std::string name;
    std::string fixture;
    std::string shorthand;
    std::string expanded;
};

const std::vector<EquivalentPair>& shorthand_pairs();

}  // namespace vquel::testing
