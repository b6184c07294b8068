#pragma once

#include "vquel/ast.hpp"

namespace vquel {

/// Expands inline path filters into auxiliary ranges and `retrieve into`
/// statements:
///
///     range of V is Version(id = "v01")
///
/// becomes
///
///     range of __g1 is Version
///     retrieve into V (__g1.all) where __g1.id = "v01"
///
/// A path with several filtered steps is split at each of them, chaining
/// fresh `__g<n>` iterators. Programs without inline filters are returned
/// unchanged, so the rewrite is idempotent.
QueryProgram desugar(const QueryProgram& program);

}  // namespace vquel
