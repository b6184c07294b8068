#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vquel/ast.hpp"
#include "vquel/model.hpp"
#include "vquel/validate.hpp"

namespace vquel {

/// Output of one retrieve statement.
struct ResultSet {
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;

    bool operator==(const ResultSet&) const = default;
};

/// Evaluates VQuel programs against an in-memory repository.
///
/// Ranges are nested iterators: every set-valued step of a range path is an
/// iterator level of its own, so `E is V.Relations.Tuples` ranges over the
/// tuples of one relation of one version. A retrieve enumerates the
/// iterators it references (and their ancestors) as nested loops in
/// declaration order. Aggregates are computed from the ranges alone,
/// independently of the enclosing `where`: plain operators group by the
/// ancestors of the aggregated iterator, `_all` operators by their
/// `group by` list.
///
/// `retrieve into X (Y.all)` makes X an iterator over the selected entities
/// of Y that keeps Y's ancestors; any other `into` makes X a set of rows
/// addressed as `X.<column>`.
class Engine {
public:
    explicit Engine(const Repository& repo) : repo_(repo) {}

    /// Executes a program as is (inline range filters are evaluated
    /// natively). Returns the result of every retrieve without `into`.
    std::vector<ResultSet> execute(const QueryProgram& program) const;

    /// parse -> desugar -> validate -> execute. Warnings go to `warnings`.
    std::vector<ResultSet> run(std::string_view source, std::vector<Diagnostic>* warnings = nullptr) const;

private:
    const Repository& repo_;
};

/// Multiset equality of rows (order-insensitive), columns compared exactly.
bool same_multiset(const ResultSet& a, const ResultSet& b);

}  // namespace vquel
