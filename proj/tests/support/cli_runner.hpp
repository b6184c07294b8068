#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fixtures.hpp"

namespace vquel::testing {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs the vquel binary with `args` (no shell), feeding `input` on stdin.
CliResult run_cli(const std::filesystem::path& binary, const std::vector<std::string>& args,
                  const std::string& input = {});

/// init + one `commit` per fixture commit through the binary. Returns the
/// first failing step, or an empty result with exit_code 0.
CliResult replay_fixture(const std::filesystem::path& binary, const Fixture& fixture,
                         const std::filesystem::path& repo, const std::filesystem::path& scratch);

}  // namespace vquel::testing
