#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vquel/model.hpp"

namespace vquel::testing {

/// A named commit sequence. Commits carry explicit ids so queries can refer
/// to them (`v01`, `v02`, ...).
struct Fixture {
    std::string name;
    std::vector<CommitRequest> commits;
};

Timestamp ts(std::string_view text);

/// v01 (Employee x3, Department x2) and its child v02 (two more employees,
/// one more department, new file Forms.csv), both by Alice.
Fixture figure1();

/// s1/s2/s3 with 100, 98 and 100 Smiths in Employee; s2 holds exactly 100
/// tuples over all its relations.
Fixture smith();

/// j1/j2/j3 with relations S(id, label) and T(t_id, s_id); join sizes 110,
/// 50 and 100.
Fixture join();

/// r1 -> r2 -> v01 -> d1 -> d2 -> d3 plus a side branch b1 off r2; Employee
/// sizes chosen around 100, relation S with provenance into ancestors.
Fixture chain();

/// v01/v02 where e01 is modified, e03 deleted and e04 added.
Fixture diff_pair();

std::vector<Fixture> all_fixtures();

Repository build(const Fixture& fixture);

/// Writes one commit in the CLI ingestion format: `<relation>.csv` with a
/// `<relation>.schema.json` sidecar, `<path>.jsonl` for files, and (when
/// there is provenance) `prov.json` next to the data directory.
void write_commit_data(const CommitRequest& commit, const std::filesystem::path& data_dir,
                       const std::filesystem::path& prov_file);

}  // namespace vquel::testing
