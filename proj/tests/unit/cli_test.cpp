#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <unistd.h>

#include "cli_runner.hpp"
#include "fixtures.hpp"
#include "golden.hpp"
#include "queries.hpp"
#include "vquel/format.hpp"

using namespace vquel;
using namespace vquel::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kCli = VQUEL_CLI_PATH;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        static int n = 0;
        root_ = fs::temp_directory_path() / ("vquel-cli-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    fs::path figure1_repo() {
        fs::path repo = root_ / "repo";
        CliResult r = replay_fixture(kCli, figure1(), repo, root_ / "work");
        EXPECT_EQ(r.exit_code, 0) << r.err;
        return repo;
    }

    CliResult run(const std::vector<std::string>& args, const std::string& input = {}) { return run_cli(kCli, args, input); }

    fs::path root_;
};

constexpr const char* kQuery1 = "range of V is Version\nretrieve V.author.name\nwhere V.id = \"v01\"\n";

}  // namespace

TEST_F(CliTest, InitThenEmptyLog) {
    EXPECT_EQ(run({"init", (root_ / "r").string()}).exit_code, 0);
    CliResult log = run({"log", "-r", (root_ / "r").string(), "--format", "json"});
    EXPECT_EQ(log.exit_code, 0);
    EXPECT_EQ(log.out, "{\"columns\":[\"id\",\"author\",\"creation_ts\",\"commit_msg\"],\"rows\":[]}\n");
}

TEST_F(CliTest, InitOnNonEmptyDirectoryFails) {
    std::ofstream(root_ / "x") << "x";
    CliResult r = run({"init", root_.string()});
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_TRUE(r.out.empty());
    EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, CommitPrintsIdAndLogShowsIt) {
    fs::path repo = root_ / "r";
    run({"init", repo.string()});
    write_commit_data(figure1().commits[0], root_ / "d", root_ / "p.json");
    CliResult c = run({"commit", "-r", repo.string(), "--author", "Alice <a@x>", "--message", "m", "--ts", "2015-01-01", "--data",
                       (root_ / "d").string()});
    ASSERT_EQ(c.exit_code, 0) << c.err;
    ASSERT_FALSE(c.out.empty());
    EXPECT_EQ(c.out.find('\n'), c.out.size() - 1);  // one line
    std::string id = c.out.substr(0, c.out.size() - 1);
    CliResult log = run({"log", "-r", repo.string(), "--format", "csv"});
    TextTable t = decode_csv(log.out);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0][0], id);
    EXPECT_EQ(t.rows[0][1], "Alice");
}

TEST_F(CliTest, CommitErrorsExitOne) {
    fs::path repo = root_ / "r";
    run({"init", repo.string()});
    write_commit_data(figure1().commits[0], root_ / "d", root_ / "p.json");
    EXPECT_EQ(run({"commit", "-r", repo.string(), "--author", "A", "--parents", "v9", "--data", (root_ / "d").string()}).exit_code, 1);
    EXPECT_EQ(run({"commit", "-r", repo.string(), "--author", "A", "--data", (root_ / "missing").string()}).exit_code, 1);
    EXPECT_EQ(run({"commit", "-r", repo.string(), "--author", "A", "--ts", "someday", "--data", (root_ / "d").string()}).exit_code, 1);
    EXPECT_EQ(run({"commit", "-r", repo.string(), "--data", (root_ / "d").string()}).exit_code, 1);  // no author
}

TEST_F(CliTest, LogForOneContainerIsNewestFirst) {
    fs::path repo = figure1_repo();
    CliResult log = run({"log", "-r", repo.string(), "Employee"});
    ASSERT_EQ(log.exit_code, 0);
    EXPECT_LT(log.out.find("v02"), log.out.find("v01"));
}

TEST_F(CliTest, QueryOneAsTable) {
    fs::path repo = figure1_repo();
    CliResult r = run({"query", "-r", repo.string(), "-q", kQuery1});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(r.out, "V.author.name\n-------------\nAlice\n(1 row)\n");
    EXPECT_TRUE(r.err.empty());
}

TEST_F(CliTest, QueryFromFileAndStdin) {
    fs::path repo = figure1_repo();
    std::ofstream(root_ / "q.vq") << kQuery1;
    CliResult f = run({"query", "-r", repo.string(), "-f", (root_ / "q.vq").string(), "--format", "csv"});
    CliResult in = run({"query", "-r", repo.string(), "-f", "-", "--format", "csv"}, kQuery1);
    EXPECT_EQ(f.exit_code, 0);
    EXPECT_EQ(f.out, "\"V.author.name\"\r\n\"Alice\"\r\n");
    EXPECT_EQ(in.out, f.out);
}

TEST_F(CliTest, JsonAndCsvAgreeOnEveryExample) {
    fs::path repo = figure1_repo();
    for (const auto& q : example_queries()) {
        if (q.fixture != "figure1") continue;
        CliResult csv = run({"query", "-r", repo.string(), "--format", "csv", "-q", q.text});
        CliResult json = run({"query", "-r", repo.string(), "--format", "json", "-q", q.text});
        ASSERT_EQ(csv.exit_code, 0) << q.name << csv.err;
        EXPECT_EQ(decode_csv(csv.out), decode_json(json.out)) << q.name;
        EXPECT_EQ(decode_json(json.out), to_text_table(read_golden(golden_path(VQUEL_GOLDEN_DIR, q.name)).back())) << q.name;
    }
}

TEST_F(CliTest, QueryErrorsExitTwoWithPosition) {
    fs::path repo = figure1_repo();
    CliResult syntax = run({"query", "-r", repo.string(), "-q", "range of V is Version\nretrieve (V.id"});
    EXPECT_EQ(syntax.exit_code, 2);
    EXPECT_NE(syntax.err.find("2:15:"), std::string::npos) << syntax.err;
    EXPECT_TRUE(syntax.out.empty());
    CliResult semantic = run({"query", "-r", repo.string(), "-q", "range of V is Version\nretrieve V.nope"});
    EXPECT_EQ(semantic.exit_code, 2);
    EXPECT_NE(semantic.err.find("2:"), std::string::npos);
    CliResult runtime = run({"query", "-r", repo.string(), "-q", "range of V is Version\nretrieve V.id where V.creation_ts < 1"});
    EXPECT_EQ(runtime.exit_code, 2);
    EXPECT_NE(runtime.err.find("cannot order timestamp against int"), std::string::npos);
}

TEST_F(CliTest, WarningsGoToStderr) {
    fs::path repo = figure1_repo();
    CliResult r = run({"query", "-r", repo.string(), "--format", "csv", "-q", "range of V is Version\nretrieve V.id sort by V.creation_ts"});
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out, "\"V.id\"\r\n\"v01\"\r\n\"v02\"\r\n");
    EXPECT_NE(r.err.find("warning:"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}).exit_code, 1);
    EXPECT_EQ(run({"frobnicate"}).exit_code, 1);
    EXPECT_EQ(run({"query", "-r", root_.string()}).exit_code, 1);
    EXPECT_EQ(run({"query", "-r", root_.string(), "-q", "x", "--format", "xml"}).exit_code, 1);
    EXPECT_EQ(run({"--help"}).exit_code, 0);
}

TEST_F(CliTest, ReplRunsQueryThreeAndSurvivesErrors) {
    fs::path repo = figure1_repo();
    CliResult r = run({"repl", "-r", repo.string(), "--format", "csv"},
                      "range of V is Version\nrange of R is V.Relations\nretrieve V.commit_ts\nwhere R.name = \"Employee\"\n;\n"
                      "retrieve V.oops;\n"
                      "retrieve V.id where V.id = \"v02\";\n"
                      "\\reset\n"
                      "retrieve V.id;\n"
                      "\\q\n"
                      "retrieve V.id;\n");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out,
              "\"V.commit_ts\"\r\n2014-12-15T10:00:00Z\r\n2015-03-02T09:30:00Z\r\n"
              "\"V.id\"\r\n\"v02\"\r\n");
    EXPECT_NE(r.err.find("oops"), std::string::npos);
    EXPECT_NE(r.err.find("undeclared iterator 'V'"), std::string::npos);
}

TEST_F(CliTest, ReplQuitsImmediately) {
    fs::path repo = figure1_repo();
    CliResult r = run({"repl", "-r", repo.string()}, "\\q\n");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, QueriesDoNotTouchTheRepository) {
    fs::path repo = figure1_repo();
    auto listing = [&] {
        std::vector<std::pair<std::string, std::uintmax_t>> out;
        for (const auto& e : fs::recursive_directory_iterator(repo)) {
            if (e.is_regular_file()) out.emplace_back(e.path().string(), e.file_size());
        }
        std::ranges::sort(out);
        return out;
    };
    auto before = listing();
    run({"query", "-r", repo.string(), "-q", kQuery1});
    run({"log", "-r", repo.string()});
    run({"repl", "-r", repo.string()}, "range of V is Version;\nretrieve V.id;\n");
    EXPECT_EQ(listing(), before);
}
