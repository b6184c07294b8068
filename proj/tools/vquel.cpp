// vquel: repository lifecycle, ingestion and queries from the shell.
//
// Exit codes: 0 success, 1 repository, IO or usage error, 2 query error.

#include <unistd.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vquel/error.hpp"
#include "vquel/format.hpp"
#include "vquel/ingest.hpp"
#include "vquel/session.hpp"
#include "vquel/store.hpp"

namespace {

using namespace vquel;

constexpr int kOk = 0;
constexpr int kRepoError = 1;
constexpr int kQueryError = 2;

struct Options {
    std::string repo = ".";
    std::string init_path;
    std::string query;
    std::string file;
    std::string format = "table";
    std::vector<std::string> parents;
    std::string author;
    std::string message;
    std::string data;
    std::string prov;
    std::string ts;
    std::string id;
    std::string container;
};

OutputFormat output_format(const Options& o) {
    // CLI11 already restricted the value.
    return *parse_output_format(o.format);
}

void print_warnings(const std::vector<Diagnostic>& warnings) {
    for (const auto& w : warnings) std::cerr << w.to_string() << '\n';
}

int cmd_init(const Options& o) {
    std::string path = o.init_path.empty() ? o.repo : o.init_path;
    VersionStore::init(path);
    return kOk;
}

int cmd_commit(const Options& o) {
    VersionStore store = VersionStore::open(o.repo);
    CommitRequest req;
    req.id = o.id;
    req.parents = o.parents;
    req.author = parse_author(o.author);
    req.message = o.message;
    if (o.ts.empty()) {
        auto now = std::chrono::time_point_cast<std::chrono::microseconds>(std::chrono::system_clock::now());
        req.creation_ts = Timestamp{now.time_since_epoch().count()};
    } else {
        auto ts = parse_timestamp(o.ts);
        if (!ts) throw RepositoryError("--ts: not a timestamp: " + o.ts);
        req.creation_ts = *ts;
    }
    req.containers = ingest_directory(o.data);
    if (!o.prov.empty()) req.provenance = ingest_provenance(o.prov);
    std::cout << store.commit(std::move(req)) << '\n';
    return kOk;
}

int cmd_log(const Options& o) {
    VersionStore store = VersionStore::open(o.repo);
    if (!o.container.empty()) {
        bool known = false;
        for (const auto& v : store.versions()) {
            for (const auto& c : v.containers) known = known || c.name == o.container;
        }
        if (!known) std::cerr << "warning: no version holds a container named '" << o.container << "'\n";
    }
    ResultSet rs;
    rs.columns = {"id", "author", "creation_ts", "commit_msg"};
    auto entries = o.container.empty() ? store.log() : store.log(std::string_view(o.container));
    for (const VersionInfo* v : entries) {
        rs.rows.push_back({Value(v->id), Value(v->author.name), Value(v->creation_ts), Value(v->commit_msg)});
    }
    std::cout << format_results({rs}, output_format(o));
    return kOk;
}

std::string read_source(const Options& o) {
    if (o.file.empty()) return o.query;
    if (o.file == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(o.file, std::ios::binary);
    if (!in) throw RepositoryError("cannot read query file " + o.file);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int cmd_query(const Options& o) {
    std::string source = read_source(o);
    Repository repo = VersionStore::open(o.repo).load();
    std::vector<Diagnostic> warnings;
    auto results = Engine(repo).run(source, &warnings);
    print_warnings(warnings);
    std::cout << format_results(results, output_format(o));
    return kOk;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

int cmd_repl(const Options& o) {
    Repository repo = VersionStore::open(o.repo).load();
    Session session(repo);
    StatementBuffer buffer;
    OutputFormat format = output_format(o);
    bool tty = isatty(STDIN_FILENO) != 0;

    auto run = [&](const std::string& chunk) {
        if (trim(chunk).empty()) return;
        try {
            std::vector<Diagnostic> warnings;
            auto results = session.submit(chunk, &warnings);
            print_warnings(warnings);
            std::cout << format_results(results, format) << std::flush;
        } catch (const QueryError& e) {
            std::cerr << "error: " << e.what() << '\n';
        }
    };

    std::string line;
    for (;;) {
        if (tty) std::cout << (buffer.blank() ? "vquel> " : "  ...> ") << std::flush;
        if (!std::getline(std::cin, line)) break;
        std::string cmd = trim(line);
        if (buffer.blank() && cmd.starts_with('\\')) {
            if (cmd == "\\q") return kOk;
            if (cmd == "\\reset") {
                session.reset();
                buffer.clear();
            } else {
                std::cerr << "error: unknown command " << cmd << " (\\reset, \\q)\n";
            }
            continue;
        }
        buffer.append(line);
        buffer.append("\n");
        while (auto chunk = buffer.next()) run(*chunk);
    }
    if (!buffer.blank()) {
        std::cerr << "warning: running unterminated input at end of stream\n";
        buffer.append(";");
        while (auto chunk = buffer.next()) run(*chunk);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Versioned dataset repository with VQuel queries"};
    app.require_subcommand(1);
    Options o;

    auto add_repo = [&](CLI::App* sub) { sub->add_option("-r,--repo", o.repo, "Repository directory")->capture_default_str(); };
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}))->capture_default_str();
    };

    auto* init = app.add_subcommand("init", "Create an empty repository");
    init->add_option("path", o.init_path, "Repository directory (default: --repo)");
    add_repo(init);

    auto* commit = app.add_subcommand("commit", "Commit a data directory as a new version");
    add_repo(commit);
    commit->add_option("--data", o.data, "Directory of <name>.csv + <name>.schema.json and <path>.jsonl files")->required();
    commit->add_option("--parents", o.parents, "Parent version ids")->delimiter(',');
    commit->add_option("--author", o.author, "Author as 'Name <email>'")->required();
    commit->add_option("--message", o.message, "Commit message");
    commit->add_option("--prov", o.prov, "JSON array of [child ref, parent ref]; child version '@' is the new version");
    commit->add_option("--ts", o.ts, "Creation timestamp, RFC 3339 (default: now)");
    commit->add_option("--id", o.id, "Version id (default: generated)");

    auto* query = app.add_subcommand("query", "Run a VQuel program");
    add_repo(query);
    auto* q = query->add_option("-q,--query", o.query, "Program text");
    auto* f = query->add_option("-f,--file", o.file, "Program file, '-' for stdin");
    q->excludes(f);
    add_format(query);

    auto* repl = app.add_subcommand("repl", "Interactive session; statements end with ';'");
    add_repo(repl);
    add_format(repl);

    auto* log = app.add_subcommand("log", "List versions newest first");
    add_repo(log);
    log->add_option("container", o.container, "Only versions where this container changed");
    add_format(log);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kRepoError;
    }

    try {
        if (*init) return cmd_init(o);
        if (*commit) return cmd_commit(o);
        if (*query) {
            if (q->count() == 0 && f->count() == 0) {
                std::cerr << "error: query needs -q or -f\n";
                return kRepoError;
            }
            return cmd_query(o);
        }
        if (*repl) return cmd_repl(o);
        if (*log) return cmd_log(o);
    } catch (const QueryError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kQueryError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRepoError;
    }
    return kRepoError;
}
