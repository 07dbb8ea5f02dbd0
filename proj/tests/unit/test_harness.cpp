#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "roughn/bump.hpp"
#include "roughn/harness.hpp"
#include "roughn/sieve.hpp"

using namespace roughn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("roughn_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const fs::path& p, const std::string& s) {
    std::ofstream(p, std::ios::binary) << s;
}

const char* kToy = "x = 1e6\nK = 3\nw = 3\na = 1\nc = 0.22\ngamma = 1\nk_max = 40\n";

run_config make(const std::string& sub, const fs::path& params, const fs::path& out) {
    run_config c;
    c.subcommand = sub;
    c.params_path = params.string();
    c.out_dir = out.string();
    c.seed = 7;
    return c;
}

/// Interrupts every `step` units until completion; returns the number of stops.
int interrupted_run(run_config cfg, std::uint64_t step) {
    cfg.max_units = step;
    int stops = 0;
    for (;;) {
        const auto r = run(cfg);
        if (r.exit_code == 0) return stops;
        REQUIRE(r.exit_code == 3);
        REQUIRE(r.partial);
        ++stops;
        cfg.resume_path = r.checkpoint_path;
        REQUIRE(stops < 100);
    }
}

void same_files(const fs::path& a, const fs::path& b) {
    std::vector<std::string> names_a, names_b;
    for (const auto& e : fs::directory_iterator(a)) names_a.push_back(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(b)) names_b.push_back(e.path().filename().string());
    std::sort(names_a.begin(), names_a.end());
    std::sort(names_b.begin(), names_b.end());
    CHECK(names_a == names_b);
    for (const auto& n : names_a) {
        INFO(n);
        CHECK(slurp(a / n) == slurp(b / n));
    }
}

} // namespace

TEST_CASE("checkpoint file roundtrip and corruption") {
    const auto dir = scratch("ckpt");
    checkpoint c{"record-search", 0x1234567890abcdefull, 42, std::string("\0\1\2payload", 10)};
    const auto path = (dir / "c.rlck").string();
    write_checkpoint(path, c);
    const auto back = read_checkpoint(path);
    CHECK(back.subcommand == c.subcommand);
    CHECK(back.fingerprint == c.fingerprint);
    CHECK(back.cursor == 42);
    CHECK(back.blob == c.blob);
    CHECK(slurp(path).substr(0, 5) == "RLCK1");

    std::string bytes = slurp(path);
    put(dir / "bad.rlck", "XLCK1" + bytes.substr(5));
    CHECK_THROWS_AS(read_checkpoint((dir / "bad.rlck").string()), lab_error);
    put(dir / "short.rlck", bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_checkpoint((dir / "short.rlck").string()), lab_error);
    CHECK_THROWS_AS(read_checkpoint((dir / "missing.rlck").string()), lab_error);
}

TEST_CASE("fingerprint covers subcommand, seed and parameters only") {
    run_config a;
    a.subcommand = "sieve-scan";
    a.seed = 3;
    const auto f = config_fingerprint(a, "x = 1e6\n");
    run_config b = a;
    b.workers = 8;
    b.out_dir = "elsewhere";
    CHECK(config_fingerprint(b, "x = 1e6\n") == f);
    b.seed = 4;
    CHECK(config_fingerprint(b, "x = 1e6\n") != f);
    CHECK(config_fingerprint(a, "x = 2e6\n") != f);
    b = a;
    b.subcommand = "record-search";
    CHECK(config_fingerprint(b, "x = 1e6\n") != f);
}

TEST_CASE("invalid configurations exit with 2") {
    const auto dir = scratch("invalid");
    run_config c;
    c.out_dir = (dir / "out").string();

    c.subcommand = "no-such-thing";
    auto r = run(c);
    CHECK(r.exit_code == 2);
    CHECK(r.message.find("usage") != std::string::npos);

    c.subcommand = "pik";
    c.params_path = (dir / "missing.txt").string();
    CHECK(run(c).exit_code == 2);

    put(dir / "unknown.txt", "x_list = 100\nbogus = 1\n");
    c.params_path = (dir / "unknown.txt").string();
    r = run(c);
    CHECK(r.exit_code == 2);
    CHECK(r.message.find("bogus") != std::string::npos);

    put(dir / "dup.txt", "x_list = 100\nx_list = 200\n");
    c.params_path = (dir / "dup.txt").string();
    CHECK(run(c).exit_code == 2);

    put(dir / "infeasible.txt", "x = 1e4\nw = 7\nc = 0.5\ngamma = 0\n");
    c.subcommand = "sieve-scan";
    c.params_path = (dir / "infeasible.txt").string();
    CHECK(run(c).exit_code == 2);

    c.subcommand = "pik";
    c.params_path.clear();
    c.max_units = 1;
    CHECK(run(c).exit_code == 2);  // pik does not checkpoint

    put(dir / "huge.txt", "x_list = 9e9\n");
    c.max_units = 0;
    c.params_path = (dir / "huge.txt").string();
    CHECK(run(c).exit_code == 3);
}

TEST_CASE("sieve-scan matches the weight table and resumes byte-identically") {
    const auto dir = scratch("scan");
    put(dir / "p.txt", kToy);
    const auto cfg = make("sieve-scan", dir / "p.txt", dir / "full");
    const auto r = run(cfg);
    REQUIRE(r.exit_code == 0);

    std::map<std::string, std::string> kv = parse_key_values(kToy);
    const auto p = apply_sieve_keys({}, kv);
    const auto t = weight_table::build(p, bump());
    const std::string csv = slurp(dir / "full" / "weights.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(t.count() + 1));
    const std::string json = slurp(dir / "full" / "sieve_scan.json");
    CHECK(json.find("\"partial\": false") != std::string::npos);
    std::ostringstream total;
    total << "\"support_count\": " << t.count();
    CHECK(json.find(total.str()) != std::string::npos);

    auto part = cfg;
    part.out_dir = (dir / "parts").string();
    CHECK(interrupted_run(part, 2) >= 2);
    same_files(dir / "full", dir / "parts");
}

TEST_CASE("record-search and cramer-gaps survive three interrupts") {
    const auto dir = scratch("record");
    put(dir / "p.txt", std::string(kToy) + "samples = 20000\n");
    auto cfg = make("record-search", dir / "p.txt", dir / "full");
    REQUIRE(run(cfg).exit_code == 0);
    auto part = cfg;
    part.out_dir = (dir / "parts").string();
    CHECK(interrupted_run(part, 1) >= 3);
    same_files(dir / "full", dir / "parts");

    auto threads = cfg;
    threads.workers = 3;
    threads.out_dir = (dir / "threads").string();
    REQUIRE(run(threads).exit_code == 0);
    same_files(dir / "full", dir / "threads");

    put(dir / "g.txt", "N = 20000\ntrials = 9\n");
    auto gaps = make("cramer-gaps", dir / "g.txt", dir / "gfull");
    REQUIRE(run(gaps).exit_code == 0);
    auto gparts = gaps;
    gparts.out_dir = (dir / "gparts").string();
    CHECK(interrupted_run(gparts, 2) == 4);
    same_files(dir / "gfull", dir / "gparts");
}

TEST_CASE("resume refuses a different configuration") {
    const auto dir = scratch("refuse");
    put(dir / "g.txt", "N = 20000\ntrials = 6\n");
    auto cfg = make("cramer-gaps", dir / "g.txt", dir / "out");
    cfg.max_units = 2;
    const auto r = run(cfg);
    REQUIRE(r.exit_code == 3);

    auto other = cfg;
    other.max_units = 0;
    other.resume_path = r.checkpoint_path;
    other.seed = cfg.seed + 1;
    auto rr = run(other);
    CHECK(rr.exit_code == 2);
    CHECK(rr.code == errc::fingerprint_mismatch);

    other.seed = cfg.seed;
    put(dir / "g.txt", "N = 20000\ntrials = 7\n");
    CHECK(run(other).exit_code == 2);

    put(dir / "g.txt", "N = 20000\ntrials = 6\n");
    other.subcommand = "record-search";
    CHECK(run(other).exit_code == 2);

    other.subcommand = "cramer-gaps";
    CHECK(run(other).exit_code == 0);
    CHECK_FALSE(fs::exists(r.checkpoint_path));
}

TEST_CASE("one-shot subcommands write their reports") {
    const auto dir = scratch("oneshot");
    put(dir / "w.txt", "x_list = 100000\nvariants = B-Omega,weak\neps_list = 1\nC_list = 1\n");
    auto cfg = make("window-search", dir / "w.txt", dir / "w");
    REQUIRE(run(cfg).exit_code == 0);
    const auto w = slurp(dir / "w" / "witness.csv");
    CHECK(w.rfind("x,variant,params,witness_or_none", 0) == 0);
    CHECK(std::count(w.begin(), w.end(), '\n') == 3);

    put(dir / "r.txt", "n = 1e6\nbudget = 100\n");
    cfg = make("refute-679", dir / "r.txt", dir / "r");
    REQUIRE(run(cfg).exit_code == 0);
    CHECK(fs::exists(dir / "r" / "refute_679.json"));

    put(dir / "s.txt", std::string(kToy) + "samples = 5000\ntuples = 5:1,7:2,35:1\n");
    cfg = make("sample", dir / "s.txt", dir / "s");
    REQUIRE(run(cfg).exit_code == 0);
    const auto probs = slurp(dir / "s" / "probs.csv");
    CHECK(std::count(probs.begin(), probs.end(), '\n') == 4);
}
