#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "geosid/cli.hpp"
#include "geosid/data_io.hpp"

using namespace geosid;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "geosid");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("geosid_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("synth, train, report, assign") {
    const auto dir = scratch("smoke");
    const auto corpus = (dir / "corpus").string();
    const auto cb = (dir / "cb.bin").string();
    REQUIRE(cli({"synth", "--seed", "7", "--out", corpus}).code == 0);
    const auto train = cli({"train", "--corpus", corpus, "--k", "8,8,8", "--variant", "pro_geo", "--alpha", "0.5",
                            "--beta", "0.5", "--seed", "7", "--out", cb});
    REQUIRE(train.code == 0);
    CHECK(fs::exists(cb));
    CHECK(train.out.find("Avg. Dist.") != std::string::npos);
    CHECK(train.err.find("trained") != std::string::npos);

    const auto stored = cli({"report", "--codebook", cb});
    const auto reassigned = cli({"report", "--codebook", cb, "--corpus", corpus});
    REQUIRE(stored.code == 0);
    CHECK(stored.out == reassigned.out);
    for (const char* col : {"CUR", "ICR", "Avg. Dist.", "p90 Dist.", "p95 Dist."}) {
        CHECK(stored.out.find(col) != std::string::npos);
    }

    const auto rec = cli({"report", "--codebook", cb, "--format", "records"});
    const auto j = nlohmann::json::parse(rec.out);
    CHECK(j["poi_count"] == 400);

    const auto assigned = cli({"assign", "--codebook", cb, "--corpus", corpus, "--format", "records", "--layer4"});
    REQUIRE(assigned.code == 0);
    std::istringstream lines(assigned.out);
    std::string line;
    std::set<std::string> sids;
    int n = 0;
    while (std::getline(lines, line)) {
        const auto a = nlohmann::json::parse(line);
        CHECK(a.contains("j4"));
        sids.insert(a["sid"].get<std::string>());
        ++n;
    }
    CHECK(n == 400);
    CHECK(sids.size() == 400);

    const auto geo = (dir / "out.geojson").string();
    REQUIRE(cli({"export-geojson", "--codebook", cb, "--out", geo}).code == 0);
    const auto bytes = read_file(geo);
    CHECK(nlohmann::json::parse(bytes.begin(), bytes.end())["features"].size() == 400);
}

TEST_CASE("identical invocations give identical bytes") {
    const auto dir = scratch("determinism");
    const auto corpus = (dir / "c").string();
    REQUIRE(cli({"synth", "--seed", "3", "--out", corpus}).code == 0);
    std::vector<std::string> outs;
    for (int i = 0; i < 2; ++i) {
        const auto cb = (dir / ("cb" + std::to_string(i) + ".bin")).string();
        const auto r = cli({"train", "--corpus", corpus, "--k", "4,4,8", "--seed", "3", "--out", cb});
        REQUIRE(r.code == 0);
        outs.push_back(r.out);
    }
    CHECK(outs[0] == outs[1]);
    CHECK(read_file(dir / "cb0.bin") == read_file(dir / "cb1.bin"));
    const auto serial = cli({"--serial", "train", "--corpus", corpus, "--k", "4,4,8", "--seed", "3", "--out",
                             (dir / "cbs.bin").string()});
    CHECK(serial.out == outs[0]);
    CHECK(read_file(dir / "cbs.bin") == read_file(dir / "cb0.bin"));
}

TEST_CASE("compare and sweep") {
    const auto dir = scratch("compare");
    const auto corpus = (dir / "c").string();
    REQUIRE(cli({"synth", "--seed", "2", "--clusters", "2", "--per-cluster", "30", "--out", corpus}).code == 0);
    const auto cmp = cli({"compare", "--corpus", corpus, "--k", "2,2,4", "--format", "records"});
    REQUIRE(cmp.code == 0);
    CHECK(std::count(cmp.out.begin(), cmp.out.end(), '\n') == 5);
    const auto attrs = cli({"compare", "--corpus", corpus, "--k", "2,2,4", "--attribute-rows"});
    REQUIRE(attrs.code == 0);
    CHECK(attrs.out.find("w/ R(s+,d+)") != std::string::npos);
    CHECK(cli({"compare", "--corpus", corpus, "--variants", "pro_geo"}).code == 1);
    const auto sw = cli({"sweep", "--corpus", corpus, "--k", "2,2,4", "--format", "records"});
    REQUIRE(sw.code == 0);
    CHECK(std::count(sw.out.begin(), sw.out.end(), '\n') == 8);
    const auto two = cli({"sweep", "--corpus", corpus, "--k", "2,2,4", "--grid", "0:0,1:0.25", "--format", "records"});
    CHECK(std::count(two.out.begin(), two.out.end(), '\n') == 2);
    CHECK(cli({"sweep", "--corpus", corpus, "--grid", "0-0"}).code == 1);
}

TEST_CASE("verify-lemma") {
    const auto r = cli({"verify-lemma", "--trials", "1000", "--dim", "128", "--seed", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("max_rel_error") != std::string::npos);
    CHECK(r.out.find("max_abs_error") != std::string::npos);
    CHECK(cli({"verify-lemma", "--dim", "7"}).code == 1);
}

TEST_CASE("exit codes and streams") {
    const auto help = cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("verify-lemma") != std::string::npos);
    const auto sub_help = cli({"train", "--help"});
    CHECK(sub_help.code == 0);
    for (const char* flag : {"--corpus", "--k", "--variant", "--alpha", "--beta", "--attrs", "--rope-layer",
                             "--coord-frame", "--d-scale-km", "--max-iters", "--tol", "--seed", "--out", "--format"}) {
        CHECK(sub_help.out.find(flag) != std::string::npos);
    }
    const auto unknown = cli({"synth", "--out", "x", "--bogus", "1"});
    CHECK(unknown.code == 1);
    CHECK(unknown.out.empty());
    CHECK(unknown.err.find("Usage") != std::string::npos);
    CHECK(cli({}).code == 1);
    CHECK(cli({"train", "--corpus", "/nonexistent/geosid", "--out", "/tmp/x.bin"}).code == 2);
    CHECK(cli({"report", "--codebook", "/nonexistent/cb.bin"}).code == 2);
    const auto bad_k = cli({"train", "--corpus", "/nonexistent", "--out", "/tmp/x.bin", "--k", "4,x,4"});
    CHECK(bad_k.code == 1);
    CHECK(bad_k.err.find("--k") != std::string::npos);
    CHECK(cli({"train", "--corpus", "/nonexistent", "--out", "/tmp/x.bin", "--variant", "opq"}).code == 1);
}
