#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tfa/cli.hpp"
#include "tfa/formats.hpp"

using namespace tfa;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tfa_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("cli: permutation check passes") {
    const Result r = call({"invariance", "perm", "--seed", "7", "--d-model", "16", "--layers", "2", "--len", "8"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.rfind("scenario,block,deviation,tolerance,pass\n", 0) == 0);
}

TEST_CASE("cli: reset automaton sequence from a file") {
    const fs::path dir = scratch("fsa");
    fs::create_directories(dir);
    std::ofstream(dir / "reset2.fsa") << "states: A B\nalphabet: 0 1\n0: A A\n1: B B\n";
    const Result r = call({"fsa", "seq", "--fsa", (dir / "reset2.fsa").string(), "--q0", "A", "--word", "0110"});
    CHECK(r.code == 0);
    CHECK(r.out == "A B B A\n");
    CHECK(call({"fsa", "scan", "--fsa", (dir / "reset2.fsa").string(), "--word", "0110"}).out == "A B B A\n");
}

TEST_CASE("cli: zero-score masking reports deviations and still exits 0") {
    const Result r = call({"invariance", "substring", "--mask", "zeropre", "--len", "6", "--seed", "3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("substring/zeropre") != std::string::npos);
}

TEST_CASE("cli: a failed invariant exits 1") {
    const Result r = call({"invariance", "substring", "--mask", "postzero", "--len", "6", "--seed", "3"});
    CHECK(r.code == cli::kExitCheckFailed);
    const Result c = call({"cover", "check", "--fsa", "builtin:flip_flop", "--cover-fsa", "builtin:flip_flop"});
    CHECK(c.code == cli::kExitUsage);  // no cover lines
}

TEST_CASE("cli: usage and input errors exit 2") {
    CHECK(call({}).code == cli::kExitUsage);
    CHECK(call({"invariance"}).code == cli::kExitUsage);
    CHECK(call({"invariance", "perm", "--bogus"}).code == cli::kExitUsage);
    CHECK(call({"invariance", "perm", "--mask", "causal"}).code == cli::kExitUsage);
    CHECK(call({"invariance", "perm", "--mask", "neginf"}).code == cli::kExitUsage);
    CHECK(call({"fsa", "run", "--fsa", "/nonexistent.fsa", "--word", "0"}).code == cli::kExitUsage);
    const fs::path dir = scratch("badfsa");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.fsa") << "states: A B\nalphabet: 0\n0: A Z\n";
    const Result r = call({"fsa", "run", "--fsa", (dir / "bad.fsa").string(), "--word", "0"});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("cli: help exits 0 and describes the property") {
    const Result r = call({"invariance", "prefix-perm", "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("last row") != std::string::npos);
    CHECK(call({"--version"}).code == 0);
}

TEST_CASE("cli: --out writes CSV plus a manifest, byte-identical on rerun") {
    const fs::path a = scratch("out_a"), b = scratch("out_b");
    const std::vector<std::string> base{"invariance", "curve", "--seeds", "3", "--lengths", "4,8", "--seed", "5"};
    auto with_out = [&](const fs::path& p) {
        auto args = base;
        args.push_back("--out");
        args.push_back(p.string());
        return args;
    };
    REQUIRE(call(with_out(a)).code == 0);
    REQUIRE(call(with_out(b)).code == 0);
    CHECK(read_text_file((a / "curve.csv").string()) == read_text_file((b / "curve.csv").string()));
    const std::string manifest = read_text_file((a / "manifest.txt").string());
    CHECK(manifest.find("subcommand=invariance curve\n") != std::string::npos);
    CHECK(manifest.find("seed=5\n") != std::string::npos);
    CHECK(manifest.find("outputs=curve.csv\n") != std::string::npos);
    CHECK(manifest.find("version=") != std::string::npos);
}

TEST_CASE("cli: catalog files feed back into cover check") {
    const fs::path dir = scratch("catalog");
    REQUIRE(call({"catalog", "list", "--out", dir.string()}).code == 0);
    const Result ok = call({"cover", "check", "--fsa", (dir / "mixed_target.fsa").string(), "--cascade",
                            (dir / "mixed_witness.cascade").string()});
    CHECK(ok.code == 0);
    const Result bad = call({"cover", "check", "--fsa", (dir / "flip_flop.fsa").string(), "--cover-fsa",
                             (dir / "flip_flop_swap.fsa").string()});
    CHECK(bad.code == cli::kExitCheckFailed);
    CHECK(bad.out.find("\"fails at symbol") != std::string::npos);
}

TEST_CASE("cli: bridge compare and build") {
    const Result r = call({"bridge", "compare", "--exhaustive", "4", "--words", "50"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("word,match,first_mismatch_pos\n", 0) == 0);
    const Result low = call({"bridge", "compare", "--beta", "1", "--words", "200"});
    CHECK(low.code == cli::kExitCheckFailed);
    const fs::path dir = scratch("bridge");
    REQUIRE(call({"bridge", "build", "--out", dir.string()}).code == 0);
    CHECK(call({"bridge", "compare", "--model", (dir / "bridge_model.tfaw").string(), "--words", "50"}).code == 0);
    CHECK(call({"bridge", "build", "--resets", "0=C"}).code == cli::kExitUsage);
}

TEST_CASE("cli: semigroup and classify") {
    const Result s = call({"fsa", "semigroup", "--fsa", "builtin:counter5"});
    CHECK(s.code == 0);
    CHECK(s.out.rfind("size=5\ngroup=1\n", 0) == 0);
    const Result c = call({"fsa", "classify", "--fsa", "builtin:mixed_target"});
    CHECK(c.out.find("a,mixed") != std::string::npos);
    CHECK(call({"fsa", "semigroup", "--fsa", "builtin:flip_flop", "--max-size", "3"}).code == 0);
}

TEST_CASE("cli: cascade run prints joint states") {
    const Result r = call({"cascade", "run", "--cascade", "builtin:delay_line", "--word", "1 0 0", "--q0", "(A,A)"});
    CHECK(r.code == 0);
    CHECK(r.out == "(B,A) (A,B) (A,A)\n");
}
