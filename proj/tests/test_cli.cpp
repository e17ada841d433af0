#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "selchain/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result call(std::vector<std::string> args)
{
    std::vector<const char*> argv = {"selchain"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = selchain::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        static std::atomic<int> n{0};
        path = fs::temp_directory_path() / ("selchain-c-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST(Cli, MatstatsAlternatingFour)
{
    const auto r = call({"matstats", "--alt", "--n", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("P(0) = 28/64"), std::string::npos);
    EXPECT_NE(r.out.find("P(2) = 35/64"), std::string::npos);
    EXPECT_NE(r.out.find("P(4) = 1/64"), std::string::npos);
    EXPECT_TRUE(r.err.empty());
}

TEST(Cli, MatstatsGeneralCsv)
{
    const auto r = call({"matstats", "--n", "3", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out), (std::vector<std::string>{"j,probability,count,total", "0,21/64,168,512", "1,147/256,294,512",
                                                      "2,49/512,49,512", "3,1/512,1,512"}));
}

TEST(Cli, ChainAbsorptionFromLimit)
{
    const auto r = call({"chain", "--alt", "--absorption", "--start", "limit"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out).at(0), "{0: 0.5, 1: 0.5}");
    const auto j = call({"--format", "json", "chain", "--alt", "--absorption", "--start", "limit"});
    const auto parsed = nlohmann::json::parse(j.out);
    EXPECT_NEAR(parsed["absorbed"]["0"].get<double>(), 0.5, 1e-9);
    EXPECT_NEAR(parsed["absorbed"]["1"].get<double>(), 0.5, 1e-9);
    EXPECT_LT(parsed["escaping"].get<double>(), 1e-12);
}

TEST(Cli, ChainTransitionAndSample)
{
    const auto t = call({"chain", "--u", "0", "--from", "1", "--to", "0"});
    EXPECT_EQ(t.out, "P(0 | 1) = 1/2\n");
    const auto a = call({"chain", "--alt", "--sample", "5", "--start", "3:1", "--seed", "4", "--format", "json"});
    const auto b = call({"chain", "--alt", "--sample", "5", "--start", "3:1", "--seed", "4", "--format", "json"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(call({"chain", "--alt", "--sample", "5"}).code, 2);
    EXPECT_EQ(call({"chain", "--alt", "--absorption", "--start", "x"}).code, 2);
}

TEST(Cli, GridExampleAllSubsets)
{
    const auto r = call({"grid", "--example", "2x2", "--all-subsets"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 16u);
    for (const auto& l : ls) {
        const auto points = static_cast<std::size_t>(std::count(l.begin(), l.end(), '('));
        const bool closed = l.find("not closed") == std::string::npos;
        EXPECT_EQ(closed, points != 3) << l;
    }
    const auto csv = call({"grid", "--example", "2x2", "--all-subsets", "--format", "csv"});
    EXPECT_EQ(lines(csv.out).size(), 17u);
}

TEST(Cli, GridOtherModes)
{
    const auto c = call({"grid", "--example", "2x2", "--closure", "{(a0,b0),(a0,b1),(a1,b0)}", "--format", "json"});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_FALSE(nlohmann::json::parse(c.out)["closed"].get<bool>());
    const auto b = call({"grid", "--example", "2x3", "--basis", "--format", "json"});
    const auto j = nlohmann::json::parse(b.out);
    EXPECT_LE(j["size"].get<std::size_t>(), j["bound"].get<std::size_t>());
    TempDir dir;
    std::ofstream(dir.path / "g.txt") << "# two factors\np q\nx y z\n";
    const auto f = call({"grid", "--file", (dir.path / "g.txt").string(), "--basis"});
    EXPECT_EQ(f.code, 0) << f.err;
    EXPECT_EQ(call({"grid", "--example", "2x2"}).code, 2);
    EXPECT_EQ(call({"grid", "--example", "2x2", "--closure", "{(zz,b0)}"}).code, 2);
}

TEST(Cli, SelmerAndClassgroup)
{
    const auto s = call({"selmer", "--d", "34", "--format", "csv"});
    ASSERT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(lines(s.out).at(1), "34,4,2,2");
    const auto c = call({"classgroup", "--d", "14", "--format", "json"});
    const auto j = nlohmann::json::parse(c.out);
    EXPECT_EQ(j["h"].get<int>(), 4);
    EXPECT_EQ(j["r4"].get<int>(), 1);
    EXPECT_EQ(call({"selmer", "--d", "12"}).code, 2);
    EXPECT_EQ(call({"classgroup", "--d", "-5"}).code, 2);
}

TEST(Cli, ExitCodesAndStreams)
{
    EXPECT_EQ(call({}).code, 2);
    EXPECT_EQ(call({"nonsense"}).code, 2);
    EXPECT_EQ(call({"matstats", "--bogus"}).code, 2);
    EXPECT_EQ(call({"matstats"}).code, 2);
    EXPECT_EQ(call({"matstats", "--n", "2", "--ell", "4"}).code, 2);
    const auto h = call({"--help"});
    EXPECT_EQ(h.code, 0);
    EXPECT_NE(h.out.find("matstats"), std::string::npos);

    TempDir dir;
    const auto gated = call({"--cache", dir.path.string(), "selmer", "--d", "5", "--method", "monsky"});
    EXPECT_EQ(gated.code, 1);
    EXPECT_TRUE(gated.out.empty());
    EXPECT_NE(gated.err.find("gate"), std::string::npos);
    EXPECT_EQ(call({"--cache", dir.path.string(), "sweep", "--kind", "selmer", "--H", "1000"}).code, 1);
}

TEST(Cli, ValidateThenFastPaths)
{
    TempDir dir;
    const auto v = call({"--cache", dir.path.string(), "--format", "csv", "validate"});
    ASSERT_EQ(v.code, 0) << v.err;
    EXPECT_EQ(lines(v.out).size(), 4u);
    EXPECT_TRUE(fs::exists(dir.path / "validation.json"));
    EXPECT_EQ(call({"--cache", dir.path.string(), "selmer", "--d", "5", "--method", "monsky"}).code, 0);
    EXPECT_EQ(call({"--cache", dir.path.string(), "classgroup", "--d", "5", "--redei"}).code, 0);

    const std::vector<std::string> sweep = {"--cache", dir.path.string(), "--format", "json", "--no-timing", "sweep", "--kind", "class", "--H", "2000"};
    const auto a = call(sweep), b = call(sweep);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    const auto rep = nlohmann::json::parse(a.out);
    for (const char* key : {"kind", "H", "count", "observed", "predicted", "tv_distance", "threshold", "pass", "seed", "runtime_seconds"})
        EXPECT_TRUE(rep.contains(key)) << key;
    EXPECT_TRUE(fs::exists(dir.path / "class.csv"));

    auto strict = sweep;
    strict.push_back("--strict");
    strict.push_back("--threshold");
    strict.push_back("0");
    EXPECT_EQ(call(strict).code, 1);

    const auto bat = call({"--cache", dir.path.string(), "sweep", "--kind", "monsky-invariance", "--pairs", "15", "--format", "json"});
    ASSERT_EQ(bat.code, 0) << bat.err;
    EXPECT_TRUE(nlohmann::json::parse(bat.out)["pass"].get<bool>());
}

TEST(Cli, ConfigFile)
{
    TempDir dir;
    const auto ini = dir.path / "run.ini";
    std::ofstream(ini) << "format = csv\n[matstats]\nn = 2\n";
    const auto r = call({"--config", ini.string(), "matstats"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out).at(1), "0,3/8,6,16");
    const auto over = call({"--config", ini.string(), "matstats", "--n", "1"});
    EXPECT_EQ(lines(over.out).size(), 3u);

    std::ofstream(dir.path / "bad.ini") << "[matstats]\nsize = 2\n";
    EXPECT_EQ(call({"--config", (dir.path / "bad.ini").string(), "matstats"}).code, 2);
    EXPECT_EQ(call({"--config", (dir.path / "missing.ini").string(), "matstats"}).code, 2);
}

TEST(Cli, Jutila)
{
    const auto r = call({"jutila", "--sizes", "50x50,200x200", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out).size(), 3u);
    const auto j = call({"jutila", "--coeffs", "random", "--seed", "3", "--format", "json"});
    EXPECT_TRUE(nlohmann::json::parse(j.out)["decreasing"].get<bool>());
    EXPECT_EQ(call({"jutila", "--sizes", "100"}).code, 2);
}
