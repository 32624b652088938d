#include <gtest/gtest.h>

#include <sstream>

#include "corrhist/cli.hpp"
#include "support.hpp"

using namespace corrhist;
using namespace testing_support;

namespace {

struct Result {
    int status;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int status = cli::run(args, out, err);
    return {status, out.str(), err.str()};
}

class CliRun : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new std::filesystem::path(temp_dir("cli"));
        auto r = run({"generate", "--out", (*dir_ / "hist").string(), "--seed", "4", "--dense", "--quiet"});
        ASSERT_EQ(r.status, 0) << r.err;
    }
    static void TearDownTestSuite() {
        std::filesystem::remove_all(*dir_);
        delete dir_;
    }
    static std::filesystem::path hist() { return *dir_ / "hist"; }
    static std::filesystem::path path(const std::string& name) { return *dir_ / name; }

    static std::filesystem::path* dir_;
};

std::filesystem::path* CliRun::dir_ = nullptr;

}  // namespace

TEST(Cli, HelpExitsZero) {
    auto r = run({"blocking", "--help"});
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("--no-strip-suffix"), std::string::npos);
    EXPECT_EQ(run({"--help"}).status, 0);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).status, 2);
    EXPECT_EQ(run({"frobnicate"}).status, 2);
    auto r = run({"extract", "--snapshots", "x", "--bogus"});
    EXPECT_EQ(r.status, 2);
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(run({"extract", "--out", "x"}).status, 2);
    EXPECT_EQ(run({"extract", "--snapshots", "x", "--out", "y", "--parallel", "0"}).status, 2);
}

TEST(Cli, MissingInputExitsOne) {
    auto r = run({"extract", "--snapshots", "/nonexistent/corrhist", "--out", "/tmp/x.tsv", "--quiet"});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST_F(CliRun, ExtractSummaryMatchesLog) {
    auto r = run({"extract", "--snapshots", hist().string(), "--out", path("cases.tsv").string(), "--quiet"});
    ASSERT_EQ(r.status, 0) << r.err;
    auto log = parse_ground_truth_tsv(read_file(hist() / "ground-truth.tsv"));
    KindCounts k;
    for (const auto& e : log)
        if (is_correction(e.kind))
            k.add(parse_kind(edit_kind_name(e.kind)));
    EXPECT_EQ(r.out, cli::detail::counts_line(k) + "\n");
    auto cases = extract_corrections(load_history(list_snapshot_files(hist())));
    EXPECT_TRUE(log_mismatches(cases, log).empty());
    EXPECT_EQ(read_file(path("cases.tsv")), case_summary_tsv(cases));
}

TEST_F(CliRun, OutputIdenticalAcrossParallelism) {
    for (const char* sub : {"case-collection", "extract"}) {
        auto a = path(std::string(sub) + "-1");
        auto b = path(std::string(sub) + "-4");
        ASSERT_EQ(run({sub, "--snapshots", hist().string(), "--out", a.string(), "--parallel", "1", "--quiet"}).status, 0);
        ASSERT_EQ(run({sub, "--snapshots", hist().string(), "--out", b.string(), "--parallel", "4", "--quiet"}).status, 0);
        if (std::filesystem::is_directory(a)) {
            std::size_t n = 0;
            for (const auto& f : std::filesystem::directory_iterator(a)) {
                EXPECT_EQ(read_file(f.path()), read_file(b / f.path().filename()));
                ++n;
            }
            EXPECT_GT(n, 1u);
        } else {
            EXPECT_EQ(read_file(a), read_file(b));
        }
    }
}

TEST_F(CliRun, EmbeddedBlockingAndStats) {
    auto files = list_snapshot_files(hist());
    std::string t1 = files.front().declared_date->str(), t2 = files.back().declared_date->str();
    auto r = run({"embedded", "--snapshots", hist().string(), "--out", path("emb").string(), "--t1", t1, "--t2", t2,
                  "--quiet"});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out.rfind(t1 + "\t" + t2 + "\tsplit ", 0), 0u) << r.out;
    EXPECT_TRUE(std::filesystem::exists(path("emb") / "annotations.xml"));
    EXPECT_EQ(run({"embedded", "--snapshots", hist().string(), "--out", path("emb2").string(), "--t1", t2, "--t2", t1,
                   "--quiet"})
                  .status,
              1);

    r = run({"blocking", "--snapshots", hist().string(), "--quiet"});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out.rfind("subset\tpairs\t", 0), 0u);

    r = run({"stats", "--snapshots", hist().string()});
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(static_cast<std::size_t>(std::count(r.out.begin(), r.out.end(), '\n')), files.size() + 1);
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(run({"stats", "--snapshots", hist().string(), "--quiet"}).err, "");
}

TEST_F(CliRun, GzipGenerationReadsBack) {
    auto gz = path("gz");
    ASSERT_EQ(run({"generate", "--out", gz.string(), "--seed", "4", "--dense", "--gzip", "--quiet"}).status, 0);
    EXPECT_EQ(load_history(list_snapshot_files(gz)).latest(), load_history(list_snapshot_files(hist())).latest());
}

TEST_F(CliRun, CorruptSnapshotExitsOne) {
    auto broken = path("broken");
    std::filesystem::create_directories(broken);
    std::ofstream(broken / "snapshot-2017-01-01.xml") << "<snapshot date=\"2017-01-01\"><profile";
    std::ofstream(broken / "snapshot-2017-01-02.xml") << "<snapshot date=\"2017-01-02\" version=\"1\"/>";
    auto r = run({"extract", "--snapshots", broken.string(), "--out", path("b.tsv").string(), "--quiet"});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("snapshot-2017-01-01.xml"), std::string::npos);
}
